/*
 * Copyright 2026 The revlabel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "revlabel/error.hpp"
#include "revlabel/prompt.hpp"
#include "support.hpp"

using namespace revlabel;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

FeedbackRecord sample(std::string id, std::string text) {
  FeedbackRecord r;
  r.id = std::move(id);
  r.dataset_id = "T";
  r.text = std::move(text);
  return r;
}

Dataset balanced(std::size_t per_class) {
  Dataset ds{"B", {}};
  const CoarseLabel labels[] = {CoarseLabel::BugReport, CoarseLabel::FeatureRequest,
                                CoarseLabel::Other};
  for (std::size_t i = 0; i < per_class * 3; ++i) {
    auto r = sample("b" + std::to_string(i), "text number " + std::to_string(i));
    r.coarse_label = labels[i % 3];
    ds.records.push_back(r);
  }
  return ds;
}

}  // namespace

TEST_CASE("coarse scheme loads in file order") {
  auto scheme = load_scheme(testing::data_dir() / "definitions", "coarse");
  CHECK(scheme.is_coarse());
  CHECK(scheme.names() == std::vector<std::string>{"Bug Report", "Feature Request", "Other"});
  CHECK(scheme.canonical("feature request") == std::optional<std::string>("Feature Request"));
  CHECK(scheme.index_of("OTHER") == std::optional<std::size_t>(2));
  CHECK_FALSE(scheme.index_of("Praise").has_value());
}

TEST_CASE("every dataset definition file parses") {
  for (int i = 1; i <= 8; ++i) {
    const std::string id = "DS" + std::to_string(i);
    CAPTURE(id);
    auto scheme = load_scheme(testing::data_dir() / "definitions", id);
    CHECK(scheme.categories.size() >= 2);
    for (const auto& c : scheme.categories) CHECK_FALSE(c.definition.empty());
  }
}

TEST_CASE("scheme parse errors") {
  CHECK_THROWS_AS(parse_scheme("A = x\na = y\n", "s"), Error);
  CHECK_THROWS_AS(parse_scheme("A =\n", "s"), Error);
  CHECK_THROWS_AS(parse_scheme("# nothing\n", "s"), Error);
}

TEST_CASE("zero-shot prompt shape") {
  auto scheme = load_scheme(testing::data_dir() / "definitions", "coarse");
  auto templates = PromptTemplates::load(testing::data_dir() / "templates");
  auto p = build_prompt(scheme, sample("s1", "App crashes on launch"), {}, templates);
  CHECK(count(p.context, "\n- ") + (p.context.starts_with("- ") ? 1 : 0) == 3);
  for (const auto& name : scheme.names()) CHECK(count(p.context, "- " + name + ": ") == 1);
  CHECK(p.context.find("Examples") == std::string::npos);
  CHECK(p.context.find("{{") == std::string::npos);
  CHECK(p.instruction.find("\"\"\"App crashes on launch\"\"\"") != std::string::npos);
  CHECK(p.sample_record_id == "s1");
  CHECK(p.scheme_id == "coarse");
  CHECK(p.full_text() == p.context + "\n\n" + p.instruction);
}

TEST_CASE("few-shot examples render in class order") {
  auto scheme = load_scheme(testing::data_dir() / "definitions", "coarse");
  auto templates = PromptTemplates::load(testing::data_dir() / "templates");
  std::vector<Shot> shots = {{"o", "Nice colours", "other"},
                             {"b", "Freezes when syncing", "Bug Report"},
                             {"f", "Add a widget", "feature request"}};
  auto p = build_prompt(scheme, sample("s1", "Login fails"), shots, templates);
  CHECK(count(p.context, "Examples:") == 1);
  CHECK(count(p.context, "\nFeedback: ") == 3);
  const auto b = p.context.find("Freezes when syncing");
  const auto f = p.context.find("Add a widget");
  const auto o = p.context.find("Nice colours");
  CHECK(b < f);
  CHECK(f < o);
  CHECK(p.context.find("Category: Feature Request") != std::string::npos);

  SUBCASE("sample among shots") {
    try {
      build_prompt(scheme, sample("b", "Freezes when syncing"), shots, templates);
      FAIL("expected ShotEqualsSample");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ShotEqualsSample);
    }
  }
  SUBCASE("unknown shot label") {
    std::vector<Shot> bad = {{"x", "hmm", "Praise"}};
    try {
      build_prompt(scheme, sample("s1", "Login fails"), bad, templates);
      FAIL("expected ShotLabelUnknown");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ShotLabelUnknown);
    }
  }
  SUBCASE("empty sample") {
    CHECK_THROWS_AS(build_prompt(scheme, sample("s2", "  "), {}, templates), Error);
  }
}

TEST_CASE("prompts are stable bytes") {
  auto scheme = load_scheme(testing::data_dir() / "definitions", "coarse");
  auto templates = PromptTemplates::load(testing::data_dir() / "templates");
  auto a = build_prompt(scheme, sample("s1", "x y z"), {}, templates);
  auto b = build_prompt(scheme, sample("s1", "x y z"), {}, templates);
  CHECK(a == b);
}

TEST_CASE("select_shots") {
  auto scheme = load_scheme(testing::data_dir() / "definitions", "coarse");
  auto ds = balanced(10);
  auto sel = select_shots(ds, scheme, 1, 42);
  REQUIRE(sel.shots.size() == 3);
  CHECK(sel.residual.size() == 27);
  CHECK(sel.shots[0].label == "Bug Report");
  CHECK(sel.shots[1].label == "Feature Request");
  CHECK(sel.shots[2].label == "Other");
  for (const auto& s : sel.shots) {
    for (const auto& r : sel.residual.records) CHECK(r.id != s.record_id);
  }

  auto again = select_shots(ds, scheme, 1, 42);
  for (std::size_t i = 0; i < 3; ++i) CHECK(again.shots[i].record_id == sel.shots[i].record_id);

  Dataset no_feature = ds;
  std::erase_if(no_feature.records, [](const FeedbackRecord& r) {
    return r.coarse_label == CoarseLabel::FeatureRequest;
  });
  try {
    select_shots(no_feature, scheme, 1, 42);
    FAIL("expected InsufficientClassSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientClassSamples);
    CHECK(std::string(e.what()).find("Feature Request") != std::string::npos);
  }
}

TEST_CASE("scheme_label under an original scheme") {
  auto scheme = load_scheme(testing::data_dir() / "definitions", "DS1");
  FeedbackRecord r = sample("r", "text");
  r.original_label = "bug report";
  auto label = scheme_label(scheme, r);
  REQUIRE(label.has_value());
  CHECK(scheme.index_of(*label).has_value());
}
