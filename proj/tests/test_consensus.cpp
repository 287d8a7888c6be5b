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

#include "revlabel/consensus.hpp"
#include "revlabel/error.hpp"
#include "support.hpp"

using namespace revlabel;

namespace {

const std::vector<std::string> kModels = {"a", "b", "c", "d"};

Prediction ok(std::string rec, std::string model, std::string label) {
  return {rec, model, label, label, ParseStatus::Ok};
}

Prediction failed(std::string rec, std::string model, ParseStatus s) {
  return {rec, model, "??", std::nullopt, s};
}

}  // namespace

TEST_CASE("four agreeing models") {
  std::vector<Prediction> p = {ok("r", "a", "Bug Report"), ok("r", "b", "Bug Report"),
                               ok("r", "c", "Bug Report"), ok("r", "d", "Bug Report")};
  auto res = unanimous_label("r", p, kModels);
  CHECK(res.label == std::optional<CoarseLabel>(CoarseLabel::BugReport));
  CHECK(res.agreeing_models == kModels);
}

TEST_CASE("one dissenting model") {
  std::vector<Prediction> p = {ok("r", "a", "Bug Report"), ok("r", "b", "Bug Report"),
                               ok("r", "c", "Bug Report"), ok("r", "d", "Feature Request")};
  auto res = unanimous_label("r", p, kModels);
  CHECK_FALSE(res.label.has_value());
  CHECK(res.agreeing_models == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("a non-ok prediction blocks consensus") {
  std::vector<Prediction> p = {ok("r", "a", "Bug Report"), ok("r", "b", "Bug Report"),
                               ok("r", "c", "Bug Report"),
                               failed("r", "d", ParseStatus::Ambiguous)};
  CHECK_FALSE(unanimous_label("r", p, kModels).label.has_value());
  p.pop_back();  // missing model
  CHECK_FALSE(unanimous_label("r", p, kModels).label.has_value());
}

TEST_CASE("models outside the required set are ignored") {
  std::vector<Prediction> p = {ok("r", "a", "Other"), ok("r", "b", "Other"),
                               ok("r", "z", "Bug Report")};
  const std::vector<std::string> req = {"a", "b"};
  CHECK(unanimous_label("r", p, req).label == std::optional<CoarseLabel>(CoarseLabel::Other));
}

TEST_CASE("duplicate predictions from one model") {
  std::vector<Prediction> p = {ok("r", "a", "Other"), ok("r", "a", "Other")};
  try {
    unanimous_label("r", p, kModels);
    FAIL("expected DuplicateModelPrediction");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateModelPrediction);
  }
}

TEST_CASE("consensus dataset") {
  Dataset universe{"U", {}};
  for (int i = 0; i < 10; ++i) {
    FeedbackRecord r;
    r.id = "u" + std::to_string(i);
    r.dataset_id = "U";
    r.text = "text " + std::to_string(i);
    r.app_id = "Zoom";
    universe.records.push_back(r);
  }
  std::vector<Prediction> preds;
  for (int i = 0; i < 10; ++i) {
    const auto id = "u" + std::to_string(i);
    for (const auto& m : kModels) {
      // the first six are unanimous
      const bool dissent = i >= 6 && m == "d";
      preds.push_back(ok(id, m, dissent ? "Other" : "Feature Request"));
    }
  }
  auto cd = build_consensus_dataset(universe, preds, kModels);
  CHECK(cd.dataset.size() == 6);
  CHECK(cd.results.size() == 10);
  for (const auto& r : cd.dataset.records) {
    CHECK(r.provenance == Provenance::LlmConsensus);
    CHECK(r.coarse_label == std::optional<CoarseLabel>(CoarseLabel::FeatureRequest));
    CHECK(r.app_id == std::optional<std::string>("Zoom"));
  }

  std::vector<Prediction> none;
  for (int i = 0; i < 10; ++i) none.push_back(failed("u" + std::to_string(i), "a", ParseStatus::ParseFailed));
  CHECK(build_consensus_dataset(universe, none, kModels).dataset.size() == 0);

  testing::TempDir dir("cons");
  write_consensus_jsonl(dir / "c.jsonl", cd.results);
  auto text = testing::slurp(dir / "c.jsonl");
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);
  CHECK(text.find("\"label\":\"FeatureRequest\"") != std::string::npos);
  CHECK(text.find("\"label\":null") != std::string::npos);
}
