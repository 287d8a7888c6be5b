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

#include "extraction_cases.hpp"
#include "revlabel/error.hpp"
#include "revlabel/extraction.hpp"
#include "support.hpp"

using namespace revlabel;

namespace {

AliasTable coarse_aliases() {
  auto scheme = load_scheme(testing::data_dir() / "definitions", "coarse");
  return AliasTable::load(testing::data_dir() / "aliases", scheme);
}

}  // namespace

TEST_CASE("documented examples") {
  auto aliases = coarse_aliases();
  auto p = extract_label("Category: Bug Report", aliases, "r1", "m");
  CHECK(p.status == ParseStatus::Ok);
  CHECK(p.label == std::optional<std::string>("Bug Report"));
  CHECK(p.record_id == "r1");
  CHECK(p.model_id == "m");
  CHECK(extract_label("This could be a bug report or a feature request.", aliases).status ==
        ParseStatus::Ambiguous);
  CHECK(extract_label("I am unable to determine this.", aliases).status ==
        ParseStatus::ParseFailed);
}

TEST_CASE("curated fixture") {
  auto aliases = coarse_aliases();
  for (const auto& c : testing::extraction_cases()) {
    CAPTURE(c.raw);
    auto p = extract_label(c.raw, aliases);
    CHECK(to_string(p.status) == c.status);
    if (c.status == "ok") {
      CHECK(p.label == std::optional<std::string>(c.label));
    } else {
      CHECK_FALSE(p.label.has_value());
    }
  }
}

TEST_CASE("alias tables") {
  auto t = AliasTable::parse("Bug Report = bug, defect\nOther = misc\n", "s");
  REQUIRE(t.entries().size() == 2);
  CHECK(t.entries()[0].aliases.size() == 3);  // name plus two
  CHECK(extract_label("a DEFECT", t).label == std::optional<std::string>("Bug Report"));

  try {
    AliasTable::parse("Bug Report = issue\nFeature Request = Issue\n", "s");
    FAIL("expected AliasConflict");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AliasConflict);
  }

  // a scheme without an alias file falls back to its names
  auto ds2 = load_scheme(testing::data_dir() / "definitions", "DS2");
  auto fallback = AliasTable::load(testing::data_dir() / "aliases", ds2);
  CHECK(fallback.entries().size() == ds2.categories.size());
  CHECK(extract_label("Category: " + ds2.categories[0].category_name, fallback).status ==
        ParseStatus::Ok);
}

TEST_CASE("every shipped alias file loads without conflicts") {
  for (const char* id : {"coarse", "DS1", "DS7"}) {
    CAPTURE(id);
    auto scheme = load_scheme(testing::data_dir() / "definitions", id);
    CHECK_NOTHROW(AliasTable::load(testing::data_dir() / "aliases", scheme));
  }
}

TEST_CASE("prediction io and review queue") {
  testing::TempDir dir("ex");
  auto aliases = coarse_aliases();
  std::vector<Prediction> preds = {
      extract_label("Category: Other", aliases, "a", "m1"),
      extract_label("bug or feature?", aliases, "b", "m1"),
      extract_label("no idea \"quoted\"\nnewline", aliases, "c", "m1"),
  };
  write_predictions(dir / "p.jsonl", preds);
  CHECK(read_predictions(dir / "p.jsonl") == preds);
  CHECK(prediction_from_json(prediction_to_json(preds[1])) == preds[1]);
  CHECK_THROWS_AS(prediction_from_json(R"({"record_id":"x","status":"ok"})"), Error);
  CHECK_THROWS_AS(prediction_from_json(R"({"record_id":"x","status":"maybe"})"), Error);

  append_review_queue(dir / "q.jsonl", preds);
  append_review_queue(dir / "q.jsonl", preds);
  auto lines = testing::slurp(dir / "q.jsonl");
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 4);
  CHECK(lines.find("\"record_id\":\"a\"") == std::string::npos);
  CHECK(lines.find("\"status\":\"ambiguous\"") != std::string::npos);
}
