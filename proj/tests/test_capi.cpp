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

#include "revlabel/revlabel.h"
#include "support.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <string>

namespace {

const char* kCsv =
    "id,text,label,app_id\n"
    "r1,The app crashes whenever I upload photos,bug report,Dropbox\n"
    "r2,Please add a dark mode option for night use,user request,Dropbox\n"
    "r3,Love it,praise,WhatsApp\n"
    "r4,Great app for sharing pins with friends,praise,Pinterest\n"
    "r5,Login fails with an error after the update,bug report,WhatsApp\n"
    "r6,Would like export to pdf and calendar sync,user request,Pinterest\n";

int run(const std::string& args) {
  const std::string cmd = "'" REVLABEL_CLI "' --data-dir '" REVLABEL_TEST_DATA_DIR "' " + args +
                          " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// Fixture mocks answering every record with the same category.
std::string manifest(const std::string& mapping, bool complete_fixture) {
  std::string fixture;
  for (int i = 1; i <= 6; ++i) {
    if (!complete_fixture && i == 4) continue;
    fixture += std::string(fixture.empty() ? "" : ", ") + "\"r" + std::to_string(i) +
               "\": \"Category: Bug Report\"";
  }
  return R"({"run_id": "c", "datasets": [{"id": "DS1", "path": "in.csv", "mapping": ")" +
         mapping + R"("}], "filter_ineligible": false, "endpoints": [{"model_id": "m1", "mock": {"mode": "fixture", "fixture": {)" +
         fixture + "}}}]}";
}

}  // namespace

TEST_CASE("status helpers") {
  CHECK(std::string(rl_version()) == "0.1.0");
  CHECK(std::string(rl_status_name(RL_ERR_VALIDATION)) == "ValidationError");
  CHECK(rl_status_exit_code(RL_OK) == 0);
  CHECK(rl_status_exit_code(RL_ERR_MISSING_FIELD) == 1);
  CHECK(rl_status_exit_code(RL_ERR_TRANSPORT) == 2);
  CHECK(rl_status_exit_code(RL_ERR_TRAINER_UNAVAILABLE) == 2);
}

TEST_CASE("text functions") {
  rl_context* ctx = rl_context_create(REVLABEL_TEST_DATA_DIR);
  REQUIRE(ctx != nullptr);
  char buf[64];
  size_t needed = 0;
  CHECK(rl_clean_text(ctx, "Camera freezes after update #bug", buf, sizeof buf, &needed) == RL_OK);
  CHECK(std::string(buf) == "camera freezes update bug");
  CHECK(needed == 25);
  char tiny[7];
  CHECK(rl_clean_text(ctx, "Camera freezes after update #bug", tiny, sizeof tiny, &needed) == RL_OK);
  CHECK(std::string(tiny) == "camera");
  CHECK(rl_is_eligible("Camera freezes after update #bug") == 1);
  CHECK(rl_is_eligible("Love it 100%") == 0);
  rl_context_destroy(ctx);
}

TEST_CASE("dataset functions") {
  testing::TempDir dir("capi");
  testing::write(dir / "in.csv", kCsv);
  rl_context* ctx = rl_context_create(REVLABEL_TEST_DATA_DIR);
  rl_dataset* ds = nullptr;
  REQUIRE(rl_dataset_ingest(ctx, (dir / "in.csv").c_str(), "csv", "DS1", "app_store", 1, &ds) == RL_OK);
  CHECK(rl_dataset_size(ds) == 6);
  size_t removed = 0;
  CHECK(rl_dataset_filter_eligible(ctx, ds, &removed) == RL_OK);
  CHECK(removed == 1);
  size_t dropped = 0;
  CHECK(rl_dataset_adapt(ctx, ds, "DS1", &dropped) == RL_OK);
  CHECK(dropped == 0);
  CHECK(rl_dataset_write(ctx, ds, (dir / "ds.jsonl").c_str()) == RL_OK);

  rl_dataset* back = nullptr;
  CHECK(rl_dataset_load(ctx, (dir / "ds.jsonl").c_str(), &back) == RL_OK);
  CHECK(rl_dataset_size(back) == 5);
  CHECK(rl_dataset_dedup(ctx, back, ds, &removed) == RL_OK);
  CHECK(removed == 5);
  rl_dataset_destroy(back);

  CHECK(rl_dataset_adapt(ctx, ds, "DS99", &dropped) != RL_OK);
  CHECK(std::string(rl_last_error(ctx)).find("DS99") != std::string::npos);

  rl_dataset* none = nullptr;
  CHECK(rl_dataset_ingest(ctx, (dir / "missing.csv").c_str(), "csv", "X", "app_store", 1, &none) ==
        RL_ERR_UNREADABLE_FILE);
  CHECK(rl_dataset_ingest(ctx, (dir / "in.csv").c_str(), "xml", "X", "app_store", 1, &none) ==
        RL_ERR_INVALID_ARGUMENT);
  CHECK(none == nullptr);
  rl_dataset_destroy(ds);
  rl_context_destroy(ctx);
}

TEST_CASE("manifest functions") {
  testing::TempDir dir("capi");
  testing::write(dir / "in.csv", kCsv);
  testing::write(dir / "good.json", manifest("DS1", true));
  testing::write(dir / "bad.json", manifest("DS99", true));
  rl_context* ctx = rl_context_create(REVLABEL_TEST_DATA_DIR);
  rl_manifest* m = nullptr;
  REQUIRE(rl_manifest_load(ctx, (dir / "bad.json").c_str(), &m) == RL_OK);
  CHECK(rl_manifest_validate(ctx, m) == RL_ERR_VALIDATION);
  rl_manifest_destroy(m);

  REQUIRE(rl_manifest_load(ctx, (dir / "good.json").c_str(), &m) == RL_OK);
  rl_manifest_set_seed(m, 5);
  CHECK(rl_manifest_validate(ctx, m) == RL_OK);
  CHECK(rl_run_classify(ctx, m, (dir / "out").c_str()) == RL_OK);
  CHECK(std::filesystem::is_regular_file(dir / "out" / "predictions" / "DS1" / "m1.jsonl"));
  CHECK(rl_report(ctx, (dir / "out" / "metrics.jsonl").c_str(), "csv", (dir / "r.csv").c_str()) ==
        RL_OK);
  CHECK(testing::slurp(dir / "r.csv").starts_with("setting,target_label,app,condition"));
  rl_manifest_destroy(m);
  rl_context_destroy(ctx);
}

TEST_CASE("command line exit codes") {
  testing::TempDir dir("cli");
  testing::write(dir / "in.csv", kCsv);
  testing::write(dir / "good.json", manifest("DS1", true));
  testing::write(dir / "bad.json", manifest("DS99", true));
  testing::write(dir / "miss.json", manifest("DS1", false));

  CHECK(run("ingest --input " + q(dir / "in.csv") + " --id DS1 --out " + q(dir / "a.jsonl")) == 0);
  CHECK(run("adapt --dataset " + q(dir / "a.jsonl") + " --mapping DS1 --out " + q(dir / "b.jsonl")) == 0);
  CHECK(run("folds --dataset " + q(dir / "b.jsonl") + " --k 2 --out " + q(dir / "f.jsonl")) == 0);
  CHECK(run("classify --manifest " + q(dir / "good.json") + " --out-dir " + q(dir / "o1")) == 0);
  CHECK(run("report --metrics " + q(dir / "o1" / "metrics.jsonl") + " --out " + q(dir / "r.md")) == 0);

  // validation: bad inputs and configuration
  CHECK(run("classify --manifest " + q(dir / "bad.json") + " --out-dir " + q(dir / "o2")) == 1);
  CHECK(run("adapt --dataset " + q(dir / "a.jsonl") + " --mapping DS99 --out " + q(dir / "c.jsonl")) == 1);
  CHECK(run("folds --dataset " + q(dir / "b.jsonl") + " --k 5 --out " + q(dir / "g.jsonl")) == 1);
  CHECK(run("no-such-command") == 1);
  CHECK(run("ingest --id X") == 1);

  // runtime: the mock has no answer for one record
  CHECK(run("classify --manifest " + q(dir / "miss.json") + " --out-dir " + q(dir / "o3")) == 2);
  CHECK(std::filesystem::is_regular_file(dir / "o3" / "predictions" / "DS1" / "m1.jsonl"));
}
