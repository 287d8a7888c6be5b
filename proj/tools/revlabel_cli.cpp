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

// revlabel command line. Exit codes: 0 success, 1 validation error,
// 2 runtime error.

#include "revlabel/revlabel.h"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace {

struct Ctx {
  rl_context* ctx = nullptr;
  ~Ctx() { rl_context_destroy(ctx); }
};

struct DatasetHandle {
  rl_dataset* ds = nullptr;
  ~DatasetHandle() { rl_dataset_destroy(ds); }
};

struct ManifestHandle {
  rl_manifest* m = nullptr;
  ~ManifestHandle() { rl_manifest_destroy(m); }
};

int report(rl_context* ctx, rl_status st) {
  if (st != RL_OK) {
    std::cerr << "revlabel: " << rl_status_name(st) << ": " << rl_last_error(ctx) << '\n';
  }
  return rl_status_exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-LLM feedback labelling, consensus and augmentation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rl_version());
  std::string data_dir;
  app.add_option("--data-dir", data_dir, "Mappings, definitions, aliases and templates");

  // manifest-driven stages
  std::string manifest_path, out_dir;
  std::optional<std::uint64_t> seed;
  auto manifest_cmd = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--manifest", manifest_path, "Run manifest (JSON)")->required();
    sub->add_option("--out-dir", out_dir, "Output directory")->required();
    sub->add_option("--seed", seed, "Override the manifest seed");
    return sub;
  };
  auto* classify = manifest_cmd("classify", "Prompt every endpoint for every dataset");
  auto* consensus = manifest_cmd("consensus", "Unanimous labels from classify output");
  auto* augment = manifest_cmd("augment", "Build training sets, train, report");
  auto* run = manifest_cmd("run", "classify, consensus and augment in order");

  // ingest
  std::string input, format = "csv", dataset_id, source = "app_store", out, dedup_ref;
  bool unlabeled = false, filter = false;
  auto* ingest = app.add_subcommand("ingest", "Read a csv/jsonl corpus into dataset jsonl");
  ingest->add_option("--input", input)->required()->check(CLI::ExistingFile);
  ingest->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  ingest->add_option("--id", dataset_id)->required();
  ingest->add_option("--source", source)->check(CLI::IsMember({"app_store", "forum", "x"}));
  ingest->add_flag("--unlabeled", unlabeled);
  ingest->add_flag("--filter", filter, "Drop records with too few informative tokens");
  ingest->add_option("--dedup-against", dedup_ref, "Dataset jsonl to remove overlaps with");
  ingest->add_option("--out", out)->required();

  // adapt
  std::string dataset_path, mapping;
  auto* adapt = app.add_subcommand("adapt", "Project native labels onto the coarse scheme");
  adapt->add_option("--dataset", dataset_path)->required();
  adapt->add_option("--mapping", mapping)->required();
  adapt->add_option("--out", out)->required();

  // shots
  std::string scheme = "coarse", shots_out;
  std::size_t per_class = 1;
  std::uint64_t plain_seed = 0;
  auto* shots = app.add_subcommand("shots", "Draw few-shot examples; write the residual");
  shots->add_option("--dataset", dataset_path)->required();
  shots->add_option("--scheme", scheme);
  shots->add_option("--per-class", per_class);
  shots->add_option("--seed", plain_seed);
  shots->add_option("--shots-out", shots_out)->required();
  shots->add_option("--out", out)->required();

  // folds
  std::size_t k = 5;
  auto* folds = app.add_subcommand("folds", "Stratified fold plan");
  folds->add_option("--dataset", dataset_path)->required();
  folds->add_option("--k", k);
  folds->add_option("--seed", plain_seed);
  folds->add_option("--out", out)->required();

  // evaluate
  std::string predictions;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against a dataset");
  evaluate->add_option("--dataset", dataset_path)->required();
  evaluate->add_option("--scheme", scheme);
  evaluate->add_option("--predictions", predictions)->required();
  evaluate->add_option("--out", out)->required();

  // report
  std::string metrics, report_format = "markdown";
  auto* report_cmd = app.add_subcommand("report", "Render metrics jsonl");
  report_cmd->add_option("--metrics", metrics)->required();
  report_cmd->add_option("--format", report_format)
      ->check(CLI::IsMember({"markdown", "md", "csv"}));
  report_cmd->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  Ctx c;
  c.ctx = rl_context_create(data_dir.empty() ? nullptr : data_dir.c_str());
  if (!c.ctx) {
    std::cerr << "revlabel: cannot create context\n";
    return 2;
  }
  rl_context* ctx = c.ctx;

  auto with_manifest = [&](auto stage) {
    ManifestHandle m;
    rl_status st = rl_manifest_load(ctx, manifest_path.c_str(), &m.m);
    if (st != RL_OK) return report(ctx, st);
    if (seed) rl_manifest_set_seed(m.m, *seed);
    st = rl_manifest_validate(ctx, m.m);
    if (st != RL_OK) return report(ctx, st);
    return report(ctx, stage(ctx, m.m, out_dir.c_str()));
  };
  if (*classify) return with_manifest(rl_run_classify);
  if (*consensus) return with_manifest(rl_run_consensus);
  if (*augment) return with_manifest(rl_run_augment);
  if (*run) return with_manifest(rl_run_all);

  DatasetHandle ds;
  if (*ingest) {
    rl_status st = rl_dataset_ingest(ctx, input.c_str(), format.c_str(), dataset_id.c_str(),
                                     source.c_str(), unlabeled ? 0 : 1, &ds.ds);
    std::size_t removed = 0;
    if (st == RL_OK && filter) {
      st = rl_dataset_filter_eligible(ctx, ds.ds, &removed);
      if (st == RL_OK) std::cerr << "ineligible removed: " << removed << '\n';
    }
    if (st == RL_OK && !dedup_ref.empty()) {
      DatasetHandle ref;
      st = rl_dataset_load(ctx, dedup_ref.c_str(), &ref.ds);
      if (st == RL_OK) st = rl_dataset_dedup(ctx, ds.ds, ref.ds, &removed);
      if (st == RL_OK) std::cerr << "overlaps removed: " << removed << '\n';
    }
    if (st == RL_OK) st = rl_dataset_write(ctx, ds.ds, out.c_str());
    return report(ctx, st);
  }

  if (*report_cmd) {
    return report(ctx, rl_report(ctx, metrics.c_str(), report_format.c_str(), out.c_str()));
  }

  rl_status st = rl_dataset_load(ctx, dataset_path.c_str(), &ds.ds);
  if (st != RL_OK) return report(ctx, st);
  if (*adapt) {
    std::size_t dropped = 0;
    st = rl_dataset_adapt(ctx, ds.ds, mapping.c_str(), &dropped);
    if (st == RL_OK) {
      std::cerr << "unmapped dropped: " << dropped << '\n';
      st = rl_dataset_write(ctx, ds.ds, out.c_str());
    }
  } else if (*shots) {
    st = rl_dataset_select_shots(ctx, ds.ds, scheme.c_str(), per_class, plain_seed,
                                 shots_out.c_str());
    if (st == RL_OK) st = rl_dataset_write(ctx, ds.ds, out.c_str());
  } else if (*folds) {
    st = rl_dataset_make_folds(ctx, ds.ds, k, plain_seed, out.c_str());
  } else if (*evaluate) {
    st = rl_evaluate(ctx, ds.ds, scheme.c_str(), predictions.c_str(), out.c_str());
  }
  return report(ctx, st);
}
