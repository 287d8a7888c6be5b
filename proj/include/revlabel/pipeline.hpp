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

#ifndef REVLABEL_PIPELINE_HPP
#define REVLABEL_PIPELINE_HPP

// Manifest-driven orchestration of the classification, consensus and
// augmentation/training experiments. Every stage reads and writes files
// under one output directory with deterministic names:
//
//   datasets/<id>.jsonl                prepared (filtered, deduped, adapted)
//   shots/<id>.jsonl                   few-shot examples removed from <id>
//   predictions/<id>/<model>.jsonl     extracted predictions
//   review_queue.jsonl                 Ambiguous / ParseFailed outputs
//   metrics.jsonl                      one object per report row
//   reports/<id>.{md,csv}              per-dataset classification report
//   consensus/<id>.jsonl               per-record consensus results
//   consensus/<id>.dataset.jsonl       consensus-labelled records
//   augment/...                        train/eval files, trainer jobs
//   reports/<run_id>_augment.{md,csv}  condition report
//   cache/<model>/<hash>.json          response cache (unless overridden)

#include "revlabel/augment.hpp"
#include "revlabel/corpus.hpp"
#include "revlabel/eval.hpp"
#include "revlabel/gateway.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace revlabel {

enum class DatasetRole { Eval, Pool, Train };

struct DatasetSpec {
  DatasetDescriptor descriptor;
  std::filesystem::path path;
  FileFormat format = FileFormat::Csv;
  std::string mapping;  // mappings/<mapping>.map
  DatasetRole role = DatasetRole::Eval;
  std::optional<std::string> dedup_against;
};

struct AugmentSetting {
  std::string name;                      // e.g. "DS2-DS3"
  std::vector<std::string> primary;      // human-labelled training sets
  std::optional<std::string> review_aug; // human-labelled augmentation set
};

struct AugmentationSpec {
  double ratio = 0.3;
  std::vector<AugmentSetting> settings;
  std::string general_pool;
  std::string app_pool;
  std::vector<std::string> target_apps;
  std::vector<CoarseLabel> target_labels = {CoarseLabel::BugReport,
                                            CoarseLabel::FeatureRequest};
  std::string zero_shot_model;
  std::size_t folds = 5;
};

struct TrainerSpec {
  std::vector<std::string> command;
  std::string class_weighting = "balanced";
  int epochs = 3;
  double learning_rate = 2e-5;
  int max_sequence_length = 128;
};

struct RunManifest {
  std::string run_id = "run";
  std::uint64_t seed = 0;
  std::string scheme = std::string(kCoarseSchemeId);  // "coarse" | "original"
  std::size_t shots_per_class = 0;
  std::vector<DatasetSpec> datasets;
  std::vector<EndpointConfig> endpoints;
  std::vector<std::string> consensus_required;
  std::optional<std::string> truth_dataset;
  std::optional<AugmentationSpec> augmentation;
  std::optional<TrainerSpec> trainer;
  std::filesystem::path data_dir;
  std::optional<std::filesystem::path> cache_dir;
  CleanOptions clean;
  bool filter_ineligible = true;

  bool coarse() const noexcept { return scheme == kCoarseSchemeId; }
  const DatasetSpec* find_dataset(std::string_view id) const;
  const EndpointConfig* find_endpoint(std::string_view model_id) const;
};

// Data files (mappings/, definitions/, aliases/, templates/). Taken from
// REVLABEL_DATA_DIR when set, else the directory configured at build time.
std::filesystem::path default_data_dir();

// Relative paths resolve against `base_dir`. Throws ValidationError.
RunManifest parse_manifest(std::string_view json,
                           const std::filesystem::path& base_dir);
RunManifest load_manifest(const std::filesystem::path& path);

// Checks cross references and data files before any request is made.
// Throws ValidationError.
void validate_manifest(const RunManifest& manifest);

struct RunOptions {
  std::filesystem::path out_dir;
  // Overrides endpoint backends (instrumentation in tests).
  std::shared_ptr<Backend> backend;
  RateLimiter::Sleep sleep;
  std::function<void(std::string_view)> log;
};

struct ClassifyOutcome {
  std::size_t prompts = 0;
  std::size_t backend_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t item_errors = 0;
};

struct AugmentOutcome {
  std::vector<ReportRow> rows;
  // "<setting>/<condition>" entries skipped because the trainer is absent.
  std::vector<std::string> skipped;
};

// Errors are rethrown with the stage name prefixed to the message.
ClassifyOutcome run_classify(const RunManifest& manifest,
                             const RunOptions& options);
void run_consensus(const RunManifest& manifest, const RunOptions& options);
// Throws TrainerUnavailable after writing the Zero-Shot rows when no
// trainer can be launched.
AugmentOutcome run_augment_train(const RunManifest& manifest,
                                 const RunOptions& options);
// classify, consensus (coarse scheme), and augment when configured.
void run_all(const RunManifest& manifest, const RunOptions& options);

// Prepared dataset as used by the stages: ingested, eligibility-filtered,
// deduplicated against its reference and, when `coarse`, adapted.
Dataset prepare_dataset(const RunManifest& manifest, const DatasetSpec& spec,
                        bool coarse);

}  // namespace revlabel

#endif  // REVLABEL_PIPELINE_HPP
