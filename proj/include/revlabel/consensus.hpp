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

#ifndef REVLABEL_CONSENSUS_HPP
#define REVLABEL_CONSENSUS_HPP

#include "revlabel/corpus.hpp"
#include "revlabel/extraction.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace revlabel {

struct ConsensusResult {
  std::string record_id;
  std::optional<CoarseLabel> label;
  // All required models when a label is present; otherwise the largest
  // group of required models that agree on one Ok label (may be empty).
  std::vector<std::string> agreeing_models;

  bool operator==(const ConsensusResult&) const = default;
};

// Strict unanimity: every required model must have an Ok prediction and all
// labels must be equal. Predictions from models outside `required_models`
// are ignored. Throws DuplicateModelPrediction.
ConsensusResult unanimous_label(std::string_view record_id,
                                std::span<const Prediction> predictions,
                                std::span<const std::string> required_models);

struct ConsensusDataset {
  Dataset dataset;  // provenance LlmConsensus, coarse_label set
  std::vector<ConsensusResult> results;  // one per universe record
};

ConsensusDataset build_consensus_dataset(
    const Dataset& universe, std::span<const Prediction> predictions,
    std::span<const std::string> required_models);

// record_id, label (token or null), agreeing_models.
void write_consensus_jsonl(const std::filesystem::path& path,
                           std::span<const ConsensusResult> results);

}  // namespace revlabel

#endif  // REVLABEL_CONSENSUS_HPP
