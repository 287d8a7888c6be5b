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

#include "revlabel/consensus.hpp"

#include "revlabel/error.hpp"
#include "util.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <unordered_map>

namespace revlabel {

using json = nlohmann::ordered_json;

ConsensusResult unanimous_label(std::string_view record_id,
                                std::span<const Prediction> predictions,
                                std::span<const std::string> required_models) {
  std::map<std::string, const Prediction*> by_model;
  for (const auto& p : predictions) {
    if (!by_model.emplace(p.model_id, &p).second) {
      throw Error(ErrorCode::DuplicateModelPrediction,
                  "model '" + p.model_id + "' predicted record '" +
                      std::string(record_id) + "' twice");
    }
  }

  ConsensusResult result{std::string(record_id), std::nullopt, {}};
  std::array<std::vector<std::string>, kCoarseLabels.size()> groups;
  bool complete = !required_models.empty();
  for (const auto& model : required_models) {
    auto it = by_model.find(model);
    if (it == by_model.end() || it->second->status != ParseStatus::Ok) {
      complete = false;
      continue;
    }
    auto label = parse_coarse_label(*it->second->label);
    if (!label) {
      throw Error(ErrorCode::InvalidArgument,
                  "consensus needs coarse labels, got '" + *it->second->label +
                      "'");
    }
    groups[static_cast<std::size_t>(*label)].push_back(model);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < groups.size(); ++i) {
    if (groups[i].size() > groups[best].size()) best = i;
  }
  result.agreeing_models = groups[best];
  if (complete && groups[best].size() == required_models.size()) {
    result.label = kCoarseLabels[best];
  }
  return result;
}

ConsensusDataset build_consensus_dataset(
    const Dataset& universe, std::span<const Prediction> predictions,
    std::span<const std::string> required_models) {
  std::unordered_map<std::string, std::vector<Prediction>> by_record;
  for (const auto& p : predictions) by_record[p.record_id].push_back(p);

  ConsensusDataset out;
  out.dataset.id = universe.id;
  out.results.reserve(universe.size());
  static const std::vector<Prediction> kNone;
  for (const auto& rec : universe.records) {
    auto it = by_record.find(rec.id);
    const auto& preds = it == by_record.end() ? kNone : it->second;
    auto result = unanimous_label(rec.id, preds, required_models);
    if (result.label) {
      FeedbackRecord labelled = rec;
      labelled.original_label.reset();
      labelled.coarse_label = result.label;
      labelled.provenance = Provenance::LlmConsensus;
      out.dataset.records.push_back(std::move(labelled));
    }
    out.results.push_back(std::move(result));
  }
  return out;
}

void write_consensus_jsonl(const std::filesystem::path& path,
                           std::span<const ConsensusResult> results) {
  std::string out;
  for (const auto& r : results) {
    json obj;
    obj["record_id"] = r.record_id;
    obj["label"] = r.label ? json(token(*r.label)) : json(nullptr);
    obj["agreeing_models"] = r.agreeing_models;
    out += obj.dump();
    out.push_back('\n');
  }
  detail::write_file(path, out);
}

}  // namespace revlabel
