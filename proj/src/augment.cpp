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

#include "revlabel/augment.hpp"

#include "revlabel/error.hpp"
#include "revlabel/random.hpp"
#include "util.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <unordered_set>

namespace revlabel {

using json = nlohmann::ordered_json;

std::string_view to_string(AugmentMode mode) noexcept {
  return mode == AugmentMode::Random ? "random" : "app_specific";
}

std::optional<AugmentMode> parse_augment_mode(std::string_view text) {
  auto key = label_key(text);
  if (key == "random") return AugmentMode::Random;
  if (key == "app_specific" || key == "appspecific" || key == "app-specific")
    return AugmentMode::AppSpecific;
  return std::nullopt;
}

std::size_t augmentation_count(double ratio, std::size_t human_count) {
  const double exact = ratio * static_cast<double>(human_count);
  return static_cast<std::size_t>(std::floor(exact + 1e-9));
}

AugmentedTrainingSet sample_augmentation(const Dataset& human,
                                         const Dataset& pool, double ratio,
                                         AugmentMode mode,
                                         std::optional<std::string> target_app,
                                         const Dataset& truth_set,
                                         std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "augmentation ratio must be in (0, 1]");
  }
  if (mode == AugmentMode::AppSpecific && (!target_app || target_app->empty())) {
    throw Error(ErrorCode::MissingAppId,
                "app-specific augmentation needs a target app");
  }

  std::unordered_set<std::string> truth_keys;
  for (const auto& r : truth_set.records) truth_keys.insert(normalized_text(r.text));

  std::array<std::size_t, kCoarseLabels.size()> human_counts{};
  for (const auto& r : human.records) {
    if (!r.coarse_label) {
      throw Error(ErrorCode::InvalidArgument,
                  "human record '" + r.id + "' has no coarse label");
    }
    ++human_counts[static_cast<std::size_t>(*r.coarse_label)];
  }

  std::array<std::vector<std::size_t>, kCoarseLabels.size()> candidates;
  for (std::size_t i = 0; i < pool.records.size(); ++i) {
    const auto& r = pool.records[i];
    if (!r.coarse_label) {
      throw Error(ErrorCode::InvalidArgument,
                  "pool record '" + r.id + "' has no coarse label");
    }
    if (mode == AugmentMode::AppSpecific && r.app_id != target_app) continue;
    if (truth_keys.contains(normalized_text(r.text))) continue;
    candidates[static_cast<std::size_t>(*r.coarse_label)].push_back(i);
  }

  AugmentedTrainingSet aug;
  aug.human = human;
  aug.ratio = ratio;
  aug.mode = mode;
  aug.target_app = mode == AugmentMode::AppSpecific ? target_app : std::nullopt;
  aug.seed = seed;
  aug.synthetic.id = pool.id;

  Rng rng(derive_seed(seed, std::string("augment:") + std::string(to_string(mode)) +
                                ":" + target_app.value_or("")));
  for (auto label : kCoarseLabels) {
    const auto c = static_cast<std::size_t>(label);
    const std::size_t need = augmentation_count(ratio, human_counts[c]);
    auto& pool_c = candidates[c];
    if (pool_c.size() < need) {
      throw InsufficientPoolError(std::string(token(label)), need - pool_c.size());
    }
    for (std::size_t k = 0; k < need; ++k) {
      std::size_t j = k + rng.uniform_index(pool_c.size() - k);
      std::swap(pool_c[k], pool_c[j]);
      FeedbackRecord rec = pool.records[pool_c[k]];
      rec.provenance = Provenance::LlmConsensus;
      rec.original_label.reset();
      aug.synthetic.records.push_back(std::move(rec));
    }
  }
  return aug;
}

Dataset merge_training_set(const AugmentedTrainingSet& aug) {
  Dataset merged;
  merged.id = aug.human.id;
  merged.records.reserve(aug.human.size() + aug.synthetic.size());
  merged.records.insert(merged.records.end(), aug.human.records.begin(),
                        aug.human.records.end());
  merged.records.insert(merged.records.end(), aug.synthetic.records.begin(),
                        aug.synthetic.records.end());
  Rng rng(derive_seed(aug.seed, "merge"));
  shuffle(merged.records, rng);
  return merged;
}

std::string train_jsonl(const Dataset& ds) {
  std::string out;
  for (const auto& r : ds.records) {
    if (!r.coarse_label) {
      throw Error(ErrorCode::InvalidArgument,
                  "training record '" + r.id + "' has no coarse label");
    }
    json obj;
    obj["id"] = r.id;
    obj["text"] = r.text;
    obj["coarse_label"] = token(*r.coarse_label);
    obj["provenance"] = to_string(r.provenance);
    obj["dataset_id"] = r.dataset_id;
    obj["app_id"] = r.app_id ? json(*r.app_id) : json(nullptr);
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

void write_train_jsonl(const std::filesystem::path& path, const Dataset& ds) {
  detail::write_file(path, train_jsonl(ds));
}

}  // namespace revlabel
