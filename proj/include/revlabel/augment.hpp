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

#ifndef REVLABEL_AUGMENT_HPP
#define REVLABEL_AUGMENT_HPP

#include "revlabel/corpus.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace revlabel {

enum class AugmentMode { Random, AppSpecific };
std::string_view to_string(AugmentMode mode) noexcept;
std::optional<AugmentMode> parse_augment_mode(std::string_view text);

struct AugmentedTrainingSet {
  Dataset human;
  Dataset synthetic;
  double ratio = 0.0;
  AugmentMode mode = AugmentMode::Random;
  std::optional<std::string> target_app;
  std::uint64_t seed = 0;
};

// floor(ratio * human_count), tolerant of binary rounding (0.3 * 40 is 12).
std::size_t augmentation_count(double ratio, std::size_t human_count);

// Per coarse category, draws augmentation_count(ratio, |human_c|) pool
// records uniformly without replacement, after removing pool records whose
// normalized text occurs in `truth_set` (and, in AppSpecific mode, records
// of other apps). Throws InsufficientPoolError, MissingAppId,
// InvalidArgument.
AugmentedTrainingSet sample_augmentation(const Dataset& human,
                                         const Dataset& pool, double ratio,
                                         AugmentMode mode,
                                         std::optional<std::string> target_app,
                                         const Dataset& truth_set,
                                         std::uint64_t seed);

// human followed by synthetic, shuffled under the set's seed.
Dataset merge_training_set(const AugmentedTrainingSet& aug);

// The trainer contract: id, text, coarse_label, provenance, dataset_id,
// app_id, in that key order, one object per line.
std::string train_jsonl(const Dataset& ds);
void write_train_jsonl(const std::filesystem::path& path, const Dataset& ds);

}  // namespace revlabel

#endif  // REVLABEL_AUGMENT_HPP
