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

#ifndef REVLABEL_PROMPT_HPP
#define REVLABEL_PROMPT_HPP

#include "revlabel/corpus.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace revlabel {

inline constexpr std::string_view kCoarseSchemeId = "coarse";

struct CategoryDefinition {
  std::string scheme_id;
  std::string category_name;
  std::string definition;
};

// An ordered label vocabulary with definitions. Order follows the
// definitions file and fixes class order everywhere downstream.
struct Scheme {
  std::string id;
  std::vector<CategoryDefinition> categories;

  bool is_coarse() const noexcept { return id == kCoarseSchemeId; }
  std::vector<std::string> names() const;
  // Case-insensitive lookup; returns the canonical category name.
  std::optional<std::string> canonical(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;
};

// `Category Name = definition text`, one per line, '#' comments.
// Throws ValidationError on duplicates or empty definitions.
Scheme parse_scheme(std::string_view text, std::string scheme_id);
Scheme load_scheme(const std::filesystem::path& definitions_dir,
                   const std::string& scheme_id);

// The scheme's label for a record: the coarse display name under the coarse
// scheme, the canonical original label otherwise.
std::optional<std::string> scheme_label(const Scheme& scheme,
                                        const FeedbackRecord& record);

struct Shot {
  std::string record_id;
  std::string text;
  std::string label;
};

struct PromptTemplates {
  std::string context;      // {{category_block}}, {{shots_block}}
  std::string instruction;  // {{sample}}

  static PromptTemplates load(const std::filesystem::path& templates_dir);
};

struct PromptSpec {
  std::string context;
  std::string instruction;
  std::string scheme_id;
  std::string sample_record_id;

  // The bytes that identify this prompt (hashing, caching).
  std::string full_text() const;

  bool operator==(const PromptSpec&) const = default;
};

// Throws ShotLabelUnknown, ShotEqualsSample, or InvalidArgument for an
// empty sample text. Shots render in scheme class order; with no shots the
// examples section is omitted.
PromptSpec build_prompt(const Scheme& scheme, const FeedbackRecord& sample,
                        std::span<const Shot> shots,
                        const PromptTemplates& templates);

struct ShotSelection {
  std::vector<Shot> shots;
  Dataset residual;
};

// Draws `per_class` labelled examples per class and removes them from the
// dataset. Throws InsufficientClassSamples naming the class.
ShotSelection select_shots(const Dataset& ds, const Scheme& scheme,
                           std::size_t per_class, std::uint64_t seed);

}  // namespace revlabel

#endif  // REVLABEL_PROMPT_HPP
