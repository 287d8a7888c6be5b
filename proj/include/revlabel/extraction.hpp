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

#ifndef REVLABEL_EXTRACTION_HPP
#define REVLABEL_EXTRACTION_HPP

#include "revlabel/prompt.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace revlabel {

enum class ParseStatus { Ok, Ambiguous, ParseFailed };
std::string_view to_string(ParseStatus status) noexcept;
std::optional<ParseStatus> parse_status(std::string_view text);

struct Prediction {
  std::string record_id;
  std::string model_id;
  std::string raw_output;
  std::optional<std::string> label;
  ParseStatus status = ParseStatus::ParseFailed;

  bool operator==(const Prediction&) const = default;
};

struct AliasEntry {
  std::string category;
  std::vector<std::string> aliases;  // always includes the category name
};

class AliasTable {
 public:
  AliasTable() = default;
  // Throws AliasConflict when two categories share a normalised alias.
  AliasTable(std::string scheme_id, std::vector<AliasEntry> entries);

  // `Category = alias one, alias two`; the category name is implied.
  static AliasTable parse(std::string_view text, std::string scheme_id);
  // aliases/<scheme_id> when present, else the scheme's names alone.
  static AliasTable load(const std::filesystem::path& aliases_dir,
                         const Scheme& scheme);

  const std::string& scheme_id() const noexcept { return scheme_id_; }
  const std::vector<AliasEntry>& entries() const noexcept { return entries_; }

 private:
  std::string scheme_id_;
  std::vector<AliasEntry> entries_;
};

// Case-insensitive alias search on word boundaries. Several mentions of
// one category count once; two or more categories make it Ambiguous.
Prediction extract_label(std::string_view raw_output, const AliasTable& aliases,
                         std::string record_id = {}, std::string model_id = {});

std::string prediction_to_json(const Prediction& prediction);
Prediction prediction_from_json(std::string_view line);
void write_predictions(const std::filesystem::path& path,
                       std::span<const Prediction> predictions);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

// Appends non-Ok predictions as record_id, model_id, raw_output, status.
void append_review_queue(const std::filesystem::path& path,
                         std::span<const Prediction> predictions);

}  // namespace revlabel

#endif  // REVLABEL_EXTRACTION_HPP
