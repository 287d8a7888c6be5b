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

#ifndef REVLABEL_CORPUS_HPP
#define REVLABEL_CORPUS_HPP

// Feedback datasets: ingestion, the eligibility filter, cross-dataset
// overlap removal and projection of native label schemes onto the
// three-way coarse scheme.

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace revlabel {

enum class CoarseLabel { BugReport, FeatureRequest, Other };

inline constexpr std::array<CoarseLabel, 3> kCoarseLabels = {
    CoarseLabel::BugReport, CoarseLabel::FeatureRequest, CoarseLabel::Other};

// "Bug Report", "Feature Request", "Other"; used in prompts and schemes.
std::string_view display_name(CoarseLabel label) noexcept;
// "BugReport", "FeatureRequest", "Other"; used in files.
std::string_view token(CoarseLabel label) noexcept;
// Accepts either spelling, case-insensitive.
std::optional<CoarseLabel> parse_coarse_label(std::string_view text);

enum class Source { AppStore, Forum, X };
std::string_view to_string(Source source) noexcept;
std::optional<Source> parse_source(std::string_view text);

enum class Provenance { Human, LlmConsensus };
std::string_view to_string(Provenance provenance) noexcept;
std::optional<Provenance> parse_provenance(std::string_view text);

struct FeedbackRecord {
  std::string id;
  std::string dataset_id;
  Source source = Source::AppStore;
  std::optional<std::string> app_id;
  std::string text;
  std::optional<std::string> original_label;
  std::optional<CoarseLabel> coarse_label;
  Provenance provenance = Provenance::Human;

  bool operator==(const FeedbackRecord&) const = default;
};

struct Dataset {
  std::string id;
  std::vector<FeedbackRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  auto begin() const { return records.begin(); }
  auto end() const { return records.end(); }

  bool operator==(const Dataset&) const = default;
};

enum class FileFormat { Csv, Jsonl };
std::optional<FileFormat> parse_file_format(std::string_view text);

struct DatasetDescriptor {
  std::string id;
  Source source = Source::AppStore;
  // When false the label column is optional (unlabeled pools).
  bool labeled = true;
};

// Reads csv (header row id,text,label[,app_id]) or jsonl with the same
// field names. Throws MissingFieldError, DuplicateId or UnreadableFile.
Dataset ingest(const std::filesystem::path& path, FileFormat format,
               const DatasetDescriptor& meta);

// Full-fidelity dataset files written and read by the pipeline stages.
std::string dataset_to_jsonl(const Dataset& ds);
void write_dataset_jsonl(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset_jsonl(const std::filesystem::path& path);

// ---- text normalisation --------------------------------------------------

struct CleanOptions {
  // Characters removed after punctuation stripping; UTF-8, one code point
  // per entry.
  std::vector<std::string> non_informative = {"$", "#"};
  std::size_t min_tokens = 3;
};

// lowercase -> strip numeric characters -> strip punctuation -> strip
// non-informative characters -> whitespace split -> drop stopwords.
// Input is NFC-normalised first.
std::vector<std::string> clean_tokens(std::string_view text,
                                      const CleanOptions& options = {});

bool is_eligible(std::string_view text, const CleanOptions& options = {});

// clean_tokens joined by single spaces; the key for overlap detection.
std::string normalized_text(std::string_view text,
                            const CleanOptions& options = {});

// The embedded English stopword list, sorted.
const std::vector<std::string_view>& stopwords();

struct FilterResult {
  Dataset dataset;
  std::size_t removed = 0;
};

FilterResult filter_eligible(const Dataset& ds,
                             const CleanOptions& options = {});

// Removes records of `primary` whose normalized text occurs in `reference`.
FilterResult dedup_overlap(const Dataset& primary, const Dataset& reference);

// ---- scheme mapping ------------------------------------------------------

struct MappingEntry {
  std::string original_label;
  std::optional<CoarseLabel> target;  // nullopt: unmapped
};

struct SchemeMapping {
  std::string dataset_id;
  std::vector<MappingEntry> entries;

  // nullptr when the label is not in the mapping. Case and inner
  // whitespace are ignored.
  const MappingEntry* find(std::string_view original_label) const;
};

// Lines of `original label = BugReport|FeatureRequest|Other|Unmapped`;
// '#' starts a comment.
SchemeMapping parse_mapping(std::string_view text, std::string dataset_id);
SchemeMapping load_mapping(const std::filesystem::path& path,
                           std::string dataset_id);

struct AdaptResult {
  Dataset dataset;
  std::size_t dropped = 0;
};

// Throws UnknownLabel when a record's original label is not in the mapping.
AdaptResult adapt_to_coarse(const Dataset& ds, const SchemeMapping& mapping);

// Lowercase, trimmed, inner whitespace collapsed. Label comparisons use it.
std::string label_key(std::string_view label);

}  // namespace revlabel

#endif  // REVLABEL_CORPUS_HPP
