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

#ifndef REVLABEL_EVAL_HPP
#define REVLABEL_EVAL_HPP

#include "revlabel/corpus.hpp"
#include "revlabel/extraction.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace revlabel {

inline constexpr std::string_view kUnparsedColumn = "unparsed";

// Rows are truth classes; columns are predicted classes plus a trailing
// "unparsed" column for Ambiguous/ParseFailed predictions.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  std::size_t trace() const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t unparsed(std::size_t row) const { return counts[row].back(); }
};

// `truth` maps record id to its class name. Throws UnknownRecord for a
// prediction with no truth entry, UnknownClass for a label outside classes.
ConfusionMatrix confusion(std::vector<std::string> classes,
                          const std::map<std::string, std::string>& truth,
                          std::span<const Prediction> predictions);

struct ClassMetrics {
  std::string class_name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

// Zero denominators give zero.
ClassMetrics metrics_from_counts(std::string class_name, std::size_t tp,
                                 std::size_t fp, std::size_t fn);

// Throws UnknownClass.
ClassMetrics class_prf(const ConfusionMatrix& cm, std::string_view class_name);
std::vector<ClassMetrics> all_class_prf(const ConfusionMatrix& cm);

struct MacroMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Unweighted mean. Throws EmptyInput.
MacroMetrics macro_avg(std::span<const ClassMetrics> metrics);

// Target-vs-rest scoring of paired truth/prediction flags.
ClassMetrics binary_metrics(std::string class_name, const std::vector<bool>& truth,
                            const std::vector<bool>& predicted);

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  // Dataset order.
  std::vector<std::pair<std::string, std::size_t>> assignments;

  std::size_t fold_of(std::string_view record_id) const;
};

// Class used for stratification: coarse label when present, else original.
std::string stratum_of(const FeedbackRecord& record);

// Stratified: each class is shuffled and dealt round-robin, continuing the
// rotation across classes. Throws ClassTooSmall.
FoldPlan make_folds(const Dataset& ds, std::size_t k, std::uint64_t seed);

void write_fold_plan(const std::filesystem::path& path, const FoldPlan& plan);

// One row per (setting, target label, app, condition).
struct ReportRow {
  std::string setting;
  std::string target_label;
  std::string app;
  std::string condition;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const ReportRow&) const = default;
};

enum class ReportFormat { Markdown, Csv };
std::optional<ReportFormat> parse_report_format(std::string_view text);

// Throws EmptyInput.
std::string render_report(std::span<const ReportRow> rows, ReportFormat format);
void emit_report(const std::filesystem::path& path,
                 std::span<const ReportRow> rows, ReportFormat format);
std::vector<ReportRow> parse_report_csv(std::string_view csv);

// Wide layout: one line per (setting, target label, app), P/R/F1 triples
// per condition in `condition_order`.
std::string render_condition_table(std::span<const ReportRow> rows,
                                   std::span<const std::string> condition_order);

std::string report_row_to_json(const ReportRow& row);
std::vector<ReportRow> read_metrics_jsonl(const std::filesystem::path& path);

}  // namespace revlabel

#endif  // REVLABEL_EVAL_HPP
