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

#include "revlabel/eval.hpp"

#include "revlabel/error.hpp"
#include "revlabel/random.hpp"
#include "util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <numeric>

namespace revlabel {

using json = nlohmann::ordered_json;

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) n += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return n;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) n += counts[i][i];
  return n;
}

std::optional<std::size_t> ConfusionMatrix::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == name) return i;
  }
  return std::nullopt;
}

ConfusionMatrix confusion(std::vector<std::string> classes,
                          const std::map<std::string, std::string>& truth,
                          std::span<const Prediction> predictions) {
  ConfusionMatrix cm;
  cm.classes = std::move(classes);
  const std::size_t n = cm.classes.size();
  cm.counts.assign(n, std::vector<std::size_t>(n + 1, 0));
  for (const auto& p : predictions) {
    auto t = truth.find(p.record_id);
    if (t == truth.end()) {
      throw Error(ErrorCode::UnknownRecord,
                  "prediction for unknown record '" + p.record_id + "'");
    }
    auto row = cm.index_of(t->second);
    if (!row) {
      throw Error(ErrorCode::UnknownClass,
                  "truth class '" + t->second + "' is not evaluated");
    }
    std::size_t col = n;
    if (p.status == ParseStatus::Ok) {
      auto c = cm.index_of(*p.label);
      if (!c) {
        throw Error(ErrorCode::UnknownClass,
                    "predicted class '" + *p.label + "' is not evaluated");
      }
      col = *c;
    }
    ++cm.counts[*row][col];
  }
  return cm;
}

ClassMetrics metrics_from_counts(std::string class_name, std::size_t tp,
                                 std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.class_name = std::move(class_name);
  m.support = tp + fn;
  m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

ClassMetrics class_prf(const ConfusionMatrix& cm, std::string_view class_name) {
  auto idx = cm.index_of(class_name);
  if (!idx) {
    throw Error(ErrorCode::UnknownClass,
                "class '" + std::string(class_name) + "' not in matrix");
  }
  const std::size_t i = *idx;
  const std::size_t tp = cm.counts[i][i];
  std::size_t fp = 0;
  for (std::size_t r = 0; r < cm.classes.size(); ++r) {
    if (r != i) fp += cm.counts[r][i];
  }
  const std::size_t row_total =
      std::accumulate(cm.counts[i].begin(), cm.counts[i].end(), std::size_t{0});
  return metrics_from_counts(cm.classes[i], tp, fp, row_total - tp);
}

std::vector<ClassMetrics> all_class_prf(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out;
  for (const auto& c : cm.classes) out.push_back(class_prf(cm, c));
  return out;
}

MacroMetrics macro_avg(std::span<const ClassMetrics> metrics) {
  if (metrics.empty()) {
    throw Error(ErrorCode::EmptyInput, "macro average of no classes");
  }
  MacroMetrics m;
  for (const auto& c : metrics) {
    m.precision += c.precision;
    m.recall += c.recall;
    m.f1 += c.f1;
  }
  const double n = static_cast<double>(metrics.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

ClassMetrics binary_metrics(std::string class_name, const std::vector<bool>& truth,
                            const std::vector<bool>& predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::InvalidArgument, "truth/prediction length mismatch");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] && predicted[i]) ++tp;
    else if (!truth[i] && predicted[i]) ++fp;
    else if (truth[i] && !predicted[i]) ++fn;
  }
  return metrics_from_counts(std::move(class_name), tp, fp, fn);
}

// ---- folds -----------------------------------------------------------------

std::size_t FoldPlan::fold_of(std::string_view record_id) const {
  for (const auto& [id, fold] : assignments) {
    if (id == record_id) return fold;
  }
  throw Error(ErrorCode::UnknownRecord,
              "record '" + std::string(record_id) + "' not in fold plan");
}

std::string stratum_of(const FeedbackRecord& record) {
  if (record.coarse_label) return std::string(token(*record.coarse_label));
  return record.original_label.value_or("");
}

FoldPlan make_folds(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 folds");
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    strata[stratum_of(ds.records[i])].push_back(i);
  }
  for (const auto& [name, members] : strata) {
    if (members.size() < k) {
      throw Error(ErrorCode::ClassTooSmall,
                  "class '" + name + "' has " + std::to_string(members.size()) +
                      " records, fewer than " + std::to_string(k) + " folds");
    }
  }

  std::vector<std::size_t> fold(ds.records.size(), 0);
  Rng rng(derive_seed(seed, "folds:" + ds.id));
  std::size_t rotation = 0;
  for (auto& [name, members] : strata) {
    shuffle(members, rng);
    for (std::size_t idx : members) {
      fold[idx] = rotation;
      rotation = (rotation + 1) % k;
    }
  }

  FoldPlan plan{k, seed, {}};
  plan.assignments.reserve(ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    plan.assignments.emplace_back(ds.records[i].id, fold[i]);
  }
  return plan;
}

void write_fold_plan(const std::filesystem::path& path, const FoldPlan& plan) {
  std::string out;
  for (const auto& [id, f] : plan.assignments) {
    json obj;
    obj["record_id"] = id;
    obj["fold"] = f;
    out += obj.dump();
    out.push_back('\n');
  }
  detail::write_file(path, out);
}

// ---- reports ---------------------------------------------------------------

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  auto key = label_key(text);
  if (key == "markdown" || key == "md") return ReportFormat::Markdown;
  if (key == "csv") return ReportFormat::Csv;
  return std::nullopt;
}

namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
  return buf;
}

std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out.push_back(' ');
    else out.push_back(c);
  }
  return out;
}

}  // namespace

std::string render_report(std::span<const ReportRow> rows, ReportFormat format) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "report has no rows");
  std::string out;
  if (format == ReportFormat::Csv) {
    out = "setting,target_label,app,condition,precision,recall,f1\n";
    for (const auto& r : rows) {
      out += detail::csv_field(r.setting) + "," + detail::csv_field(r.target_label) +
             "," + detail::csv_field(r.app) + "," + detail::csv_field(r.condition) +
             "," + detail::format_double(r.precision) + "," +
             detail::format_double(r.recall) + "," + detail::format_double(r.f1) +
             "\n";
    }
    return out;
  }
  out = "| Setting | Target Label | App | Condition | P | R | F1 |\n"
        "|---|---|---|---|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out += "| " + md_cell(r.setting) + " | " + md_cell(r.target_label) + " | " +
           md_cell(r.app) + " | " + md_cell(r.condition) + " | " +
           percent(r.precision) + " | " + percent(r.recall) + " | " +
           percent(r.f1) + " |\n";
  }
  return out;
}

void emit_report(const std::filesystem::path& path,
                 std::span<const ReportRow> rows, ReportFormat format) {
  detail::write_file(path, render_report(rows, format));
}

std::vector<ReportRow> parse_report_csv(std::string_view csv) {
  auto parsed = detail::parse_csv(csv, "report");
  std::vector<ReportRow> rows;
  for (std::size_t i = 1; i < parsed.size(); ++i) {
    const auto& f = parsed[i].fields;
    if (f.size() != 7) {
      throw Error(ErrorCode::SchemaViolation,
                  "report line " + std::to_string(parsed[i].line) +
                      ": expected 7 fields");
    }
    ReportRow r{f[0], f[1], f[2], f[3], std::stod(f[4]), std::stod(f[5]),
                std::stod(f[6])};
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string render_condition_table(std::span<const ReportRow> rows,
                                   std::span<const std::string> condition_order) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "report has no rows");
  struct Line {
    std::string setting, label, app;
    std::map<std::string, const ReportRow*> cells;
  };
  std::vector<Line> lines;
  for (const auto& r : rows) {
    auto it = std::find_if(lines.begin(), lines.end(), [&](const Line& l) {
      return l.setting == r.setting && l.label == r.target_label && l.app == r.app;
    });
    if (it == lines.end()) {
      lines.push_back({r.setting, r.target_label, r.app, {}});
      it = std::prev(lines.end());
    }
    it->cells[r.condition] = &r;
  }

  std::string out = "| Train Dataset | Target Label | App |";
  std::string rule = "|---|---|---|";
  for (const auto& c : condition_order) {
    out += " " + md_cell(c) + " P | R | F1 |";
    rule += "---:|---:|---:|";
  }
  out += "\n" + rule + "\n";
  for (const auto& l : lines) {
    out += "| " + md_cell(l.setting) + " | " + md_cell(l.label) + " | " +
           md_cell(l.app) + " |";
    for (const auto& c : condition_order) {
      auto it = l.cells.find(c);
      if (it == l.cells.end()) {
        out += " - | - | - |";
      } else {
        out += " " + percent(it->second->precision) + " | " +
               percent(it->second->recall) + " | " + percent(it->second->f1) +
               " |";
      }
    }
    out += "\n";
  }
  return out;
}

std::string report_row_to_json(const ReportRow& row) {
  json obj;
  obj["setting"] = row.setting;
  obj["target_label"] = row.target_label;
  obj["app"] = row.app;
  obj["condition"] = row.condition;
  obj["precision"] = row.precision;
  obj["recall"] = row.recall;
  obj["f1"] = row.f1;
  return obj.dump();
}

std::vector<ReportRow> read_metrics_jsonl(const std::filesystem::path& path) {
  std::vector<ReportRow> rows;
  std::size_t n = 0;
  const auto content = detail::read_file(path);
  for (auto line : detail::split_lines(content)) {
    ++n;
    if (detail::trim(line).empty()) continue;
    try {
      auto obj = json::parse(line);
      rows.push_back({obj.at("setting").get<std::string>(),
                      obj.at("target_label").get<std::string>(),
                      obj.at("app").get<std::string>(),
                      obj.at("condition").get<std::string>(),
                      obj.at("precision").get<double>(),
                      obj.at("recall").get<double>(), obj.at("f1").get<double>()});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaViolation, path.string() + ": line " +
                                                  std::to_string(n) + ": " +
                                                  e.what());
    }
  }
  return rows;
}

}  // namespace revlabel
