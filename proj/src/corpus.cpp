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

#include "revlabel/corpus.hpp"

#include "revlabel/error.hpp"
#include "util.hpp"

#include <json.hpp>

#include <algorithm>
#include <unordered_set>

namespace revlabel {

using json = nlohmann::ordered_json;

std::string_view display_name(CoarseLabel label) noexcept {
  switch (label) {
    case CoarseLabel::BugReport: return "Bug Report";
    case CoarseLabel::FeatureRequest: return "Feature Request";
    case CoarseLabel::Other: return "Other";
  }
  return "Other";
}

std::string_view token(CoarseLabel label) noexcept {
  switch (label) {
    case CoarseLabel::BugReport: return "BugReport";
    case CoarseLabel::FeatureRequest: return "FeatureRequest";
    case CoarseLabel::Other: return "Other";
  }
  return "Other";
}

std::optional<CoarseLabel> parse_coarse_label(std::string_view text) {
  auto key = label_key(text);
  for (auto label : kCoarseLabels) {
    if (key == label_key(display_name(label)) || key == label_key(token(label)))
      return label;
  }
  return std::nullopt;
}

std::string_view to_string(Source source) noexcept {
  switch (source) {
    case Source::AppStore: return "app_store";
    case Source::Forum: return "forum";
    case Source::X: return "x";
  }
  return "app_store";
}

std::optional<Source> parse_source(std::string_view text) {
  auto key = label_key(text);
  if (key == "app_store" || key == "appstore") return Source::AppStore;
  if (key == "forum") return Source::Forum;
  if (key == "x" || key == "twitter") return Source::X;
  return std::nullopt;
}

std::string_view to_string(Provenance provenance) noexcept {
  return provenance == Provenance::Human ? "Human" : "LlmConsensus";
}

std::optional<Provenance> parse_provenance(std::string_view text) {
  auto key = label_key(text);
  if (key == "human") return Provenance::Human;
  if (key == "llm_consensus" || key == "llmconsensus")
    return Provenance::LlmConsensus;
  return std::nullopt;
}

std::optional<FileFormat> parse_file_format(std::string_view text) {
  auto key = label_key(text);
  if (key == "csv") return FileFormat::Csv;
  if (key == "jsonl") return FileFormat::Jsonl;
  return std::nullopt;
}

// ---- ingestion -------------------------------------------------------------

namespace {

void check_unique(std::unordered_set<std::string>& seen, const std::string& id,
                  std::size_t line) {
  if (!seen.insert(id).second) {
    throw Error(ErrorCode::DuplicateId, "duplicate id '" + id + "' at line " +
                                            std::to_string(line));
  }
}

Dataset ingest_csv(std::string_view text, const std::filesystem::path& path,
                   const DatasetDescriptor& meta) {
  auto rows = detail::parse_csv(text, path.string());
  if (rows.empty()) throw MissingFieldError("id", 1);

  const auto& header = rows.front().fields;
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (label_key(header[i]) == name) return i;
    }
    return std::nullopt;
  };
  auto id_col = column("id");
  auto text_col = column("text");
  auto label_col = column("label");
  auto app_col = column("app_id");
  const std::size_t header_line = rows.front().line;
  if (!id_col) throw MissingFieldError("id", header_line);
  if (!text_col) throw MissingFieldError("text", header_line);
  if (meta.labeled && !label_col) throw MissingFieldError("label", header_line);

  Dataset ds{meta.id, {}};
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto cell = [&](std::optional<std::size_t> col,
                    std::string_view name) -> std::optional<std::string> {
      if (!col) return std::nullopt;
      if (*col >= row.fields.size()) {
        throw MissingFieldError(std::string(name), row.line);
      }
      return row.fields[*col];
    };
    FeedbackRecord rec;
    rec.dataset_id = meta.id;
    rec.source = meta.source;
    rec.id = std::string(detail::trim(*cell(id_col, "id")));
    if (rec.id.empty()) throw MissingFieldError("id", row.line);
    rec.text = *cell(text_col, "text");
    if (detail::trim(rec.text).empty()) throw MissingFieldError("text", row.line);
    if (auto label = cell(label_col, "label")) {
      auto trimmed = std::string(detail::trim(*label));
      if (!trimmed.empty()) rec.original_label = trimmed;
    }
    if (meta.labeled && !rec.original_label) {
      throw MissingFieldError("label", row.line);
    }
    if (app_col && *app_col < row.fields.size()) {
      auto app = std::string(detail::trim(row.fields[*app_col]));
      if (!app.empty()) rec.app_id = app;
    }
    check_unique(seen, rec.id, row.line);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

std::optional<std::string> json_string_field(const json& obj,
                                             std::string_view name) {
  auto it = obj.find(std::string(name));
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  return it->dump();
}

json parse_json_line(std::string_view line, std::size_t n,
                     const std::filesystem::path& path) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": line " +
                                                std::to_string(n) + ": " +
                                                e.what());
  }
  if (!obj.is_object()) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": line " +
                                                std::to_string(n) +
                                                ": expected a JSON object");
  }
  return obj;
}

Dataset ingest_jsonl(std::string_view text, const std::filesystem::path& path,
                     const DatasetDescriptor& meta) {
  Dataset ds{meta.id, {}};
  std::unordered_set<std::string> seen;
  std::size_t n = 0;
  for (auto line : detail::split_lines(text)) {
    ++n;
    if (detail::trim(line).empty()) continue;
    auto obj = parse_json_line(line, n, path);
    FeedbackRecord rec;
    rec.dataset_id = meta.id;
    rec.source = meta.source;
    auto id = json_string_field(obj, "id");
    if (!id || detail::trim(*id).empty()) throw MissingFieldError("id", n);
    rec.id = std::string(detail::trim(*id));
    auto body = json_string_field(obj, "text");
    if (!body || detail::trim(*body).empty()) throw MissingFieldError("text", n);
    rec.text = *body;
    if (auto label = json_string_field(obj, "label")) {
      auto trimmed = std::string(detail::trim(*label));
      if (!trimmed.empty()) rec.original_label = trimmed;
    }
    if (meta.labeled && !rec.original_label) throw MissingFieldError("label", n);
    if (auto app = json_string_field(obj, "app_id"); app && !app->empty()) {
      rec.app_id = *app;
    }
    check_unique(seen, rec.id, n);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace

Dataset ingest(const std::filesystem::path& path, FileFormat format,
               const DatasetDescriptor& meta) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::UnreadableFile,
                "dataset file '" + path.string() + "' does not exist");
  }
  auto text = detail::read_file(path);
  return format == FileFormat::Csv ? ingest_csv(text, path, meta)
                                   : ingest_jsonl(text, path, meta);
}

std::string dataset_to_jsonl(const Dataset& ds) {
  std::string out;
  for (const auto& r : ds.records) {
    json obj;
    obj["id"] = r.id;
    obj["dataset_id"] = r.dataset_id;
    obj["source"] = to_string(r.source);
    obj["app_id"] = r.app_id ? json(*r.app_id) : json(nullptr);
    obj["text"] = r.text;
    obj["original_label"] =
        r.original_label ? json(*r.original_label) : json(nullptr);
    obj["coarse_label"] =
        r.coarse_label ? json(token(*r.coarse_label)) : json(nullptr);
    obj["provenance"] = to_string(r.provenance);
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

void write_dataset_jsonl(const std::filesystem::path& path, const Dataset& ds) {
  detail::write_file(path, dataset_to_jsonl(ds));
}

Dataset read_dataset_jsonl(const std::filesystem::path& path) {
  auto text = detail::read_file(path);
  Dataset ds;
  std::unordered_set<std::string> seen;
  std::size_t n = 0;
  for (auto line : detail::split_lines(text)) {
    ++n;
    if (detail::trim(line).empty()) continue;
    auto obj = parse_json_line(line, n, path);
    FeedbackRecord rec;
    auto id = json_string_field(obj, "id");
    if (!id) throw MissingFieldError("id", n);
    rec.id = *id;
    auto body = json_string_field(obj, "text");
    if (!body) throw MissingFieldError("text", n);
    rec.text = *body;
    rec.dataset_id = json_string_field(obj, "dataset_id").value_or("");
    if (auto s = json_string_field(obj, "source")) {
      auto src = parse_source(*s);
      if (!src) {
        throw Error(ErrorCode::SchemaViolation,
                    "unknown source '" + *s + "' at line " + std::to_string(n));
      }
      rec.source = *src;
    }
    rec.app_id = json_string_field(obj, "app_id");
    rec.original_label = json_string_field(obj, "original_label");
    if (auto c = json_string_field(obj, "coarse_label")) {
      rec.coarse_label = parse_coarse_label(*c);
      if (!rec.coarse_label) {
        throw Error(ErrorCode::SchemaViolation, "unknown coarse label '" + *c +
                                                    "' at line " +
                                                    std::to_string(n));
      }
    }
    if (auto p = json_string_field(obj, "provenance")) {
      auto prov = parse_provenance(*p);
      if (!prov) {
        throw Error(ErrorCode::SchemaViolation, "unknown provenance '" + *p +
                                                    "' at line " +
                                                    std::to_string(n));
      }
      rec.provenance = *prov;
    }
    check_unique(seen, rec.id, n);
    if (ds.id.empty()) ds.id = rec.dataset_id;
    ds.records.push_back(std::move(rec));
  }
  if (ds.id.empty()) ds.id = path.stem().string();
  return ds;
}

// ---- filtering -------------------------------------------------------------

FilterResult filter_eligible(const Dataset& ds, const CleanOptions& options) {
  FilterResult out{Dataset{ds.id, {}}, 0};
  for (const auto& r : ds.records) {
    if (is_eligible(r.text, options)) {
      out.dataset.records.push_back(r);
    } else {
      ++out.removed;
    }
  }
  return out;
}

FilterResult dedup_overlap(const Dataset& primary, const Dataset& reference) {
  std::unordered_set<std::string> keys;
  keys.reserve(reference.size());
  for (const auto& r : reference.records) keys.insert(normalized_text(r.text));

  FilterResult out{Dataset{primary.id, {}}, 0};
  for (const auto& r : primary.records) {
    if (keys.contains(normalized_text(r.text))) {
      ++out.removed;
    } else {
      out.dataset.records.push_back(r);
    }
  }
  return out;
}

// ---- scheme mapping --------------------------------------------------------

const MappingEntry* SchemeMapping::find(std::string_view original_label) const {
  auto key = label_key(original_label);
  for (const auto& e : entries) {
    if (label_key(e.original_label) == key) return &e;
  }
  return nullptr;
}

SchemeMapping parse_mapping(std::string_view text, std::string dataset_id) {
  SchemeMapping mapping{std::move(dataset_id), {}};
  const std::string what = "mapping " + mapping.dataset_id;
  for (auto& kv : detail::parse_key_values(text, what)) {
    MappingEntry entry{kv.key, std::nullopt};
    if (label_key(kv.value) != "unmapped") {
      entry.target = parse_coarse_label(kv.value);
      if (!entry.target) {
        throw Error(ErrorCode::ValidationError,
                    what + ": unknown target '" + kv.value + "' at line " +
                        std::to_string(kv.line));
      }
    }
    if (mapping.find(entry.original_label) != nullptr) {
      throw Error(ErrorCode::ValidationError,
                  what + ": label '" + kv.key + "' listed twice (line " +
                      std::to_string(kv.line) + ")");
    }
    mapping.entries.push_back(std::move(entry));
  }
  return mapping;
}

SchemeMapping load_mapping(const std::filesystem::path& path,
                           std::string dataset_id) {
  return parse_mapping(detail::read_file(path), std::move(dataset_id));
}

AdaptResult adapt_to_coarse(const Dataset& ds, const SchemeMapping& mapping) {
  AdaptResult out{Dataset{ds.id, {}}, 0};
  for (const auto& r : ds.records) {
    if (!r.original_label) {
      throw Error(ErrorCode::UnknownLabel,
                  "record '" + r.id + "' has no original label");
    }
    const auto* entry = mapping.find(*r.original_label);
    if (entry == nullptr) {
      throw Error(ErrorCode::UnknownLabel,
                  "label '" + *r.original_label + "' of record '" + r.id +
                      "' is not in mapping " + mapping.dataset_id);
    }
    if (!entry->target) {
      ++out.dropped;
      continue;
    }
    auto rec = r;
    rec.coarse_label = entry->target;
    out.dataset.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace revlabel
