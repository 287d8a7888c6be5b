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

#include "revlabel/extraction.hpp"

#include "revlabel/error.hpp"
#include "text_internal.hpp"
#include "util.hpp"

#include <json.hpp>
#include <unicode/uchar.h>

#include <fstream>
#include <map>

namespace revlabel {

using json = nlohmann::ordered_json;

std::string_view to_string(ParseStatus status) noexcept {
  switch (status) {
    case ParseStatus::Ok: return "ok";
    case ParseStatus::Ambiguous: return "ambiguous";
    case ParseStatus::ParseFailed: return "parse_failed";
  }
  return "parse_failed";
}

std::optional<ParseStatus> parse_status(std::string_view text) {
  if (text == "ok") return ParseStatus::Ok;
  if (text == "ambiguous") return ParseStatus::Ambiguous;
  if (text == "parse_failed") return ParseStatus::ParseFailed;
  return std::nullopt;
}

namespace {

// Lowercased words: maximal runs of letters and digits. Everything else is
// a boundary, so "debug" never yields "bug" and "bug," yields "bug".
std::vector<std::string> words(std::string_view text) {
  const auto u = detail::nfc_lower(text);
  std::vector<std::string> out;
  icu::UnicodeString current;
  auto flush = [&] {
    if (current.length() == 0) return;
    std::string w;
    current.toUTF8String(w);
    out.push_back(std::move(w));
    current.remove();
  };
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    i += U16_LENGTH(c);
    if (u_isalnum(c) || u_getIntPropertyValue(c, UCHAR_GENERAL_CATEGORY) ==
                            U_NON_SPACING_MARK) {
      current.append(c);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string join(const std::vector<std::string>& ws) {
  std::string s;
  for (const auto& w : ws) {
    if (!s.empty()) s.push_back(' ');
    s += w;
  }
  return s;
}

bool contains_sequence(const std::vector<std::string>& haystack,
                       const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (haystack[i + j] != needle[j]) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

}  // namespace

AliasTable::AliasTable(std::string scheme_id, std::vector<AliasEntry> entries)
    : scheme_id_(std::move(scheme_id)) {
  std::map<std::string, std::string> owner;  // normalised alias -> category
  for (auto& entry : entries) {
    AliasEntry clean{entry.category, {}};
    auto add = [&](const std::string& alias) {
      auto key = join(words(alias));
      if (key.empty()) return;
      auto [it, inserted] = owner.emplace(key, entry.category);
      if (!inserted && it->second != entry.category) {
        throw Error(ErrorCode::AliasConflict,
                    "alias '" + alias + "' is claimed by both '" + it->second +
                        "' and '" + entry.category + "' in " + scheme_id_);
      }
      if (inserted) clean.aliases.push_back(key);
    };
    add(entry.category);
    for (const auto& a : entry.aliases) add(a);
    entries_.push_back(std::move(clean));
  }
}

AliasTable AliasTable::parse(std::string_view text, std::string scheme_id) {
  std::vector<AliasEntry> entries;
  for (auto& kv : detail::parse_key_values(text, "aliases " + scheme_id)) {
    AliasEntry e{kv.key, {}};
    for (auto& part : detail::split(kv.value, ',')) {
      auto alias = std::string(detail::trim(part));
      if (!alias.empty()) e.aliases.push_back(std::move(alias));
    }
    entries.push_back(std::move(e));
  }
  return AliasTable(std::move(scheme_id), std::move(entries));
}

AliasTable AliasTable::load(const std::filesystem::path& aliases_dir,
                            const Scheme& scheme) {
  std::vector<AliasEntry> declared;
  auto path = aliases_dir / (scheme.id + ".alias");
  if (std::filesystem::is_regular_file(path)) {
    auto parsed = parse(detail::read_file(path), scheme.id);
    declared = parsed.entries();
  }
  std::vector<AliasEntry> entries;
  for (const auto& c : scheme.categories) {
    AliasEntry e{c.category_name, {}};
    for (const auto& d : declared) {
      if (label_key(d.category) == label_key(c.category_name)) e.aliases = d.aliases;
    }
    entries.push_back(std::move(e));
  }
  for (const auto& d : declared) {
    if (!scheme.index_of(d.category)) {
      throw Error(ErrorCode::ValidationError,
                  "aliases for unknown category '" + d.category + "' in " +
                      path.string());
    }
  }
  return AliasTable(scheme.id, std::move(entries));
}

Prediction extract_label(std::string_view raw_output, const AliasTable& aliases,
                         std::string record_id, std::string model_id) {
  Prediction p;
  p.record_id = std::move(record_id);
  p.model_id = std::move(model_id);
  p.raw_output = std::string(raw_output);

  const auto haystack = words(raw_output);
  std::vector<const std::string*> matched;
  for (const auto& entry : aliases.entries()) {
    for (const auto& alias : entry.aliases) {
      if (contains_sequence(haystack, detail::split(alias, ' '))) {
        matched.push_back(&entry.category);
        break;
      }
    }
  }
  if (matched.size() == 1) {
    p.status = ParseStatus::Ok;
    p.label = *matched.front();
  } else {
    p.status = matched.empty() ? ParseStatus::ParseFailed : ParseStatus::Ambiguous;
  }
  return p;
}

std::string prediction_to_json(const Prediction& p) {
  json obj;
  obj["record_id"] = p.record_id;
  obj["model_id"] = p.model_id;
  obj["label"] = p.label ? json(*p.label) : json(nullptr);
  obj["status"] = to_string(p.status);
  obj["raw_output"] = p.raw_output;
  return obj.dump();
}

Prediction prediction_from_json(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("prediction: ") + e.what());
  }
  try {
    Prediction p;
    p.record_id = obj.at("record_id").get<std::string>();
    p.model_id = obj.value("model_id", std::string());
    p.raw_output = obj.value("raw_output", std::string());
    if (obj.contains("label") && !obj["label"].is_null()) {
      p.label = obj["label"].get<std::string>();
    }
    auto status = parse_status(obj.at("status").get<std::string>());
    if (!status) throw Error(ErrorCode::SchemaViolation, "prediction: bad status");
    p.status = *status;
    if ((p.status == ParseStatus::Ok) != p.label.has_value()) {
      throw Error(ErrorCode::SchemaViolation,
                  "prediction: label must be present exactly when status is ok");
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("prediction: ") + e.what());
  }
}

void write_predictions(const std::filesystem::path& path,
                       std::span<const Prediction> predictions) {
  std::string out;
  for (const auto& p : predictions) {
    out += prediction_to_json(p);
    out.push_back('\n');
  }
  detail::write_file(path, out);
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  std::size_t n = 0;
  const auto content = detail::read_file(path);
  for (auto line : detail::split_lines(content)) {
    ++n;
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(prediction_from_json(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": line " + std::to_string(n) +
                                ": " + e.what());
    }
  }
  return out;
}

void append_review_queue(const std::filesystem::path& path,
                         std::span<const Prediction> predictions) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) {
    throw Error(ErrorCode::UnreadableFile, "cannot append to " + path.string());
  }
  for (const auto& p : predictions) {
    if (p.status == ParseStatus::Ok) continue;
    json obj;
    obj["record_id"] = p.record_id;
    obj["model_id"] = p.model_id;
    obj["raw_output"] = p.raw_output;
    obj["status"] = to_string(p.status);
    out << obj.dump() << '\n';
  }
}

}  // namespace revlabel
