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

#include "revlabel/prompt.hpp"

#include "revlabel/error.hpp"
#include "revlabel/random.hpp"
#include "util.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace revlabel {

std::vector<std::string> Scheme::names() const {
  std::vector<std::string> out;
  out.reserve(categories.size());
  for (const auto& c : categories) out.push_back(c.category_name);
  return out;
}

std::optional<std::size_t> Scheme::index_of(std::string_view name) const {
  auto key = label_key(name);
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (label_key(categories[i].category_name) == key) return i;
  }
  return std::nullopt;
}

std::optional<std::string> Scheme::canonical(std::string_view name) const {
  if (auto i = index_of(name)) return categories[*i].category_name;
  return std::nullopt;
}

Scheme parse_scheme(std::string_view text, std::string scheme_id) {
  Scheme scheme{std::move(scheme_id), {}};
  const std::string what = "definitions " + scheme.id;
  for (auto& kv : detail::parse_key_values(text, what)) {
    if (kv.value.empty()) {
      throw Error(ErrorCode::ValidationError,
                  what + ": empty definition for '" + kv.key + "'");
    }
    if (scheme.index_of(kv.key)) {
      throw Error(ErrorCode::ValidationError,
                  what + ": category '" + kv.key + "' defined twice");
    }
    scheme.categories.push_back({scheme.id, kv.key, kv.value});
  }
  if (scheme.categories.empty()) {
    throw Error(ErrorCode::ValidationError, what + ": no categories");
  }
  return scheme;
}

Scheme load_scheme(const std::filesystem::path& definitions_dir,
                   const std::string& scheme_id) {
  return parse_scheme(detail::read_file(definitions_dir / (scheme_id + ".def")),
                      scheme_id);
}

std::optional<std::string> scheme_label(const Scheme& scheme,
                                        const FeedbackRecord& record) {
  if (scheme.is_coarse()) {
    if (!record.coarse_label) return std::nullopt;
    return scheme.canonical(display_name(*record.coarse_label));
  }
  if (!record.original_label) return std::nullopt;
  return scheme.canonical(*record.original_label);
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  return {detail::read_file(dir / "context.txt"),
          detail::read_file(dir / "instruction.txt")};
}

std::string PromptSpec::full_text() const {
  return context + "\n\n" + instruction;
}

namespace {

// Substitutes {{name}} placeholders. A line holding nothing but a
// placeholder that expands to an empty string is dropped entirely.
std::string render(std::string_view tmpl,
                   const std::map<std::string, std::string>& values) {
  std::string out;
  for (auto line : detail::split_lines(tmpl)) {
    auto trimmed = detail::trim(line);
    if (trimmed.size() > 4 && trimmed.starts_with("{{") &&
        trimmed.ends_with("}}")) {
      auto it = values.find(std::string(trimmed.substr(2, trimmed.size() - 4)));
      if (it != values.end() && it->second.empty()) continue;
    }
    std::string rendered;
    std::size_t pos = 0;
    while (pos < line.size()) {
      auto open = line.find("{{", pos);
      if (open == std::string_view::npos) {
        rendered.append(line.substr(pos));
        break;
      }
      auto close = line.find("}}", open + 2);
      if (close == std::string_view::npos) {
        rendered.append(line.substr(pos));
        break;
      }
      rendered.append(line.substr(pos, open - pos));
      auto name = std::string(line.substr(open + 2, close - open - 2));
      auto it = values.find(name);
      if (it == values.end()) {
        throw Error(ErrorCode::ValidationError,
                    "template placeholder {{" + name + "}} has no value");
      }
      rendered.append(it->second);
      pos = close + 2;
    }
    out += rendered;
    out.push_back('\n');
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

}  // namespace

PromptSpec build_prompt(const Scheme& scheme, const FeedbackRecord& sample,
                        std::span<const Shot> shots,
                        const PromptTemplates& templates) {
  if (detail::trim(sample.text).empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "sample '" + sample.id + "' has empty text");
  }
  std::vector<std::pair<std::size_t, const Shot*>> ordered;
  for (const auto& shot : shots) {
    if (shot.record_id == sample.id) {
      throw Error(ErrorCode::ShotEqualsSample,
                  "shot '" + shot.record_id + "' is the sample itself");
    }
    auto idx = scheme.index_of(shot.label);
    if (!idx) {
      throw Error(ErrorCode::ShotLabelUnknown, "shot label '" + shot.label +
                                                   "' is not in scheme " +
                                                   scheme.id);
    }
    ordered.emplace_back(*idx, &shot);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::string categories;
  for (const auto& c : scheme.categories) {
    if (!categories.empty()) categories.push_back('\n');
    categories += "- " + c.category_name + ": " + c.definition;
  }

  std::string examples;
  if (!ordered.empty()) {
    examples = "Examples:\n";
    for (const auto& [idx, shot] : ordered) {
      examples += "\nFeedback: \"\"\"" + shot->text + "\"\"\"\nCategory: " +
                  scheme.categories[idx].category_name + "\n";
    }
  }

  PromptSpec spec;
  spec.scheme_id = scheme.id;
  spec.sample_record_id = sample.id;
  spec.context = render(templates.context, {{"category_block", categories},
                                            {"shots_block", examples}});
  spec.instruction = render(templates.instruction, {{"sample", sample.text}});
  return spec;
}

ShotSelection select_shots(const Dataset& ds, const Scheme& scheme,
                           std::size_t per_class, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(scheme.categories.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (auto label = scheme_label(scheme, ds.records[i])) {
      by_class[*scheme.index_of(*label)].push_back(i);
    }
  }

  Rng rng(derive_seed(seed, "shots:" + ds.id + ":" + scheme.id));
  ShotSelection out;
  std::unordered_set<std::size_t> taken;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& pool = by_class[c];
    if (pool.size() < per_class) {
      throw Error(ErrorCode::InsufficientClassSamples,
                  "class '" + scheme.categories[c].category_name + "' has " +
                      std::to_string(pool.size()) + " records, " +
                      std::to_string(per_class) + " needed");
    }
    // Partial Fisher-Yates: the first per_class slots are the draw.
    for (std::size_t k = 0; k < per_class; ++k) {
      std::size_t j = k + rng.uniform_index(pool.size() - k);
      std::swap(pool[k], pool[j]);
      const auto& rec = ds.records[pool[k]];
      out.shots.push_back({rec.id, rec.text, scheme.categories[c].category_name});
      taken.insert(pool[k]);
    }
  }
  out.residual.id = ds.id;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (!taken.contains(i)) out.residual.records.push_back(ds.records[i]);
  }
  return out;
}

}  // namespace revlabel
