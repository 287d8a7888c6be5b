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

#include "revlabel/pipeline.hpp"

#include "revlabel/consensus.hpp"
#include "revlabel/error.hpp"
#include "revlabel/extraction.hpp"
#include "revlabel/prompt.hpp"
#include "revlabel/random.hpp"
#include "util.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <map>
#include <set>

extern char** environ;

#ifndef REVLABEL_DATA_DIR
#define REVLABEL_DATA_DIR "data"
#endif

namespace revlabel {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const DatasetSpec* RunManifest::find_dataset(std::string_view id) const {
  for (const auto& d : datasets) {
    if (d.descriptor.id == id) return &d;
  }
  return nullptr;
}

const EndpointConfig* RunManifest::find_endpoint(std::string_view model_id) const {
  for (const auto& e : endpoints) {
    if (e.model_id == model_id) return &e;
  }
  return nullptr;
}

fs::path default_data_dir() {
  if (const char* env = std::getenv("REVLABEL_DATA_DIR"); env && *env) return env;
  return REVLABEL_DATA_DIR;
}

// ---- manifest parsing -------------------------------------------------------

namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::ValidationError, "manifest: " + message);
}

void allow_keys(const json& obj, std::string_view where,
                std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) invalid(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      invalid("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    invalid(std::string(where) + "." + key + " has the wrong type");
  }
}

std::string need_string(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
    invalid(std::string(where) + "." + key + " is required");
  }
  return it->get<std::string>();
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

MockBehavior parse_mock(const json& obj, std::string_view where) {
  allow_keys(obj, where, {"mode", "fixture", "confusion", "accuracy", "seed"});
  MockBehavior m;
  auto mode = get_or<std::string>(obj, "mode", "seeded_confusion", where);
  if (mode == "fixture" || mode == "fixture_table") {
    m.mode = MockBehavior::Mode::FixtureTable;
  } else if (mode == "seeded_confusion") {
    m.mode = MockBehavior::Mode::SeededConfusion;
  } else {
    invalid(std::string(where) + ".mode '" + mode + "' is not fixture|seeded_confusion");
  }
  m.fixture = get_or<std::map<std::string, std::string>>(obj, "fixture", {}, where);
  m.confusion = get_or<std::vector<std::vector<double>>>(obj, "confusion", {}, where);
  if (obj.contains("accuracy") && !obj["accuracy"].is_null()) {
    m.accuracy = get_or<double>(obj, "accuracy", 0.0, where);
  }
  m.seed = get_or<std::uint64_t>(obj, "seed", 0, where);
  return m;
}

EndpointConfig parse_endpoint(const json& obj, std::string_view where) {
  allow_keys(obj, where,
             {"model_id", "base_url", "auth_env_var", "api_model", "max_concurrency",
              "requests_per_minute", "max_retries", "temperature", "max_tokens",
              "mock"});
  EndpointConfig e;
  e.model_id = need_string(obj, "model_id", where);
  e.base_url = get_or<std::string>(obj, "base_url", "", where);
  e.auth_env_var = get_or<std::string>(obj, "auth_env_var", "", where);
  e.api_model = get_or<std::string>(obj, "api_model", "", where);
  e.max_concurrency = get_or<int>(obj, "max_concurrency", e.max_concurrency, where);
  e.requests_per_minute =
      get_or<int>(obj, "requests_per_minute", e.requests_per_minute, where);
  e.max_retries = get_or<int>(obj, "max_retries", e.max_retries, where);
  e.temperature = get_or<double>(obj, "temperature", e.temperature, where);
  e.max_tokens = get_or<int>(obj, "max_tokens", e.max_tokens, where);
  if (obj.contains("mock") && !obj["mock"].is_null()) {
    e.mock = parse_mock(obj["mock"], std::string(where) + ".mock");
  }
  return e;
}

DatasetSpec parse_dataset(const json& obj, std::string_view where,
                          const fs::path& base) {
  allow_keys(obj, where,
             {"id", "source", "path", "format", "mapping", "role", "labeled",
              "dedup_against"});
  DatasetSpec d;
  d.descriptor.id = need_string(obj, "id", where);
  auto source = get_or<std::string>(obj, "source", "app_store", where);
  auto src = parse_source(source);
  if (!src) invalid(std::string(where) + ".source '" + source + "' unknown");
  d.descriptor.source = *src;
  d.descriptor.labeled = get_or<bool>(obj, "labeled", true, where);
  d.path = resolve(base, need_string(obj, "path", where));
  auto format = get_or<std::string>(obj, "format", "", where);
  if (format.empty()) {
    format = d.path.extension() == ".jsonl" ? "jsonl" : "csv";
  }
  auto ff = parse_file_format(format);
  if (!ff) invalid(std::string(where) + ".format '" + format + "' unknown");
  d.format = *ff;
  d.mapping = get_or<std::string>(obj, "mapping", d.descriptor.id, where);
  auto role = get_or<std::string>(obj, "role", "eval", where);
  if (role == "eval") d.role = DatasetRole::Eval;
  else if (role == "pool") d.role = DatasetRole::Pool;
  else if (role == "train") d.role = DatasetRole::Train;
  else invalid(std::string(where) + ".role '" + role + "' is not eval|pool|train");
  if (obj.contains("dedup_against") && !obj["dedup_against"].is_null()) {
    d.dedup_against = need_string(obj, "dedup_against", where);
  }
  return d;
}

AugmentationSpec parse_augmentation(const json& obj) {
  const std::string_view where = "augmentation";
  allow_keys(obj, where,
             {"ratio", "settings", "general_pool", "app_pool", "target_apps",
              "target_labels", "zero_shot_model", "folds"});
  AugmentationSpec a;
  a.ratio = get_or<double>(obj, "ratio", a.ratio, where);
  a.general_pool = need_string(obj, "general_pool", where);
  a.app_pool = get_or<std::string>(obj, "app_pool", a.general_pool, where);
  a.target_apps = get_or<std::vector<std::string>>(obj, "target_apps", {}, where);
  a.zero_shot_model = get_or<std::string>(obj, "zero_shot_model", "", where);
  a.folds = get_or<std::size_t>(obj, "folds", a.folds, where);
  if (obj.contains("target_labels")) {
    a.target_labels.clear();
    for (const auto& s : get_or<std::vector<std::string>>(obj, "target_labels", {}, where)) {
      auto label = parse_coarse_label(s);
      if (!label) invalid("augmentation.target_labels: unknown label '" + s + "'");
      a.target_labels.push_back(*label);
    }
  }
  auto settings = obj.find("settings");
  if (settings == obj.end() || !settings->is_array()) {
    invalid("augmentation.settings must be a list");
  }
  for (std::size_t i = 0; i < settings->size(); ++i) {
    const auto& s = (*settings)[i];
    const auto w = "augmentation.settings[" + std::to_string(i) + "]";
    allow_keys(s, w, {"name", "primary", "review_aug"});
    AugmentSetting setting;
    setting.primary = get_or<std::vector<std::string>>(s, "primary", {}, w);
    std::string joined;
    for (const auto& p : setting.primary) joined += (joined.empty() ? "" : "-") + p;
    setting.name = get_or<std::string>(s, "name", joined, w);
    if (s.contains("review_aug") && !s["review_aug"].is_null()) {
      setting.review_aug = need_string(s, "review_aug", w);
    }
    a.settings.push_back(std::move(setting));
  }
  return a;
}

TrainerSpec parse_trainer(const json& obj, const fs::path& base) {
  const std::string_view where = "trainer";
  allow_keys(obj, where,
             {"command", "class_weighting", "epochs", "learning_rate",
              "max_sequence_length"});
  TrainerSpec t;
  t.command = get_or<std::vector<std::string>>(obj, "command", {}, where);
  // Relative paths with a directory part are taken from the manifest location.
  for (auto& arg : t.command) {
    if (arg.find('/') != std::string::npos && !fs::path(arg).is_absolute() &&
        fs::exists(base / arg)) {
      arg = (base / arg).lexically_normal().string();
    }
  }
  t.class_weighting = get_or<std::string>(obj, "class_weighting", t.class_weighting, where);
  t.epochs = get_or<int>(obj, "epochs", t.epochs, where);
  t.learning_rate = get_or<double>(obj, "learning_rate", t.learning_rate, where);
  t.max_sequence_length =
      get_or<int>(obj, "max_sequence_length", t.max_sequence_length, where);
  return t;
}

}  // namespace

RunManifest parse_manifest(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    invalid(std::string("not valid JSON: ") + e.what());
  }
  allow_keys(doc, "manifest",
             {"run_id", "seed", "scheme", "shots_per_class", "datasets", "endpoints",
              "consensus_required", "truth_dataset", "augmentation", "trainer",
              "data_dir", "cache_dir", "clean", "filter_ineligible"});
  RunManifest m;
  m.run_id = get_or<std::string>(doc, "run_id", m.run_id, "manifest");
  m.seed = get_or<std::uint64_t>(doc, "seed", 0, "manifest");
  m.scheme = get_or<std::string>(doc, "scheme", m.scheme, "manifest");
  m.shots_per_class = get_or<std::size_t>(doc, "shots_per_class", 0, "manifest");
  m.filter_ineligible = get_or<bool>(doc, "filter_ineligible", true, "manifest");

  auto datasets = doc.find("datasets");
  if (datasets == doc.end() || !datasets->is_array()) invalid("datasets must be a list");
  for (std::size_t i = 0; i < datasets->size(); ++i) {
    m.datasets.push_back(parse_dataset((*datasets)[i],
                                       "datasets[" + std::to_string(i) + "]", base_dir));
  }
  auto endpoints = doc.find("endpoints");
  if (endpoints != doc.end()) {
    if (!endpoints->is_array()) invalid("endpoints must be a list");
    for (std::size_t i = 0; i < endpoints->size(); ++i) {
      m.endpoints.push_back(
          parse_endpoint((*endpoints)[i], "endpoints[" + std::to_string(i) + "]"));
    }
  }
  m.consensus_required =
      get_or<std::vector<std::string>>(doc, "consensus_required", {}, "manifest");
  if (doc.contains("truth_dataset") && !doc["truth_dataset"].is_null()) {
    m.truth_dataset = need_string(doc, "truth_dataset", "manifest");
  }
  if (doc.contains("augmentation") && !doc["augmentation"].is_null()) {
    m.augmentation = parse_augmentation(doc["augmentation"]);
  }
  if (doc.contains("trainer") && !doc["trainer"].is_null()) {
    m.trainer = parse_trainer(doc["trainer"], base_dir);
  }
  auto data_dir = get_or<std::string>(doc, "data_dir", "", "manifest");
  m.data_dir = data_dir.empty() ? default_data_dir() : resolve(base_dir, data_dir);
  auto cache_dir = get_or<std::string>(doc, "cache_dir", "", "manifest");
  if (!cache_dir.empty()) m.cache_dir = resolve(base_dir, cache_dir);
  if (doc.contains("clean")) {
    const auto& c = doc["clean"];
    allow_keys(c, "clean", {"non_informative", "min_tokens"});
    m.clean.non_informative = get_or<std::vector<std::string>>(
        c, "non_informative", m.clean.non_informative, "clean");
    m.clean.min_tokens = get_or<std::size_t>(c, "min_tokens", m.clean.min_tokens, "clean");
  }
  return m;
}

RunManifest load_manifest(const fs::path& path) {
  auto text = detail::read_file(path);
  auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse_manifest(text, fs::absolute(base));
}

void validate_manifest(const RunManifest& m) {
  if (m.run_id.empty() || detail::path_component(m.run_id) != m.run_id) {
    invalid("run_id '" + m.run_id + "' must use only [A-Za-z0-9._-]");
  }
  if (m.scheme != "coarse" && m.scheme != "original") {
    invalid("scheme must be coarse or original, got '" + m.scheme + "'");
  }
  if (m.shots_per_class > 1) invalid("shots_per_class must be 0 or 1");
  if (m.datasets.empty()) invalid("no datasets");
  if (m.clean.min_tokens == 0) invalid("clean.min_tokens must be positive");

  const auto data = m.data_dir;
  auto need_file = [&](const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) invalid(what + " not found at " + p.string());
  };
  need_file(data / "templates" / "context.txt", "context template");
  need_file(data / "templates" / "instruction.txt", "instruction template");
  if (m.coarse()) need_file(data / "definitions" / "coarse.def", "coarse definitions");

  std::set<std::string> ids;
  for (const auto& d : m.datasets) {
    const auto& id = d.descriptor.id;
    if (!ids.insert(id).second) invalid("duplicate dataset id '" + id + "'");
    if (detail::path_component(id) != id) {
      invalid("dataset id '" + id + "' must use only [A-Za-z0-9._-]");
    }
    need_file(d.path, "dataset " + id);
    if (d.descriptor.labeled) {
      if (m.coarse()) {
        need_file(data / "mappings" / (d.mapping + ".map"),
                  "mapping '" + d.mapping + "' of dataset " + id);
      } else if (d.role != DatasetRole::Train) {
        need_file(data / "definitions" / (d.mapping + ".def"),
                  "definitions '" + d.mapping + "' of dataset " + id);
      }
    }
  }
  for (const auto& d : m.datasets) {
    if (!d.dedup_against) continue;
    const auto* ref = m.find_dataset(*d.dedup_against);
    if (!ref) invalid(d.descriptor.id + ".dedup_against names unknown dataset");
    if (ref == &d) invalid(d.descriptor.id + " cannot dedup against itself");
    if (ref->dedup_against) {
      invalid(d.descriptor.id + ".dedup_against must name a dataset without its own");
    }
  }

  std::set<std::string> models;
  for (const auto& e : m.endpoints) {
    if (!models.insert(e.model_id).second) {
      invalid("duplicate endpoint '" + e.model_id + "'");
    }
    try {
      e.validate();
    } catch (const Error& err) {
      invalid(std::string("endpoint ") + e.model_id + ": " + err.what());
    }
  }
  for (const auto& r : m.consensus_required) {
    if (!models.contains(r)) invalid("consensus_required names unknown model '" + r + "'");
  }
  if (m.truth_dataset && !m.find_dataset(*m.truth_dataset)) {
    invalid("truth_dataset '" + *m.truth_dataset + "' is not a dataset");
  }

  if (m.augmentation) {
    const auto& a = *m.augmentation;
    if (!m.coarse()) invalid("augmentation requires the coarse scheme");
    if (!m.truth_dataset) invalid("augmentation requires truth_dataset");
    if (!(a.ratio > 0.0 && a.ratio <= 1.0)) invalid("augmentation.ratio must be in (0, 1]");
    if (a.folds < 2) invalid("augmentation.folds must be at least 2");
    if (a.settings.empty()) invalid("augmentation.settings is empty");
    if (a.target_apps.empty()) invalid("augmentation.target_apps is empty");
    if (a.target_labels.empty()) invalid("augmentation.target_labels is empty");
    for (auto l : a.target_labels) {
      if (l == CoarseLabel::Other) invalid("augmentation target labels exclude Other");
    }
    auto need_role = [&](const std::string& id, DatasetRole role, const char* what) {
      const auto* d = m.find_dataset(id);
      if (!d) invalid(std::string(what) + " '" + id + "' is not a dataset");
      if (d->role != role) invalid(std::string(what) + " '" + id + "' has the wrong role");
    };
    need_role(a.general_pool, DatasetRole::Pool, "general_pool");
    need_role(a.app_pool, DatasetRole::Pool, "app_pool");
    std::set<std::string> names;
    for (const auto& s : a.settings) {
      if (!names.insert(s.name).second) invalid("duplicate setting '" + s.name + "'");
      if (detail::path_component(s.name) != s.name) {
        invalid("setting name '" + s.name + "' must use only [A-Za-z0-9._-]");
      }
      if (s.primary.empty()) invalid("setting '" + s.name + "' has no primary dataset");
      for (const auto& p : s.primary) need_role(p, DatasetRole::Train, "primary dataset");
      if (s.review_aug) need_role(*s.review_aug, DatasetRole::Train, "review_aug dataset");
    }
    if (m.endpoints.empty()) invalid("augmentation needs an endpoint for Zero-Shot");
    if (!a.zero_shot_model.empty() && !models.contains(a.zero_shot_model)) {
      invalid("zero_shot_model '" + a.zero_shot_model + "' is not an endpoint");
    }
  }
  if (m.trainer) {
    const auto& t = *m.trainer;
    if (t.class_weighting != "balanced" && t.class_weighting != "none") {
      invalid("trainer.class_weighting must be balanced or none");
    }
    if (t.epochs < 1) invalid("trainer.epochs must be at least 1");
    if (!(t.learning_rate > 0.0)) invalid("trainer.learning_rate must be positive");
    if (t.max_sequence_length < 1) invalid("trainer.max_sequence_length must be positive");
  }
}

// ---- shared stage helpers ---------------------------------------------------

namespace {

void log(const RunOptions& o, const std::string& message) {
  if (o.log) o.log(message);
}

// Runs `body`, prefixing any error with the stage name.
template <class F>
auto staged(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const InsufficientPoolError& e) {
    throw;
  } catch (const Error& e) {
    const std::string msg = e.what();
    if (msg.rfind(stage, 0) == 0) throw;
    throw Error(e.code(), std::string(stage) + ": " + msg);
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(ErrorCode::UnreadableFile, std::string(stage) + ": " + e.what());
  }
}

const std::string_view kMetricStages[] = {"classify", "consensus", "augment"};

// metrics.jsonl is the concatenation of metrics/<stage>.jsonl in stage order,
// so rerunning a stage replaces its rows instead of appending duplicates.
void publish_metrics(const fs::path& out, std::string_view stage,
                     std::span<const ReportRow> rows) {
  std::string text;
  for (const auto& r : rows) text += report_row_to_json(r) + "\n";
  detail::write_file(out / "metrics" / (std::string(stage) + ".jsonl"), text);
  std::string all;
  for (auto s : kMetricStages) {
    auto p = out / "metrics" / (std::string(s) + ".jsonl");
    if (fs::is_regular_file(p)) all += detail::read_file(p);
  }
  detail::write_file(out / "metrics.jsonl", all);
}

void emit_both(const fs::path& stem, std::span<const ReportRow> rows) {
  if (rows.empty()) return;
  emit_report(fs::path(stem.string() + ".md"), rows, ReportFormat::Markdown);
  emit_report(fs::path(stem.string() + ".csv"), rows, ReportFormat::Csv);
}

fs::path dataset_file(const fs::path& out, const std::string& id) {
  return out / "datasets" / (id + ".jsonl");
}

fs::path prediction_file(const fs::path& out, const std::string& dataset_id,
                         const std::string& model_id) {
  return out / "predictions" / dataset_id / (detail::path_component(model_id) + ".jsonl");
}

Scheme scheme_for(const RunManifest& m, const DatasetSpec& spec) {
  return load_scheme(m.data_dir / "definitions",
                     m.coarse() ? std::string(kCoarseSchemeId) : spec.mapping);
}

std::vector<std::string> required_models(const RunManifest& m) {
  if (!m.consensus_required.empty()) return m.consensus_required;
  std::vector<std::string> all;
  for (const auto& e : m.endpoints) all.push_back(e.model_id);
  return all;
}

bool classified(const DatasetSpec& d) { return d.role != DatasetRole::Train; }

std::vector<ReportRow> evaluation_rows(const Scheme& scheme, const Dataset& ds,
                                       std::span<const Prediction> preds,
                                       const std::string& condition) {
  std::map<std::string, std::string> truth;
  for (const auto& r : ds.records) {
    auto label = scheme_label(scheme, r);
    if (label) truth[r.id] = *label;
  }
  auto cm = confusion(scheme.names(), truth, preds);
  auto per_class = all_class_prf(cm);
  std::vector<ReportRow> rows;
  for (const auto& c : per_class) {
    rows.push_back({ds.id, c.class_name, "all", condition, c.precision, c.recall, c.f1});
  }
  auto macro = macro_avg(per_class);
  rows.push_back({ds.id, "Macro", "all", condition, macro.precision, macro.recall, macro.f1});
  return rows;
}

}  // namespace

Dataset prepare_dataset(const RunManifest& manifest, const DatasetSpec& spec,
                        bool coarse) {
  Dataset ds = ingest(spec.path, spec.format, spec.descriptor);
  if (manifest.filter_ineligible) ds = filter_eligible(ds, manifest.clean).dataset;
  if (spec.dedup_against) {
    const auto* ref = manifest.find_dataset(*spec.dedup_against);
    if (!ref) {
      throw Error(ErrorCode::ValidationError,
                  "unknown dedup reference '" + *spec.dedup_against + "'");
    }
    ds = dedup_overlap(ds, prepare_dataset(manifest, *ref, false)).dataset;
  }
  if (coarse && spec.descriptor.labeled) {
    auto mapping = load_mapping(manifest.data_dir / "mappings" / (spec.mapping + ".map"),
                                spec.descriptor.id);
    ds = adapt_to_coarse(ds, mapping).dataset;
  }
  return ds;
}

// ---- classify ---------------------------------------------------------------

ClassifyOutcome run_classify(const RunManifest& m, const RunOptions& o) {
  return staged("classify", [&] {
    validate_manifest(m);
    const fs::path out = o.out_dir;
    const auto templates = PromptTemplates::load(m.data_dir / "templates");

    Gateway::Options gopts;
    gopts.cache_dir = m.cache_dir.value_or(out / "cache");
    gopts.backend = o.backend;
    gopts.sleep = o.sleep;
    gopts.jitter_seed = m.seed;
    Gateway gateway(std::move(gopts));

    const auto review = out / "review_queue.jsonl";
    detail::write_file(review, "");

    ClassifyOutcome outcome;
    std::vector<ReportRow> metrics;
    std::optional<ItemError> first_error;

    for (const auto& spec : m.datasets) {
      if (!classified(spec)) continue;
      const auto scheme = scheme_for(m, spec);
      const auto aliases = AliasTable::load(m.data_dir / "aliases", scheme);
      Dataset ds = prepare_dataset(m, spec, m.coarse());

      std::vector<Shot> shots;
      if (m.shots_per_class > 0) {
        auto sel = select_shots(ds, scheme, m.shots_per_class, m.seed);
        shots = std::move(sel.shots);
        ds = std::move(sel.residual);
        std::string text;
        for (const auto& s : shots) {
          ojson obj;
          obj["record_id"] = s.record_id;
          obj["text"] = s.text;
          obj["label"] = s.label;
          text += obj.dump() + "\n";
        }
        detail::write_file(out / "shots" / (spec.descriptor.id + ".jsonl"), text);
      }
      write_dataset_jsonl(dataset_file(out, spec.descriptor.id), ds);

      std::vector<BatchRequest> requests;
      requests.reserve(ds.size());
      for (const auto& rec : ds.records) {
        auto truth = scheme_label(scheme, rec);
        if (spec.descriptor.labeled && !truth) {
          throw Error(ErrorCode::UnknownLabel,
                      spec.descriptor.id + ": record '" + rec.id + "' label '" +
                          rec.original_label.value_or("") + "' is not in scheme " +
                          scheme.id);
        }
        requests.push_back({build_prompt(scheme, rec, shots, templates), truth});
      }
      log(o, "classify " + spec.descriptor.id + ": " + std::to_string(requests.size()) +
                 " prompts x " + std::to_string(m.endpoints.size()) + " endpoints");

      std::vector<ReportRow> rows;
      for (const auto& endpoint : m.endpoints) {
        const auto before = gateway.stats(endpoint.model_id);
        auto items = gateway.run_batch(endpoint, requests, &scheme);
        const auto after = gateway.stats(endpoint.model_id);
        outcome.prompts += requests.size();
        outcome.backend_calls += after.backend_calls - before.backend_calls;
        outcome.cache_hits += after.cache_hits - before.cache_hits;

        std::vector<Prediction> preds;
        preds.reserve(items.size());
        for (const auto& item : items) {
          if (item.response) {
            preds.push_back(extract_label(item.response->output_text, aliases,
                                          item.record_id, endpoint.model_id));
          } else {
            ++outcome.item_errors;
            if (!first_error) {
              first_error = ItemError{item.error->code, endpoint.model_id + " " +
                                                            item.record_id + ": " +
                                                            item.error->message};
            }
          }
        }
        write_predictions(prediction_file(out, spec.descriptor.id, endpoint.model_id),
                          preds);
        append_review_queue(review, preds);
        if (spec.descriptor.labeled && !first_error) {
          auto r = evaluation_rows(scheme, ds, preds, endpoint.model_id);
          rows.insert(rows.end(), r.begin(), r.end());
        }
      }
      emit_both(out / "reports" / spec.descriptor.id, rows);
      metrics.insert(metrics.end(), rows.begin(), rows.end());
    }
    publish_metrics(out, "classify", metrics);
    if (first_error) {
      throw Error(first_error->code,
                  std::to_string(outcome.item_errors) +
                      " request(s) failed; finished responses are cached. First: " +
                      first_error->message);
    }
    return outcome;
  });
}

// ---- consensus --------------------------------------------------------------

void run_consensus(const RunManifest& m, const RunOptions& o) {
  staged("consensus", [&] {
    validate_manifest(m);
    if (!m.coarse()) {
      throw Error(ErrorCode::ValidationError, "consensus requires the coarse scheme");
    }
    if (m.endpoints.empty()) throw Error(ErrorCode::ValidationError, "no endpoints");
    const fs::path out = o.out_dir;
    const auto required = required_models(m);
    const auto scheme = load_scheme(m.data_dir / "definitions", std::string(kCoarseSchemeId));
    std::vector<ReportRow> metrics;

    for (const auto& spec : m.datasets) {
      if (!classified(spec)) continue;
      const auto& id = spec.descriptor.id;
      const Dataset universe = read_dataset_jsonl(dataset_file(out, id));
      std::vector<Prediction> preds;
      for (const auto& model : required) {
        auto p = read_predictions(prediction_file(out, id, model));
        preds.insert(preds.end(), p.begin(), p.end());
      }
      auto result = build_consensus_dataset(universe, preds, required);
      write_consensus_jsonl(out / "consensus" / (id + ".jsonl"), result.results);
      write_dataset_jsonl(out / "consensus" / (id + ".dataset.jsonl"), result.dataset);
      log(o, "consensus " + id + ": " + std::to_string(result.dataset.size()) + " of " +
                 std::to_string(universe.size()) + " records unanimous");

      if (spec.descriptor.labeled && !result.dataset.empty()) {
        std::vector<Prediction> agreed;
        for (const auto& r : result.results) {
          if (!r.label) continue;
          agreed.push_back({r.record_id, "consensus", "",
                            std::string(display_name(*r.label)), ParseStatus::Ok});
        }
        Dataset subset{id, {}};
        std::set<std::string> keep;
        for (const auto& p : agreed) keep.insert(p.record_id);
        for (const auto& r : universe.records) {
          if (keep.contains(r.id)) subset.records.push_back(r);
        }
        auto rows = evaluation_rows(scheme, subset, agreed, "Consensus");
        emit_both(out / "reports" / (id + ".consensus"), rows);
        metrics.insert(metrics.end(), rows.begin(), rows.end());
      }
    }
    publish_metrics(out, "consensus", metrics);
    return 0;
  });
}

// ---- augment / train --------------------------------------------------------

namespace {

const std::vector<std::string> kConditions = {"Fine-Tuned", "Zero-Shot", "Review-Aug",
                                              "Random-Aug", "App-Specific-Aug"};

std::string shell_join(const std::vector<std::string>& argv) {
  std::string s;
  for (const auto& a : argv) s += (s.empty() ? "" : " ") + a;
  return s;
}

bool executable_available(const std::string& program) {
  if (program.find('/') != std::string::npos) return ::access(program.c_str(), X_OK) == 0;
  const char* path = std::getenv("PATH");
  if (!path) return false;
  for (const auto& dir : detail::split(path, ':')) {
    auto candidate = fs::path(dir.empty() ? "." : dir) / program;
    if (::access(candidate.c_str(), X_OK) == 0 && fs::is_regular_file(candidate)) return true;
  }
  return false;
}

// Starts `argv` in `cwd` with stdout and stderr sent to `log_path`.
pid_t spawn(const std::vector<std::string>& argv, const fs::path& log_path,
            const fs::path& cwd) {
  fs::create_directories(log_path.parent_path());
  const auto log_abs = fs::absolute(log_path);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log_abs.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  posix_spawn_file_actions_addchdir_np(&actions, cwd.c_str());
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw Error(ErrorCode::TrainerUnavailable,
                "cannot launch '" + argv[0] + "': " + std::strerror(rc));
  }
  return pid;
}

struct Job {
  std::vector<std::string> argv;
  fs::path log;
};

// One process per job, all started before any is awaited. Jobs run in the
// output directory so job files can use paths relative to it.
void run_parallel(const std::vector<Job>& jobs, const fs::path& cwd) {
  std::vector<pid_t> pids;
  std::optional<Error> failure;
  for (const auto& job : jobs) {
    try {
      pids.push_back(spawn(job.argv, job.log, cwd));
    } catch (const Error& e) {
      failure = e;
      break;
    }
  }
  for (std::size_t i = 0; i < pids.size(); ++i) {
    int status = 0;
    while (::waitpid(pids[i], &status, 0) < 0 && errno == EINTR) {
    }
    const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    if (!ok && !failure) {
      const int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
      failure = Error(ErrorCode::TrainerFailed,
                      "'" + shell_join(jobs[i].argv) + "' exited with status " +
                          std::to_string(code) + " (log: " + jobs[i].log.string() + ")");
    }
  }
  if (failure) throw *failure;
}

// record_id -> predicted flag, in eval order. Throws SchemaViolation.
std::vector<bool> read_trainer_predictions(const fs::path& path, const Dataset& eval) {
  std::vector<bool> flags;
  std::size_t n = 0;
  const auto content = detail::read_file(path);
  for (auto line : detail::split_lines(content)) {
    if (detail::trim(line).empty()) continue;
    const auto where = path.string() + ": line " + std::to_string(n + 1);
    if (n >= eval.size()) throw Error(ErrorCode::SchemaViolation, where + ": extra line");
    try {
      auto obj = json::parse(line);
      auto id = obj.at("record_id").get<std::string>();
      auto predicted = obj.at("predicted").get<bool>();
      auto score = obj.at("score").get<double>();
      if (id != eval.records[n].id) {
        throw Error(ErrorCode::SchemaViolation,
                    where + ": record_id '" + id + "' out of order");
      }
      if (!(score >= 0.0 && score <= 1.0)) {
        throw Error(ErrorCode::SchemaViolation, where + ": score outside [0, 1]");
      }
      flags.push_back(predicted);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaViolation, where + ": " + e.what());
    }
    ++n;
  }
  if (n != eval.size()) {
    throw Error(ErrorCode::SchemaViolation,
                path.string() + ": " + std::to_string(n) + " lines for " +
                    std::to_string(eval.size()) + " eval records");
  }
  return flags;
}

std::vector<bool> truth_flags(const Dataset& eval, CoarseLabel target) {
  std::vector<bool> flags;
  for (const auto& r : eval.records) flags.push_back(r.coarse_label == target);
  return flags;
}

Dataset qualified(const Dataset& ds) {
  Dataset out{ds.id, ds.records};
  for (auto& r : out.records) r.id = ds.id + ":" + r.id;
  return out;
}

Dataset concat(std::string id, const std::vector<Dataset>& parts) {
  Dataset out{std::move(id), {}};
  for (const auto& p : parts) {
    out.records.insert(out.records.end(), p.records.begin(), p.records.end());
  }
  return out;
}

struct TrainUnit {
  std::string setting;
  std::string condition;
  std::optional<std::string> app;  // App-Specific-Aug only
  Dataset train;
  fs::path dir;
};

ReportRow averaged(const std::string& setting, CoarseLabel label, const std::string& app,
                   const std::string& condition, std::span<const ClassMetrics> folds) {
  ReportRow row{setting, std::string(token(label)), app, condition, 0.0, 0.0, 0.0};
  for (const auto& f : folds) {
    row.precision += f.precision;
    row.recall += f.recall;
    row.f1 += f.f1;
  }
  const double n = static_cast<double>(folds.size());
  row.precision /= n;
  row.recall /= n;
  row.f1 /= n;
  return row;
}

// Condition order, then apps in manifest order with an "Average" row when
// there is more than one app.
std::vector<ReportRow> arrange(std::vector<ReportRow> rows, const AugmentationSpec& a) {
  std::vector<ReportRow> out;
  std::vector<std::string> apps = a.target_apps;
  for (const auto& s : a.settings) {
    for (auto label : a.target_labels) {
      std::vector<ReportRow> block;
      for (const auto& app : apps) {
        for (const auto& c : kConditions) {
          for (const auto& r : rows) {
            if (r.setting == s.name && r.target_label == token(label) && r.app == app &&
                r.condition == c) {
              block.push_back(r);
            }
          }
        }
      }
      if (apps.size() > 1) {
        for (const auto& c : kConditions) {
          std::vector<ClassMetrics> per_app;
          for (const auto& r : block) {
            if (r.condition == c) per_app.push_back({"", r.precision, r.recall, r.f1, 0});
          }
          if (per_app.size() == apps.size()) {
            block.push_back(averaged(s.name, label, "Average", c, per_app));
          }
        }
      }
      out.insert(out.end(), block.begin(), block.end());
    }
  }
  return out;
}

void emit_augment_reports(const RunManifest& m, const fs::path& out,
                          const std::vector<ReportRow>& rows) {
  auto stem = out / "reports" / (m.run_id + "_augment");
  emit_both(stem, rows);
  if (!rows.empty()) {
    detail::write_file(fs::path(stem.string() + ".table.md"),
                       render_condition_table(rows, kConditions));
  }
  publish_metrics(out, "augment", rows);
}

}  // namespace

AugmentOutcome run_augment_train(const RunManifest& m, const RunOptions& o) {
  return staged("augment", [&] {
    validate_manifest(m);
    if (!m.augmentation) {
      throw Error(ErrorCode::ValidationError, "manifest has no augmentation section");
    }
    const auto& a = *m.augmentation;
    const fs::path out = o.out_dir;
    const auto truth_path = dataset_file(out, *m.truth_dataset);
    if (!fs::is_regular_file(truth_path)) {
      throw Error(ErrorCode::UnreadableFile,
                  "prepared truth dataset missing at " + truth_path.string() +
                      "; run classify first");
    }
    const Dataset truth = read_dataset_jsonl(truth_path);

    // Eval files, one per target app.
    std::map<std::string, Dataset> eval;
    for (const auto& app : a.target_apps) {
      Dataset subset{truth.id, {}};
      for (const auto& r : truth.records) {
        if (r.app_id == app) subset.records.push_back(r);
      }
      if (subset.empty()) {
        throw Error(ErrorCode::EmptyInput,
                    "truth dataset " + truth.id + " has no records for app '" + app + "'");
      }
      write_train_jsonl(out / "augment" / "eval" / (detail::path_component(app) + ".jsonl"),
                        subset);
      eval.emplace(app, std::move(subset));
    }

    // Zero-Shot straight from the predictions store.
    const std::string zs_model =
        a.zero_shot_model.empty() ? m.endpoints.front().model_id : a.zero_shot_model;
    std::map<std::string, ParseStatus> zs_status;
    std::map<std::string, std::optional<CoarseLabel>> zs_label;
    for (const auto& p : read_predictions(prediction_file(out, truth.id, zs_model))) {
      zs_status[p.record_id] = p.status;
      zs_label[p.record_id] =
          p.status == ParseStatus::Ok ? parse_coarse_label(*p.label) : std::nullopt;
    }
    AugmentOutcome outcome;
    std::vector<ReportRow> rows;
    for (const auto& s : a.settings) {
      for (auto label : a.target_labels) {
        for (const auto& app : a.target_apps) {
          const auto& ev = eval.at(app);
          std::vector<bool> predicted;
          for (const auto& r : ev.records) {
            auto it = zs_label.find(r.id);
            if (it == zs_label.end()) {
              throw Error(ErrorCode::UnknownRecord, "no " + zs_model +
                                                        " prediction for truth record '" +
                                                        r.id + "'");
            }
            predicted.push_back(it->second == label);
          }
          auto bm = binary_metrics(std::string(token(label)), truth_flags(ev, label),
                                   predicted);
          rows.push_back({s.name, std::string(token(label)), app, "Zero-Shot",
                          bm.precision, bm.recall, bm.f1});
        }
      }
    }

    const bool trainer_ok = m.trainer && !m.trainer->command.empty() &&
                            executable_available(m.trainer->command.front());
    if (!trainer_ok) {
      for (const auto& s : a.settings) {
        for (const auto& c : kConditions) {
          if (c == "Zero-Shot" || (c == "Review-Aug" && !s.review_aug)) continue;
          outcome.skipped.push_back(s.name + "/" + c);
        }
      }
      outcome.rows = arrange(rows, a);
      emit_augment_reports(m, out, outcome.rows);
      std::string list;
      for (const auto& sk : outcome.skipped) list += (list.empty() ? "" : ", ") + sk;
      throw Error(ErrorCode::TrainerUnavailable,
                  std::string(m.trainer ? "trainer command not found" : "no trainer configured") +
                      "; Zero-Shot rows written, skipped: " + list);
    }
    const auto& trainer = *m.trainer;

    // Pools labelled by consensus.
    auto pool = [&](const std::string& id) {
      return qualified(read_dataset_jsonl(out / "consensus" / (id + ".dataset.jsonl")));
    };
    const Dataset general_pool = pool(a.general_pool);
    const Dataset app_pool = a.app_pool == a.general_pool ? general_pool : pool(a.app_pool);

    std::map<std::string, Dataset> prepared;
    auto human = [&](const std::string& id) -> const Dataset& {
      auto it = prepared.find(id);
      if (it == prepared.end()) {
        it = prepared.emplace(id, qualified(prepare_dataset(m, *m.find_dataset(id), true)))
                 .first;
      }
      return it->second;
    };

    std::vector<TrainUnit> units;
    for (const auto& s : a.settings) {
      std::vector<Dataset> parts;
      for (const auto& p : s.primary) parts.push_back(human(p));
      const Dataset base = concat(s.name, parts);
      const auto sdir = out / "augment" / s.name;
      auto tag = [&](const std::string& c, const std::string& app) {
        return "augment:" + s.name + ":" + c + ":" + app;
      };

      units.push_back({s.name, "Fine-Tuned", std::nullopt, base, sdir / "Fine-Tuned"});
      if (s.review_aug) {
        auto aug = sample_augmentation(base, human(*s.review_aug), a.ratio,
                                       AugmentMode::Random, std::nullopt, truth,
                                       derive_seed(m.seed, tag("Review-Aug", "")));
        for (auto& r : aug.synthetic.records) r.provenance = Provenance::Human;
        units.push_back({s.name, "Review-Aug", std::nullopt, merge_training_set(aug),
                         sdir / "Review-Aug"});
      }
      auto random = sample_augmentation(base, general_pool, a.ratio, AugmentMode::Random,
                                        std::nullopt, truth,
                                        derive_seed(m.seed, tag("Random-Aug", "")));
      units.push_back({s.name, "Random-Aug", std::nullopt, merge_training_set(random),
                       sdir / "Random-Aug"});
      for (const auto& app : a.target_apps) {
        auto specific = sample_augmentation(base, app_pool, a.ratio, AugmentMode::AppSpecific,
                                            app, truth,
                                            derive_seed(m.seed, tag("App-Specific-Aug", app)));
        units.push_back({s.name, "App-Specific-Aug", app, merge_training_set(specific),
                         sdir / "App-Specific-Aug" / detail::path_component(app)});
      }
    }

    for (auto& unit : units) {
      unit.train.id = unit.setting + "/" + unit.condition + (unit.app ? "/" + *unit.app : "");
      write_train_jsonl(unit.dir / "train.jsonl", unit.train);
      const auto plan = make_folds(unit.train, a.folds, m.seed);
      write_fold_plan(unit.dir / "folds.jsonl", plan);
      for (std::size_t f = 0; f < a.folds; ++f) {
        Dataset part{unit.train.id, {}};
        for (std::size_t i = 0; i < unit.train.size(); ++i) {
          if (plan.assignments[i].second != f) part.records.push_back(unit.train.records[i]);
        }
        write_train_jsonl(unit.dir / ("fold" + std::to_string(f)) / "train.jsonl", part);
      }

      const std::vector<std::string> apps =
          unit.app ? std::vector<std::string>{*unit.app} : a.target_apps;
      for (auto label : a.target_labels) {
        const std::string lt(token(label));
        log(o, "train " + unit.train.id + " " + lt);
        std::vector<Job> train_jobs;
        for (std::size_t f = 0; f < a.folds; ++f) {
          const auto fdir = unit.dir / ("fold" + std::to_string(f));
          const auto jdir = fdir / lt;
          const auto rel = [&](const fs::path& p) { return p.lexically_relative(out).string(); };
          ojson job;
          job["train_path"] = rel(fdir / "train.jsonl");
          job["target_label"] = lt;
          job["class_weighting"] = trainer.class_weighting;
          job["epochs"] = trainer.epochs;
          job["learning_rate"] = trainer.learning_rate;
          job["max_sequence_length"] = trainer.max_sequence_length;
          job["seed"] = m.seed;
          job["output_dir"] = rel(jdir / "model");
          detail::write_file(jdir / "job.json", job.dump(2) + "\n");
          auto argv = trainer.command;
          argv.insert(argv.end(), {"train", "--job", rel(jdir / "job.json")});
          train_jobs.push_back({argv, jdir / "train.log"});
        }
        run_parallel(train_jobs, out);

        std::vector<Job> predict_jobs;
        for (std::size_t f = 0; f < a.folds; ++f) {
          const auto jdir = unit.dir / ("fold" + std::to_string(f)) / lt;
          for (const auto& app : apps) {
            const auto ac = detail::path_component(app);
            const auto rel = [&](const fs::path& p) { return p.lexically_relative(out).string(); };
            auto argv = trainer.command;
            argv.insert(argv.end(),
                        {"predict", "--model", rel(jdir / "model"), "--eval",
                         rel(out / "augment" / "eval" / (ac + ".jsonl")), "--out",
                         rel(jdir / ("predictions_" + ac + ".jsonl"))});
            predict_jobs.push_back({argv, jdir / ("predict_" + ac + ".log")});
          }
        }
        run_parallel(predict_jobs, out);

        for (const auto& app : apps) {
          const auto& ev = eval.at(app);
          const auto tf = truth_flags(ev, label);
          std::vector<ClassMetrics> folds;
          for (std::size_t f = 0; f < a.folds; ++f) {
            const auto jdir = unit.dir / ("fold" + std::to_string(f)) / lt;
            auto pf = read_trainer_predictions(
                jdir / ("predictions_" + detail::path_component(app) + ".jsonl"), ev);
            folds.push_back(binary_metrics(lt, tf, pf));
          }
          rows.push_back(averaged(unit.setting, label, app, unit.condition, folds));
        }
      }
    }

    outcome.rows = arrange(rows, a);
    emit_augment_reports(m, out, outcome.rows);
    return outcome;
  });
}

void run_all(const RunManifest& m, const RunOptions& o) {
  run_classify(m, o);
  if (m.coarse() && !m.endpoints.empty()) run_consensus(m, o);
  if (m.augmentation) run_augment_train(m, o);
}

}  // namespace revlabel
