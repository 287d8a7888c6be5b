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

#include "revlabel/revlabel.h"

#include "revlabel/corpus.hpp"
#include "revlabel/error.hpp"
#include "revlabel/eval.hpp"
#include "revlabel/extraction.hpp"
#include "revlabel/pipeline.hpp"
#include "revlabel/prompt.hpp"
#include "util.hpp"

#include <json.hpp>

#include <cstring>
#include <iostream>
#include <map>

struct rl_context {
  std::filesystem::path data_dir;
  std::string last_error;
};

struct rl_dataset {
  revlabel::Dataset ds;
};

struct rl_manifest {
  revlabel::RunManifest m;
};

namespace {

using revlabel::ErrorCode;

rl_status fail(rl_context* ctx, rl_status status, std::string message) {
  if (ctx) ctx->last_error = std::move(message);
  return status;
}

// Runs body and maps any exception onto a status, keeping the message.
template <class F>
rl_status guarded(rl_context* ctx, F&& body) {
  if (!ctx) return RL_ERR_INVALID_ARGUMENT;
  ctx->last_error.clear();
  try {
    body();
    return RL_OK;
  } catch (const revlabel::Error& e) {
    return fail(ctx, static_cast<rl_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ctx, RL_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ctx, RL_ERR_UNREADABLE_FILE, e.what());
  } catch (const std::exception& e) {
    return fail(ctx, RL_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (!p) {
    throw revlabel::Error(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
  }
}

revlabel::RunOptions run_options(const char* out_dir) {
  need(out_dir, "out_dir");
  revlabel::RunOptions o;
  o.out_dir = out_dir;
  o.log = [](std::string_view line) { std::cerr << line << '\n'; };
  return o;
}

}  // namespace

extern "C" {

const char* rl_version(void) { return "0.1.0"; }

const char* rl_status_name(rl_status status) {
  if (status == RL_OK) return "Ok";
  if (status < RL_ERR_INVALID_ARGUMENT || status > RL_ERR_INTERNAL) return "Unknown";
  return revlabel::to_string(static_cast<ErrorCode>(status));
}

int rl_status_exit_code(rl_status status) {
  if (status == RL_OK) return 0;
  if (status >= RL_ERR_INVALID_ARGUMENT && status <= RL_ERR_INTERNAL &&
      revlabel::is_validation_error(static_cast<ErrorCode>(status))) {
    return 1;
  }
  return 2;
}

rl_context* rl_context_create(const char* data_dir) {
  try {
    auto* ctx = new rl_context;
    ctx->data_dir = data_dir ? std::filesystem::path(data_dir) : revlabel::default_data_dir();
    return ctx;
  } catch (...) {
    return nullptr;
  }
}

void rl_context_destroy(rl_context* ctx) { delete ctx; }

const char* rl_last_error(const rl_context* ctx) {
  return ctx ? ctx->last_error.c_str() : "";
}

rl_status rl_clean_text(rl_context* ctx, const char* text, char* buf, size_t cap,
                        size_t* needed) {
  return guarded(ctx, [&] {
    need(text, "text");
    const auto s = revlabel::normalized_text(text);
    if (needed) *needed = s.size();
    if (buf && cap > 0) {
      const size_t n = std::min(cap - 1, s.size());
      std::memcpy(buf, s.data(), n);
      buf[n] = '\0';
    }
  });
}

int rl_is_eligible(const char* text) {
  if (!text) return -1;
  try {
    return revlabel::is_eligible(text) ? 1 : 0;
  } catch (...) {
    return -1;
  }
}

rl_status rl_dataset_ingest(rl_context* ctx, const char* path, const char* format,
                            const char* dataset_id, const char* source, int labeled,
                            rl_dataset** out) {
  return guarded(ctx, [&] {
    need(path, "path");
    need(dataset_id, "dataset_id");
    need(out, "out");
    *out = nullptr;
    auto ff = revlabel::parse_file_format(format ? format : "csv");
    if (!ff) throw revlabel::Error(ErrorCode::InvalidArgument, "unknown format");
    auto src = revlabel::parse_source(source ? source : "app_store");
    if (!src) throw revlabel::Error(ErrorCode::InvalidArgument, "unknown source");
    revlabel::DatasetDescriptor meta{dataset_id, *src, labeled != 0};
    *out = new rl_dataset{revlabel::ingest(path, *ff, meta)};
  });
}

rl_status rl_dataset_load(rl_context* ctx, const char* path, rl_dataset** out) {
  return guarded(ctx, [&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new rl_dataset{revlabel::read_dataset_jsonl(path)};
  });
}

rl_status rl_dataset_write(rl_context* ctx, const rl_dataset* ds, const char* path) {
  return guarded(ctx, [&] {
    need(ds, "ds");
    need(path, "path");
    revlabel::write_dataset_jsonl(path, ds->ds);
  });
}

void rl_dataset_destroy(rl_dataset* ds) { delete ds; }

size_t rl_dataset_size(const rl_dataset* ds) { return ds ? ds->ds.size() : 0; }

rl_status rl_dataset_filter_eligible(rl_context* ctx, rl_dataset* ds, size_t* removed) {
  return guarded(ctx, [&] {
    need(ds, "ds");
    auto r = revlabel::filter_eligible(ds->ds);
    ds->ds = std::move(r.dataset);
    if (removed) *removed = r.removed;
  });
}

rl_status rl_dataset_dedup(rl_context* ctx, rl_dataset* primary,
                           const rl_dataset* reference, size_t* removed) {
  return guarded(ctx, [&] {
    need(primary, "primary");
    need(reference, "reference");
    auto r = revlabel::dedup_overlap(primary->ds, reference->ds);
    primary->ds = std::move(r.dataset);
    if (removed) *removed = r.removed;
  });
}

rl_status rl_dataset_adapt(rl_context* ctx, rl_dataset* ds, const char* mapping_id,
                           size_t* dropped) {
  return guarded(ctx, [&] {
    need(ds, "ds");
    need(mapping_id, "mapping_id");
    auto mapping = revlabel::load_mapping(
        ctx->data_dir / "mappings" / (std::string(mapping_id) + ".map"), ds->ds.id);
    auto r = revlabel::adapt_to_coarse(ds->ds, mapping);
    ds->ds = std::move(r.dataset);
    if (dropped) *dropped = r.dropped;
  });
}

rl_status rl_dataset_select_shots(rl_context* ctx, rl_dataset* ds, const char* scheme_id,
                                  size_t per_class, uint64_t seed, const char* shots_path) {
  return guarded(ctx, [&] {
    need(ds, "ds");
    need(scheme_id, "scheme_id");
    need(shots_path, "shots_path");
    auto scheme = revlabel::load_scheme(ctx->data_dir / "definitions", scheme_id);
    auto sel = revlabel::select_shots(ds->ds, scheme, per_class, seed);
    std::string text;
    for (const auto& s : sel.shots) {
      nlohmann::ordered_json obj;
      obj["record_id"] = s.record_id;
      obj["text"] = s.text;
      obj["label"] = s.label;
      text += obj.dump() + "\n";
    }
    revlabel::detail::write_file(shots_path, text);
    ds->ds = std::move(sel.residual);
  });
}

rl_status rl_dataset_make_folds(rl_context* ctx, const rl_dataset* ds, size_t k,
                                uint64_t seed, const char* out_path) {
  return guarded(ctx, [&] {
    need(ds, "ds");
    need(out_path, "out_path");
    revlabel::write_fold_plan(out_path, revlabel::make_folds(ds->ds, k, seed));
  });
}

rl_status rl_evaluate(rl_context* ctx, const rl_dataset* truth, const char* scheme_id,
                      const char* predictions_path, const char* metrics_path) {
  return guarded(ctx, [&] {
    need(truth, "truth");
    need(scheme_id, "scheme_id");
    need(predictions_path, "predictions_path");
    need(metrics_path, "metrics_path");
    auto scheme = revlabel::load_scheme(ctx->data_dir / "definitions", scheme_id);
    auto preds = revlabel::read_predictions(predictions_path);
    std::map<std::string, std::string> labels;
    for (const auto& r : truth->ds.records) {
      if (auto l = revlabel::scheme_label(scheme, r)) labels[r.id] = *l;
    }
    auto cm = revlabel::confusion(scheme.names(), labels, preds);
    auto per_class = revlabel::all_class_prf(cm);
    const std::string model = preds.empty() ? "predictions" : preds.front().model_id;
    std::string out;
    for (const auto& c : per_class) {
      out += revlabel::report_row_to_json(
                 {truth->ds.id, c.class_name, "all", model, c.precision, c.recall, c.f1}) +
             "\n";
    }
    auto macro = revlabel::macro_avg(per_class);
    out += revlabel::report_row_to_json(
               {truth->ds.id, "Macro", "all", model, macro.precision, macro.recall, macro.f1}) +
           "\n";
    revlabel::detail::write_file(metrics_path, out);
  });
}

rl_status rl_report(rl_context* ctx, const char* metrics_path, const char* format,
                    const char* out_path) {
  return guarded(ctx, [&] {
    need(metrics_path, "metrics_path");
    need(out_path, "out_path");
    auto f = revlabel::parse_report_format(format ? format : "markdown");
    if (!f) throw revlabel::Error(ErrorCode::InvalidArgument, "format must be markdown or csv");
    revlabel::emit_report(out_path, revlabel::read_metrics_jsonl(metrics_path), *f);
  });
}

rl_status rl_manifest_load(rl_context* ctx, const char* path, rl_manifest** out) {
  return guarded(ctx, [&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new rl_manifest{revlabel::load_manifest(path)};
  });
}

void rl_manifest_destroy(rl_manifest* manifest) { delete manifest; }

void rl_manifest_set_seed(rl_manifest* manifest, uint64_t seed) {
  if (manifest) manifest->m.seed = seed;
}

rl_status rl_manifest_validate(rl_context* ctx, const rl_manifest* manifest) {
  return guarded(ctx, [&] {
    need(manifest, "manifest");
    revlabel::validate_manifest(manifest->m);
  });
}

rl_status rl_run_classify(rl_context* ctx, const rl_manifest* manifest, const char* out_dir) {
  return guarded(ctx, [&] {
    need(manifest, "manifest");
    auto o = run_options(out_dir);
    auto r = revlabel::run_classify(manifest->m, o);
    o.log("classify: " + std::to_string(r.prompts) + " prompts, " +
          std::to_string(r.backend_calls) + " backend calls, " +
          std::to_string(r.cache_hits) + " cache hits");
  });
}

rl_status rl_run_consensus(rl_context* ctx, const rl_manifest* manifest, const char* out_dir) {
  return guarded(ctx, [&] {
    need(manifest, "manifest");
    revlabel::run_consensus(manifest->m, run_options(out_dir));
  });
}

rl_status rl_run_augment(rl_context* ctx, const rl_manifest* manifest, const char* out_dir) {
  return guarded(ctx, [&] {
    need(manifest, "manifest");
    revlabel::run_augment_train(manifest->m, run_options(out_dir));
  });
}

rl_status rl_run_all(rl_context* ctx, const rl_manifest* manifest, const char* out_dir) {
  return guarded(ctx, [&] {
    need(manifest, "manifest");
    revlabel::run_all(manifest->m, run_options(out_dir));
  });
}

}  // extern "C"
