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

#ifndef REVLABEL_TOOLS_SYNTH_HPP
#define REVLABEL_TOOLS_SYNTH_HPP

// Synthetic feedback corpora for demos and tests. Texts carry a lexical
// signal for their class so a bag-of-words trainer can learn something;
// labels use each dataset's own vocabulary.

#include "revlabel/random.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace revlabel::synth {

struct CorpusSpec {
  std::string id;
  std::size_t size = 100;
  std::vector<std::string> apps;  // empty: no app_id column
  // Original labels per coarse class (Bug, Feature, Other); one is drawn.
  std::array<std::vector<std::string>, 3> labels;
  std::array<double, 3> mix = {0.35, 0.25, 0.40};
  std::vector<std::string> unmapped;  // labels outside the mapping
  double unmapped_share = 0.0;
  double short_share = 0.0;  // texts with fewer than three informative tokens
  bool labeled = true;
  std::uint64_t seed = 1;
};

inline const std::array<std::vector<std::string>, 3>& class_words() {
  static const std::array<std::vector<std::string>, 3> words = {{
      {"crash", "crashes", "freezes", "error", "broken", "fails", "glitch", "stuck",
       "blank", "unresponsive", "bug", "reboot", "lagging", "corrupted", "timeout"},
      {"add", "option", "please", "wish", "support", "dark", "export", "allow",
       "feature", "widget", "customize", "integration", "schedule", "request", "toggle"},
      {"love", "great", "awesome", "nice", "best", "thanks", "amazing", "useful",
       "happy", "enjoy", "fantastic", "favorite", "recommend", "perfect", "wonderful"},
  }};
  return words;
}

inline const std::vector<std::string>& common_words() {
  static const std::vector<std::string> words = {
      "app", "photos", "messages", "files", "camera", "update", "version", "phone",
      "account", "folder", "chat", "pins", "board", "video", "sync", "upload",
      "screen", "login", "backup", "contacts", "tablet", "share", "search", "link"};
  return words;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

struct Row {
  std::string id, text, label, app;
  int coarse = -1;  // -1 for unmapped
};

inline std::vector<Row> generate(const CorpusSpec& spec) {
  Rng rng(derive_seed(spec.seed, "synth:" + spec.id));
  const auto& cw = class_words();
  const auto& common = common_words();
  std::vector<Row> rows;
  for (std::size_t i = 0; i < spec.size; ++i) {
    Row r;
    r.id = spec.id + "-" + std::to_string(i);
    double u = rng.uniform01();
    int c = u < spec.mix[0] ? 0 : (u < spec.mix[0] + spec.mix[1] ? 1 : 2);
    const bool unmapped = !spec.unmapped.empty() && rng.uniform01() < spec.unmapped_share;
    if (unmapped) {
      r.label = spec.unmapped[rng.uniform_index(spec.unmapped.size())];
      r.coarse = -1;
    } else {
      const auto& names = spec.labels[static_cast<std::size_t>(c)];
      r.label = names[rng.uniform_index(names.size())];
      r.coarse = c;
    }
    if (!spec.apps.empty()) r.app = spec.apps[rng.uniform_index(spec.apps.size())];

    std::string text;
    auto add = [&](const std::string& w) {
      if (!text.empty()) text.push_back(' ');
      text += w;
    };
    if (rng.uniform01() < spec.short_share) {
      // at most two informative tokens, padded with stopwords and digits
      add("it");
      add(cw[static_cast<std::size_t>(c)][rng.uniform_index(cw[0].size())]);
      add("is");
      add(std::to_string(rng.uniform_index(100)));
      add("!!");
    } else {
      const std::size_t n = 6 + rng.uniform_index(5);
      for (std::size_t k = 0; k < n; ++k) {
        // about a third of the tokens carry the class signal, with some cross-talk
        const double v = rng.uniform01();
        if (v < 0.30) {
          add(cw[static_cast<std::size_t>(c)][rng.uniform_index(cw[0].size())]);
        } else if (v < 0.45) {
          add(cw[rng.uniform_index(3)][rng.uniform_index(cw[0].size())]);
        } else {
          add(common[rng.uniform_index(common.size())]);
        }
      }
      if (rng.uniform01() < 0.3) add("the");
      if (rng.uniform01() < 0.2) text += ", really";
      add("#" + std::to_string(i));
    }
    if (rng.uniform01() < 0.5) text[0] = static_cast<char>(text[0] - 'a' + 'A');
    r.text = text;
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::string to_csv(const CorpusSpec& spec, const std::vector<Row>& rows) {
  std::string out = "id,text";
  if (spec.labeled) out += ",label";
  if (!spec.apps.empty()) out += ",app_id";
  out += "\n";
  for (const auto& r : rows) {
    out += csv_quote(r.id) + "," + csv_quote(r.text);
    if (spec.labeled) out += "," + csv_quote(r.label);
    if (!spec.apps.empty()) out += "," + csv_quote(r.app);
    out += "\n";
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
}

inline void write_corpus(const std::filesystem::path& path, const CorpusSpec& spec) {
  write_text(path, to_csv(spec, generate(spec)));
}

inline const std::vector<std::string>& demo_apps() {
  static const std::vector<std::string> apps = {"Dropbox", "Pinterest", "WhatsApp"};
  return apps;
}

// The five corpora of the demo experiment.
inline std::vector<CorpusSpec> demo_corpora(std::uint64_t seed, double scale = 1.0) {
  auto n = [&](std::size_t base) {
    return std::max<std::size_t>(10, static_cast<std::size_t>(base * scale));
  };
  std::vector<CorpusSpec> specs;
  CorpusSpec ds1{"DS1", n(240), demo_apps(),
                 {{{"bug report"}, {"user request"}, {"praise", "usage scenario"}}}};
  ds1.unmapped = {"complaint", "feature strength", "noise"};
  ds1.unmapped_share = 0.08;
  ds1.short_share = 0.05;
  ds1.seed = seed;
  specs.push_back(ds1);
  CorpusSpec pool{"POOL", n(3200), {"Dropbox", "Pinterest", "WhatsApp", "Spotify", "Zoom"},
                  {{{"bug"}, {"feature"}, {"other"}}}};
  pool.short_share = 0.05;
  pool.seed = seed;
  specs.push_back(pool);
  CorpusSpec ds2{"DS2", n(120), {}, {{{"bug report"}, {"feature request"},
                                      {"user experience", "rating"}}}};
  ds2.seed = seed;
  specs.push_back(ds2);
  CorpusSpec ds3{"DS3", n(200), {}, {{{"bug report"}, {"feature request"}, {"other"}}}};
  ds3.seed = seed;
  specs.push_back(ds3);
  CorpusSpec ds4{"DS4", n(200), {}, {{{"functional bug report"},
                                      {"suggestion for new feature"}, {"other"}}}};
  ds4.seed = seed;
  specs.push_back(ds4);
  return specs;
}

// Manifest for the demo corpora written next to it. `trainer` may be empty.
inline std::string demo_manifest(std::uint64_t seed, const std::vector<std::string>& trainer,
                                 bool with_augmentation = true) {
  std::string cmd;
  for (const auto& a : trainer) cmd += (cmd.empty() ? "\"" : ", \"") + a + "\"";
  std::string m = "{\n"
                  "  \"run_id\": \"demo\",\n"
                  "  \"seed\": " + std::to_string(seed) + ",\n"
                  "  \"scheme\": \"coarse\",\n"
                  "  \"shots_per_class\": 0,\n"
                  "  \"datasets\": [\n"
                  "    {\"id\": \"DS1\", \"path\": \"DS1.csv\", \"mapping\": \"DS1\", \"role\": \"eval\"},\n"
                  "    {\"id\": \"POOL\", \"path\": \"POOL.csv\", \"mapping\": \"DS7\", \"role\": \"pool\", \"dedup_against\": \"DS1\"},\n"
                  "    {\"id\": \"DS2\", \"path\": \"DS2.csv\", \"role\": \"train\", \"dedup_against\": \"DS1\"},\n"
                  "    {\"id\": \"DS3\", \"path\": \"DS3.csv\", \"role\": \"train\", \"dedup_against\": \"DS1\"},\n"
                  "    {\"id\": \"DS4\", \"path\": \"DS4.csv\", \"role\": \"train\", \"dedup_against\": \"DS1\"}\n"
                  "  ],\n"
                  "  \"endpoints\": [\n";
  const char* models[] = {"gpt-3.5-turbo", "gpt-4o", "llama-3", "flan-t5"};
  for (int i = 0; i < 4; ++i) {
    m += std::string("    {\"model_id\": \"") + models[i] +
         "\", \"max_concurrency\": 4, \"requests_per_minute\": 1000000, "
         "\"mock\": {\"mode\": \"seeded_confusion\", \"accuracy\": 0.8, \"seed\": " +
         std::to_string(seed + static_cast<std::uint64_t>(i) + 1) + "}}" +
         (i < 3 ? ",\n" : "\n");
  }
  m += "  ],\n"
       "  \"consensus_required\": [\"gpt-3.5-turbo\", \"gpt-4o\", \"llama-3\", \"flan-t5\"],\n"
       "  \"truth_dataset\": \"DS1\"";
  if (with_augmentation) {
    m += ",\n"
         "  \"augmentation\": {\n"
         "    \"ratio\": 0.3,\n"
         "    \"settings\": [\n"
         "      {\"name\": \"DS2-DS3\", \"primary\": [\"DS2\", \"DS3\"], \"review_aug\": \"DS4\"},\n"
         "      {\"name\": \"DS2-DS4\", \"primary\": [\"DS2\", \"DS4\"], \"review_aug\": \"DS3\"}\n"
         "    ],\n"
         "    \"general_pool\": \"POOL\",\n"
         "    \"app_pool\": \"POOL\",\n"
         "    \"target_apps\": [\"Dropbox\", \"Pinterest\", \"WhatsApp\"],\n"
         "    \"target_labels\": [\"BugReport\", \"FeatureRequest\"],\n"
         "    \"zero_shot_model\": \"gpt-4o\",\n"
         "    \"folds\": 5\n"
         "  }";
    if (!trainer.empty()) {
      m += ",\n  \"trainer\": {\"command\": [" + cmd +
           "], \"class_weighting\": \"balanced\", \"epochs\": 3}";
    }
  }
  m += "\n}\n";
  return m;
}

inline void write_demo(const std::filesystem::path& dir, std::uint64_t seed,
                       const std::vector<std::string>& trainer, double scale = 1.0,
                       bool with_augmentation = true) {
  for (const auto& spec : demo_corpora(seed, scale)) {
    write_corpus(dir / (spec.id + ".csv"), spec);
  }
  write_text(dir / "manifest.json", demo_manifest(seed, trainer, with_augmentation));
}

}  // namespace revlabel::synth

#endif  // REVLABEL_TOOLS_SYNTH_HPP
