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

// Stand-in trainer speaking the file contract:
//   fake_trainer train --job job.json
//   fake_trainer predict --model DIR --eval FILE --out FILE
// Binary multinomial naive Bayes over lowercase words, with optional
// balanced class weighting. Exit 3 on SingleClassInput, 4 on
// SchemaViolation, 5 on ModelMissing.

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Failure {
  int code;
  std::string message;
};

std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalpha(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Failure{4, "cannot read " + path.string()};
  std::vector<json> rows;
  std::string line;
  std::size_t n = 0;
  const char* keys[] = {"id", "text", "coarse_label", "provenance", "dataset_id", "app_id"};
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Failure{4, path.string() + ": line " + std::to_string(n) + ": " + e.what()};
    }
    std::size_t k = 0;
    for (const auto& [key, value] : obj.items()) {
      if (k >= 6 || key != keys[k]) {
        throw Failure{4, path.string() + ": line " + std::to_string(n) +
                             ": unexpected key '" + key + "'"};
      }
      ++k;
    }
    if (k != 6 || !obj["text"].is_string() || !obj["coarse_label"].is_string()) {
      throw Failure{4, path.string() + ": line " + std::to_string(n) + ": bad record"};
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

int train(const fs::path& job_path) {
  json job;
  {
    std::ifstream in(job_path);
    if (!in) throw Failure{4, "cannot read job " + job_path.string()};
    job = json::parse(in);
  }
  const auto target = job.at("target_label").get<std::string>();
  const auto weighting = job.at("class_weighting").get<std::string>();
  const fs::path out = job.at("output_dir").get<std::string>();
  auto rows = read_jsonl(job.at("train_path").get<std::string>());

  double count[2] = {0, 0};
  std::map<std::string, double> freq[2];
  double total[2] = {0, 0};
  for (const auto& r : rows) {
    const int y = r["coarse_label"] == target ? 1 : 0;
    count[y] += 1;
  }
  if (count[0] == 0 || count[1] == 0) throw Failure{3, "SingleClassInput"};
  double weight[2] = {1.0, 1.0};
  if (weighting == "balanced") {
    const double n = count[0] + count[1];
    weight[0] = n / (2.0 * count[0]);
    weight[1] = n / (2.0 * count[1]);
  }
  for (const auto& r : rows) {
    const int y = r["coarse_label"] == target ? 1 : 0;
    for (const auto& w : words(r["text"].get<std::string>())) {
      freq[y][w] += weight[y];
      total[y] += weight[y];
    }
  }
  json model;
  model["target_label"] = target;
  model["prior"] = {std::log(count[0] * weight[0]), std::log(count[1] * weight[1])};
  model["total"] = {total[0], total[1]};
  std::map<std::string, bool> vocab;
  for (int y = 0; y < 2; ++y) {
    for (const auto& [w, c] : freq[y]) vocab[w] = true;
  }
  model["vocab"] = vocab.size();
  json f0 = json::object(), f1 = json::object();
  for (const auto& [w, c] : freq[0]) f0[w] = c;
  for (const auto& [w, c] : freq[1]) f1[w] = c;
  model["freq"] = {f0, f1};
  fs::create_directories(out);
  std::ofstream(out / "model.json") << model.dump() << '\n';
  json summary;
  summary["records"] = rows.size();
  summary["class_weights"] = {weight[0], weight[1]};
  std::ofstream(out / "summary.json") << summary.dump() << '\n';
  return 0;
}

int predict(const fs::path& model_dir, const fs::path& eval, const fs::path& out_path) {
  std::ifstream in(model_dir / "model.json");
  if (!in) throw Failure{5, "ModelMissing: " + model_dir.string()};
  const json model = json::parse(in);
  const double vocab = model["vocab"].get<double>() + 1.0;
  auto rows = read_jsonl(eval);
  std::ostringstream out;
  for (const auto& r : rows) {
    double score[2];
    for (int y = 0; y < 2; ++y) {
      score[y] = model["prior"][y].get<double>();
      const auto& f = model["freq"][y];
      const double t = model["total"][y].get<double>();
      for (const auto& w : words(r["text"].get<std::string>())) {
        auto it = f.find(w);
        const double c = it == f.end() ? 0.0 : it->get<double>();
        score[y] += std::log((c + 1.0) / (t + vocab));
      }
    }
    const double p = 1.0 / (1.0 + std::exp(score[0] - score[1]));
    json line;
    line["record_id"] = r["id"];
    line["predicted"] = p >= 0.5;
    line["score"] = p;
    out << line.dump() << '\n';
  }
  std::ofstream(out_path) << out.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    auto opt = [&](const std::string& name) -> std::string {
      for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == name) return args[i + 1];
      }
      throw Failure{2, "missing " + name};
    };
    if (!args.empty() && args[0] == "train") return train(opt("--job"));
    if (!args.empty() && args[0] == "predict") {
      return predict(opt("--model"), opt("--eval"), opt("--out"));
    }
    std::cerr << "usage: fake_trainer train --job F | predict --model D --eval F --out F\n";
    return 2;
  } catch (const Failure& f) {
    std::cerr << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 4;
  }
}
