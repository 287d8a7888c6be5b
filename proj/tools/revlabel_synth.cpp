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

// Writes the synthetic demo corpora and a mock-backed manifest.

#include "synth.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Synthetic demo corpus for revlabel"};
  std::string out;
  std::uint64_t seed = 7;
  double scale = 1.0;
  std::vector<std::string> trainer;
  bool no_augment = false;
  app.add_option("--out", out, "Directory to write")->required();
  app.add_option("--seed", seed);
  app.add_option("--scale", scale, "Corpus size multiplier")->check(CLI::PositiveNumber);
  app.add_option("--trainer", trainer, "Trainer command (program and fixed args)");
  app.add_flag("--no-augment", no_augment, "Omit the augmentation section");
  CLI11_PARSE(app, argc, argv);
  revlabel::synth::write_demo(out, seed, trainer, scale, !no_augment);
  return 0;
}
