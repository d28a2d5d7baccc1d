/* Copyright 2026 The rnsx Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Command-line front end; talks to the library only through rnsx.h.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rnsx/rnsx.h"

namespace {

// Owns a string handed out by the library.
struct Text {
  char* p = nullptr;
  ~Text() { rnsx_free_string(p); }
  const char* c_str() const { return p ? p : ""; }
};

int Report(rnsx_status s) {
  if (s != RNSX_OK) std::cerr << "error: " << rnsx_last_error() << "\n";
  return static_cast<int>(s);
}

int WriteJson(const std::string& path, const Text& json) {
  if (path.empty()) return 0;
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return RNSX_ERR_DATA;
  }
  out << json.c_str() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation-network sentence encoders with latent dependency trees"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rnsx_version()));

  std::string config, data_dir, out, checkpoint, data, input, marginals, a, b, json_out;
  std::size_t rounds = 10000;
  std::uint64_t seed = 1;
  bool quiet = false;

  auto* train = app.add_subcommand("train", "train one configuration");
  train->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
  train->add_option("--data-dir", data_dir, "directory holding the corpus files")
      ->required()
      ->check(CLI::ExistingDirectory);
  train->add_option("--out", out, "output directory")->required();
  train->add_flag("--quiet", quiet, "do not print the report table");

  auto* grid = app.add_subcommand("grid", "grid search over the config's grid_axes");
  grid->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
  grid->add_option("--data-dir", data_dir, "directory holding the corpus files")
      ->required()
      ->check(CLI::ExistingDirectory);
  grid->add_option("--out", out, "output directory")->required();
  grid->add_flag("--quiet", quiet, "do not print the report table");

  auto* eval = app.add_subcommand("eval", "score a labelled corpus with a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  eval->add_option("--data", data, "corpus file in the model's task format")->required();
  eval->add_option("--predictions", out, "write per-example predictions TSV");
  eval->add_option("--json", json_out, "write the JSON report here");

  auto* dump = app.add_subcommand("parse-dump", "decode latent trees for raw sentences");
  dump->add_option("--checkpoint", checkpoint, "latent-tree model checkpoint")->required();
  dump->add_option("--input", input, "one tokenized sentence per line")->required();
  dump->add_option("--out", out, "ten-column tree file")->required();
  dump->add_option("--marginals", marginals, "marginal matrices TSV (default <out>.marginals.tsv)");

  auto* sig = app.add_subcommand("sigtest", "approximate randomization test of two systems");
  sig->add_option("--a", a, "predictions TSV of system A")->required();
  sig->add_option("--b", b, "predictions TSV of system B")->required();
  sig->add_option("--rounds", rounds, "shuffles")->check(CLI::PositiveNumber);
  sig->add_option("--seed", seed, "shuffle seed");
  sig->add_option("--json", json_out, "write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : RNSX_ERR_USAGE;
  }

  Text json, table;
  if (*train || *grid) {
    auto fn = *train ? rnsx_train : rnsx_grid;
    rnsx_status s = fn(config.c_str(), data_dir.c_str(), out.c_str(), &json.p, &table.p);
    if (s != RNSX_OK) return Report(s);
    if (!quiet) std::cout << table.c_str();
    return 0;
  }

  if (*eval || *dump) {
    rnsx_model* model = nullptr;
    rnsx_status s = rnsx_model_load(checkpoint.c_str(), &model);
    if (s != RNSX_OK) return Report(s);
    if (*eval) {
      double acc = 0.0;
      s = rnsx_evaluate(model, data.c_str(), out.empty() ? nullptr : out.c_str(), &acc, &json.p,
                        &table.p);
    } else {
      if (marginals.empty()) marginals = out + ".marginals.tsv";
      std::size_t n = 0;
      s = rnsx_dump_trees(model, input.c_str(), out.c_str(), marginals.c_str(), &n);
      if (s == RNSX_OK) std::cout << "wrote " << n << " trees to " << out << "\n";
    }
    rnsx_model_free(model);
    if (s != RNSX_OK) return Report(s);
    if (*eval) std::cout << table.c_str();
    return WriteJson(json_out, json);
  }

  double p = 1.0;
  rnsx_status s = rnsx_sigtest(a.c_str(), b.c_str(), rounds, seed, &p, &json.p, &table.p);
  if (s != RNSX_OK) return Report(s);
  std::cout << table.c_str();
  return WriteJson(json_out, json);
}
