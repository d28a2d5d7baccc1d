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

#include "rnsx/rnsx.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rnsx/analysis.h"
#include "rnsx/error.h"
#include "rnsx/train.h"

struct rnsx_model {
  rnsx::LoadedModel loaded;
};

namespace {

thread_local std::string last_error;

rnsx_status StatusFor(rnsx::ErrorKind k) {
  switch (k) {
    case rnsx::ErrorKind::kUsage:
      return RNSX_ERR_USAGE;
    case rnsx::ErrorKind::kFormat:
    case rnsx::ErrorKind::kIo:
    case rnsx::ErrorKind::kDimension:
      return RNSX_ERR_DATA;
    case rnsx::ErrorKind::kNumeric:
    case rnsx::ErrorKind::kSingular:
    case rnsx::ErrorKind::kDegenerate:
    case rnsx::ErrorKind::kDomain:
      return RNSX_ERR_NUMERIC;
  }
  return RNSX_ERR_NUMERIC;
}

template <typename F>
rnsx_status Guard(F&& f) {
  last_error.clear();
  try {
    f();
    return RNSX_OK;
  } catch (const rnsx::Error& e) {
    last_error = e.what();
    return StatusFor(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return RNSX_ERR_DATA;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RNSX_ERR_NUMERIC;
  } catch (const std::exception& e) {
    last_error = std::string("internal error: ") + e.what();
    return RNSX_ERR_NUMERIC;
  }
}

void Require(const void* p, const char* what) {
  if (!p) rnsx::Fail(rnsx::ErrorKind::kUsage, std::string(what) + " must not be NULL");
}

void Give(char** out, const std::string& s) {
  if (!out) return;
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  *out = p;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) rnsx::Fail(rnsx::ErrorKind::kIo, "cannot write '" + path + "'");
  return out;
}

}  // namespace

extern "C" {

const char* rnsx_version(void) { return "1.0.0"; }

const char* rnsx_last_error(void) { return last_error.c_str(); }

void rnsx_free_string(char* s) { std::free(s); }

rnsx_status rnsx_train(const char* config_path, const char* data_dir, const char* out_dir,
                       char** report_json, char** report_table) {
  return Guard([&] {
    Require(config_path, "config path");
    Require(data_dir, "data directory");
    Require(out_dir, "output directory");
    rnsx::TrainConfig c = rnsx::LoadTrainConfig(config_path);
    rnsx::RunReport r = rnsx::Train(c, rnsx::LoadDataset(c, data_dir), out_dir);
    Give(report_json, rnsx::RunReportToJson(r));
    Give(report_table, rnsx::RunReportTable(r));
  });
}

rnsx_status rnsx_grid(const char* config_path, const char* data_dir, const char* out_dir,
                      char** report_json, char** report_table) {
  return Guard([&] {
    Require(config_path, "config path");
    Require(data_dir, "data directory");
    Require(out_dir, "output directory");
    rnsx::TrainConfig c = rnsx::LoadTrainConfig(config_path);
    rnsx::GridResult g = rnsx::GridSearch(c, rnsx::LoadDataset(c, data_dir), out_dir);
    Give(report_json, rnsx::GridResultToJson(g));
    Give(report_table, rnsx::GridResultTable(g));
  });
}

rnsx_status rnsx_model_load(const char* checkpoint_path, rnsx_model** out) {
  return Guard([&] {
    Require(checkpoint_path, "checkpoint path");
    Require(out, "output handle");
    *out = nullptr;
    auto* m = new rnsx_model{rnsx::LoadModel(checkpoint_path)};
    *out = m;
  });
}

void rnsx_model_free(rnsx_model* model) { delete model; }

rnsx_status rnsx_evaluate(const rnsx_model* model, const char* data_path,
                          const char* predictions_path, double* accuracy, char** report_json,
                          char** report_table) {
  return Guard([&] {
    Require(model, "model");
    Require(data_path, "data path");
    const rnsx::LoadedModel& m = model->loaded;
    std::vector<rnsx::Example> exs = rnsx::ReadCorpus(m.config, data_path, m.labels);
    if (exs.empty()) rnsx::Fail(rnsx::ErrorKind::kFormat, std::string("'") + data_path + "' is empty");
    rnsx::Evaluation ev = rnsx::Evaluate(*m.model, exs, *m.vocab, m.labels);
    if (predictions_path) {
      std::ofstream out = OpenOut(predictions_path);
      rnsx::WritePredictionsTsv(out, m.labels, ev.rows);
    }
    if (accuracy) *accuracy = ev.accuracy;
    std::size_t correct = 0;
    for (const auto& r : ev.rows) correct += r.predicted() == r.gold;
    nlohmann::ordered_json j{{"data", data_path},
                             {"examples", ev.rows.size()},
                             {"correct", correct},
                             {"accuracy", ev.accuracy}};
    if (predictions_path) j["predictions"] = predictions_path;
    Give(report_json, j.dump(2));
    char line[64];
    std::snprintf(line, sizeof line, "%.2f", 100.0 * ev.accuracy);
    Give(report_table, "examples  " + std::to_string(ev.rows.size()) + "\ncorrect   " +
                           std::to_string(correct) + "\naccuracy  " + line + "\n");
  });
}

rnsx_status rnsx_dump_trees(const rnsx_model* model, const char* input_path,
                            const char* out_path, const char* marginals_path,
                            size_t* sentences) {
  return Guard([&] {
    Require(model, "model");
    Require(input_path, "input path");
    Require(out_path, "output path");
    std::ifstream in(input_path);
    if (!in) rnsx::Fail(rnsx::ErrorKind::kIo, std::string("cannot open '") + input_path + "'");
    auto sents = rnsx::ReadSentences(in, input_path);
    std::ofstream trees = OpenOut(out_path);
    std::ofstream marg;
    std::ostringstream discard;
    if (marginals_path) marg = OpenOut(marginals_path);
    const rnsx::LoadedModel& m = model->loaded;
    rnsx::DumpTrees(*m.model, *m.vocab, sents, trees,
                    marginals_path ? static_cast<std::ostream&>(marg) : discard);
    if (sentences) *sentences = sents.size();
  });
}

rnsx_status rnsx_sigtest(const char* a_path, const char* b_path, size_t rounds, uint64_t seed,
                         double* p_value, char** report_json, char** report_table) {
  return Guard([&] {
    Require(a_path, "first predictions path");
    Require(b_path, "second predictions path");
    auto read = [](const char* path) {
      std::ifstream in(path);
      if (!in) rnsx::Fail(rnsx::ErrorKind::kIo, std::string("cannot open '") + path + "'");
      return rnsx::ReadPredictionsTsv(in);
    };
    auto a = read(a_path);
    auto b = read(b_path);
    rnsx::SignificanceReport r = rnsx::ComparePredictions(a, b, rounds, seed);
    if (p_value) *p_value = r.p_value;
    Give(report_json, rnsx::SignificanceReportToJson(r));
    Give(report_table, rnsx::SignificanceReportTable(r));
  });
}

rnsx_status rnsx_randomization_test(const double* a, const double* b, size_t n, size_t rounds,
                                    uint64_t seed, double* p_value) {
  return Guard([&] {
    Require(a, "a");
    Require(b, "b");
    Require(p_value, "p_value");
    *p_value = rnsx::ApproxRandomizationTest({a, n}, {b, n}, rounds, seed);
  });
}

}  // extern "C"
