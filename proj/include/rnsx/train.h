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

// Training, evaluation and grid search for the text classifiers.

#ifndef RNSX_TRAIN_H_
#define RNSX_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rnsx/data.h"
#include "rnsx/encoders.h"
#include "rnsx/model.h"
#include "rnsx/optim.h"
#include "rnsx/tasks.h"

namespace rnsx {

enum class TaskKind { kSingle, kPair };

struct TrainConfig {
  EncoderConfig encoder;       // "encoder" object; dropout lives at top level
  std::size_t head_hidden = 0; // 0 = sentence vector width
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 0.0;  // 0 = optimizer default
  double dropout = 0.5;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 10;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;

  TaskKind task = TaskKind::kSingle;
  std::string train_file = "train.tsv";
  std::string dev_file;        // empty: sample validation_size from train
  std::string test_file = "test.tsv";
  std::size_t validation_size = 500;
  bool allow_empty_dev = false;
  std::vector<std::string> labels;  // empty: sorted labels of the training file
  VocabularyOptions vocabulary;     // "min_frequency", "lowercase"
  std::string embeddings_file;      // optional pretrained vectors

  // Grid axes: config keys (dotted for nested, e.g. "encoder.aggregation")
  // mapped to JSON-encoded candidate lists, in file order.
  std::vector<std::pair<std::string, std::string>> grid_axes;

  double effective_learning_rate() const;
  void Validate() const;
};

TrainConfig ParseTrainConfig(const std::string& json_text);
TrainConfig LoadTrainConfig(const std::string& path);
std::string TrainConfigToJson(const TrainConfig& c);

struct Dataset {
  LabelSet labels;
  std::vector<Example> train, dev, test;
  std::string embeddings_path;  // resolved against the data directory
};

// One corpus file of the configured task, with its "<stem>.conllu" trees
// attached when that file exists.
std::vector<Example> ReadCorpus(const TrainConfig& c, const std::string& path,
                                const LabelSet& labels);

// Reads train/dev/test from `data_dir` per the config. A "<stem>.conllu"
// next to a corpus file is attached as supervised trees.
Dataset LoadDataset(const TrainConfig& c, const std::string& data_dir);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
  double seconds = 0.0;
};

struct RunReport {
  std::string config_json;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_dev_accuracy = 0.0;
  std::string checkpoint;
  double test_accuracy = -1.0;  // -1 when there is no test set
  std::string predictions;      // test predictions TSV path
  double wall_seconds = 0.0;
  std::size_t parameters = 0;
  std::size_t embedding_hits = 0;
};

std::string RunReportToJson(const RunReport& r);
// Aligned per-epoch table plus a summary block.
std::string RunReportTable(const RunReport& r);

// Everything needed to rebuild a model: stored next to the parameters as
// "<checkpoint>.json".
struct LoadedModel {
  TrainConfig config;
  LabelSet labels;
  std::unique_ptr<Vocabulary> vocab;
  std::unique_ptr<ParameterStore> store;
  std::unique_ptr<TextClassifier> model;
};

void SaveModel(const std::string& path, const TrainConfig& c, const LabelSet& labels,
               const Vocabulary& vocab, const ParameterStore& store);
LoadedModel LoadModel(const std::string& path);

struct Evaluation {
  double accuracy = 0.0;
  std::vector<PredictionRow> rows;
};

Evaluation Evaluate(const TextClassifier& model, std::span<const Example> examples,
                    const Vocabulary& vocab, const LabelSet& labels, std::size_t batch_size = 64);

// Trains with dropout, evaluates dev each epoch without it, keeps the best
// dev checkpoint in out_dir (model.rnsx + model.rnsx.json), early-stops after
// `patience` epochs without improvement, then reloads the best checkpoint
// and scores the test set (test_predictions.tsv). A non-finite loss or
// gradient aborts with a numeric error naming the first bad operation.
RunReport Train(const TrainConfig& c, const Dataset& data, const std::string& out_dir);

struct GridResult {
  std::vector<std::string> cell_configs;  // JSON per cell, enumeration order
  std::vector<RunReport> reports;
  std::size_t best = 0;
};

// Cartesian product of the axes, last axis fastest. Each cell trains into
// out_dir/cell_<k>; the best dev accuracy wins, ties to the earlier cell.
GridResult GridSearch(const TrainConfig& c, const Dataset& data, const std::string& out_dir);
std::string GridResultToJson(const GridResult& g);
std::string GridResultTable(const GridResult& g);

// Master seed -> independent stream per purpose.
enum class SeedStream : std::uint64_t { kInit = 1, kDropout = 2, kSplit = 3, kShuffle = 4 };
std::uint64_t DeriveSeed(std::uint64_t master, SeedStream stream);

}  // namespace rnsx

#endif  // RNSX_TRAIN_H_
