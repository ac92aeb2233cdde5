// Copyright 2026 The melodyclf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MELODY_CLASSIFIER_HPP_
#define MELODY_CLASSIFIER_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "melody/dataset.hpp"
#include "melody/nn/model.hpp"
#include "melody/performance.hpp"

namespace melody {

struct TrainConfig {
  int steps_per_second = 100;
  nn::CellKind cell = nn::CellKind::kGru;
  bool bidirectional = true;
  int max_len = kDefaultMaxLen;
  int epochs = 50;
  double lr = 1e-4;
  double val_split = 0.2;
  int batch_size = 32;
  std::uint64_t seed = 0;
  int checkpoint_epoch = 10;

  int embed_dim = 128;
  int hidden = 64;
  int dense_hidden = 32;
  double input_dropout = 0.2;
  double latent_dropout = 0.2;

  // Throws kBadConfig.
  void validate() const;
  PerformanceConfig performance() const;
  nn::ModelConfig model() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_auc = 0.0;
  double val_loss = 0.0;
  double val_auc = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

// Self-describing model snapshot taken at the end of an epoch.
struct Checkpoint {
  int epoch = 0;
  PerformanceConfig performance;
  int max_len = kDefaultMaxLen;
  nn::Classifier<float> model;
};

struct TrainRun {
  std::vector<EpochRecord> records;
  std::vector<Checkpoint> checkpoints;  // checkpoints[e - 1] is epoch e
  SplitIndices split;

  const Checkpoint& at_epoch(int epoch) const;
};

// Called after each epoch, e.g. to persist the checkpoint.
using EpochObserver = std::function<void(const EpochRecord&, const Checkpoint&)>;

// Stratified split, then per epoch: seeded shuffle, mini-batches of
// batch_size with mean BCE, one Adam step per batch, validation pass.
// Training AUC uses the scores seen during the epoch.
TrainRun train(const std::vector<EncodedSample>& data, const TrainConfig& cfg, const EpochObserver& observer = {});

// Eval-mode scores; each sequence is truncated/padded to the checkpoint's
// max_len first. Throws kVocabMismatch for ids outside the vocabulary.
std::vector<double> predict(const Checkpoint& checkpoint, const std::vector<std::vector<int>>& sequences);
std::vector<double> predict(const Checkpoint& checkpoint, const std::vector<EncodedSample>& samples);

// Mann-Whitney AUC: fraction of (positive, negative) pairs ranked
// correctly, ties counting one half. Throws kSingleClassData.
double auc(std::span<const double> scores, std::span<const int> labels);

struct SweepEntry {
  int steps_per_second = 0;
  TrainRun run;
  int selected_epoch = 0;
  double selected_val_auc = 0.0;
  std::vector<std::pair<std::string, double>> predictions;  // (id, score) in source order
};

using SweepObserver = std::function<void(const SweepEntry&)>;

// Re-encodes the source at each resolution and trains with identical seed
// and settings. Predictions come from the checkpoint_epoch snapshot.
std::vector<SweepEntry> sweep(const std::vector<LabeledNotes>& source, std::span<const int> steps,
                              const TrainConfig& base, const SweepObserver& observer = {});

std::vector<EncodedSample> encode_dataset(const std::vector<LabeledNotes>& source, const PerformanceConfig& cfg);

}  // namespace melody

#endif  // MELODY_CLASSIFIER_HPP_
