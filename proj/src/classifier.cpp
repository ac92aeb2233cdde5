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

#include "melody/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "melody/error.hpp"
#include "melody/nn/float_env.hpp"
#include "melody/random.hpp"

namespace melody {
namespace {

// Stream ids under the run seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kDropoutStream = 3;
constexpr std::uint64_t kShuffleStreamBase = 1000;

void check_vocab(const std::vector<int>& ids, int vocab) {
  for (int id : ids) {
    if (id < 0 || id >= vocab) {
      throw Error(Errc::kVocabMismatch, "event id " + std::to_string(id) + " outside vocabulary of " +
                                            std::to_string(vocab));
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  performance().validate();
  model().validate();
  if (max_len < 1) throw Error(Errc::kBadConfig, "max_len must be >= 1");
  if (batch_size < 1) throw Error(Errc::kBadConfig, "batch_size must be >= 1");
  if (!(lr > 0.0)) throw Error(Errc::kBadConfig, "lr must be positive");
  if (!(val_split > 0.0 && val_split < 1.0)) throw Error(Errc::kBadConfig, "val_split must be in (0, 1)");
  if (checkpoint_epoch < 1 || epochs < checkpoint_epoch) {
    throw Error(Errc::kBadConfig, "need 1 <= checkpoint_epoch <= epochs");
  }
}

PerformanceConfig TrainConfig::performance() const {
  PerformanceConfig p;
  p.steps_per_second = steps_per_second;
  return p;
}

nn::ModelConfig TrainConfig::model() const {
  nn::ModelConfig m;
  m.vocab = vocab_size(performance());
  m.embed_dim = embed_dim;
  m.hidden = hidden;
  m.dense_hidden = dense_hidden;
  m.cell = cell;
  m.bidirectional = bidirectional;
  m.input_dropout = input_dropout;
  m.latent_dropout = latent_dropout;
  return m;
}

const Checkpoint& TrainRun::at_epoch(int epoch) const {
  if (epoch < 1 || static_cast<std::size_t>(epoch) > checkpoints.size()) {
    throw Error(Errc::kBadConfig, "no checkpoint for epoch " + std::to_string(epoch));
  }
  return checkpoints[static_cast<std::size_t>(epoch - 1)];
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(Errc::kShapeMismatch, "scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of positive ranks with ties sharing their mean rank; ranks are kept
  // doubled so everything stays integral.
  long long positives = 0;
  long long rank_sum_x2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const long long shared_x2 = static_cast<long long>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        ++positives;
        rank_sum_x2 += shared_x2;
      }
    }
    i = j;
  }
  const long long negatives = static_cast<long long>(scores.size()) - positives;
  if (positives == 0 || negatives == 0) throw Error(Errc::kSingleClassData, "AUC needs both classes");
  const long long u_x2 = rank_sum_x2 - positives * (positives + 1);
  return static_cast<double>(u_x2) / 2.0 / static_cast<double>(positives * negatives);
}

std::vector<double> predict(const Checkpoint& checkpoint, const std::vector<std::vector<int>>& sequences) {
  nn::FlushDenormals ftz;
  const int vocab = checkpoint.model.config().vocab;
  std::vector<double> scores;
  scores.reserve(sequences.size());
  for (const auto& seq : sequences) {
    check_vocab(seq, vocab);
    scores.push_back(checkpoint.model.score(prepare_sequence({seq}, checkpoint.max_len)));
  }
  return scores;
}

std::vector<double> predict(const Checkpoint& checkpoint, const std::vector<EncodedSample>& samples) {
  std::vector<std::vector<int>> sequences;
  sequences.reserve(samples.size());
  for (const EncodedSample& s : samples) {
    if (s.steps_per_second != checkpoint.performance.steps_per_second) {
      throw Error(Errc::kVocabMismatch, "sample '" + s.id + "' encoded at " + std::to_string(s.steps_per_second) +
                                            " steps/s, checkpoint expects " +
                                            std::to_string(checkpoint.performance.steps_per_second));
    }
    sequences.push_back(s.events);
  }
  return predict(checkpoint, sequences);
}

TrainRun train(const std::vector<EncodedSample>& data, const TrainConfig& cfg, const EpochObserver& observer) {
  cfg.validate();
  nn::FlushDenormals ftz;
  const PerformanceConfig perf = cfg.performance();
  const int vocab = vocab_size(perf);

  std::vector<int> labels;
  std::vector<std::vector<int>> inputs;
  labels.reserve(data.size());
  inputs.reserve(data.size());
  for (const EncodedSample& s : data) {
    if (s.steps_per_second != cfg.steps_per_second) {
      throw Error(Errc::kVocabMismatch, "sample '" + s.id + "' encoded at " + std::to_string(s.steps_per_second) +
                                            " steps/s, training at " + std::to_string(cfg.steps_per_second));
    }
    check_vocab(s.events, vocab);
    labels.push_back(s.label);
    inputs.push_back(prepare_sequence({s.events}, cfg.max_len));
  }
  const bool has_pos = std::count(labels.begin(), labels.end(), 1) > 0;
  const bool has_neg = std::count(labels.begin(), labels.end(), 0) > 0;
  if (!has_pos || !has_neg) throw Error(Errc::kSingleClassData, "training data needs both labels");

  TrainRun run;
  run.split = stratified_split(labels, cfg.val_split, derive_seed(cfg.seed, kSplitStream));

  nn::Classifier<float> model(cfg.model());
  Rng init_rng(derive_seed(cfg.seed, kInitStream));
  model.initialize(init_rng);
  nn::Adam<float> optimizer(model.params(), cfg.lr);
  Rng dropout_rng(derive_seed(cfg.seed, kDropoutStream));

  std::vector<double> seen_scores;
  std::vector<int> seen_labels;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = run.split.train;
    Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStreamBase + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    seen_scores.clear();
    seen_labels.clear();
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      const float scale = 1.0f / static_cast<float>(end - begin);
      model.zero_grad();
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t i = order[k];
        auto [score, loss] = model.accumulate_gradients(inputs[i], labels[i], nn::Mode::kTrain, dropout_rng, scale);
        loss_sum += loss;
        seen_scores.push_back(score);
        seen_labels.push_back(labels[i]);
      }
      optimizer.step();
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    record.train_auc = auc(seen_scores, seen_labels);

    std::vector<double> val_scores;
    std::vector<int> val_labels;
    double val_loss = 0.0;
    for (std::size_t i : run.split.val) {
      const float score = model.score(inputs[i]);
      val_loss += nn::bce_loss(score, labels[i]).first;
      val_scores.push_back(score);
      val_labels.push_back(labels[i]);
    }
    record.val_loss = val_loss / static_cast<double>(run.split.val.size());
    record.val_auc = auc(val_scores, val_labels);

    run.records.push_back(record);
    run.checkpoints.push_back(Checkpoint{epoch, perf, cfg.max_len, model});
    if (observer) observer(record, run.checkpoints.back());
  }
  return run;
}

std::vector<EncodedSample> encode_dataset(const std::vector<LabeledNotes>& source, const PerformanceConfig& cfg) {
  std::vector<EncodedSample> out;
  out.reserve(source.size());
  for (const LabeledNotes& s : source) {
    out.push_back({s.id, s.label, cfg.steps_per_second, encode_events(s.notes, cfg).ids});
  }
  return out;
}

std::vector<SweepEntry> sweep(const std::vector<LabeledNotes>& source, std::span<const int> steps,
                              const TrainConfig& base, const SweepObserver& observer) {
  if (steps.empty()) throw Error(Errc::kBadConfig, "sweep needs at least one steps_per_second value");
  std::vector<SweepEntry> entries;
  for (int s : steps) {
    TrainConfig cfg = base;
    cfg.steps_per_second = s;
    cfg.validate();
    const auto data = encode_dataset(source, cfg.performance());

    SweepEntry entry;
    entry.steps_per_second = s;
    entry.run = train(data, cfg);
    entry.selected_epoch = cfg.checkpoint_epoch;
    entry.selected_val_auc = entry.run.records[static_cast<std::size_t>(cfg.checkpoint_epoch - 1)].val_auc;
    const auto scores = predict(entry.run.at_epoch(cfg.checkpoint_epoch), data);
    for (std::size_t i = 0; i < data.size(); ++i) entry.predictions.emplace_back(data[i].id, scores[i]);
    if (observer) observer(entry);
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace melody
