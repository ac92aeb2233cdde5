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

#ifndef MELODY_NN_MODEL_HPP_
#define MELODY_NN_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "melody/nn/cells.hpp"
#include "melody/nn/layers.hpp"
#include "melody/nn/tensor.hpp"

namespace melody::nn {

struct ModelConfig {
  int vocab = 278;
  int embed_dim = 128;
  int hidden = 64;
  int dense_hidden = 32;
  CellKind cell = CellKind::kGru;
  bool bidirectional = true;
  double input_dropout = 0.2;
  double latent_dropout = 0.2;
  double init_scale = 0.05;

  void validate() const {
    if (vocab < 2 || embed_dim < 1 || hidden < 1 || dense_hidden < 1) {
      throw Error(Errc::kBadConfig, "model dimensions must be positive");
    }
    if (input_dropout < 0.0 || input_dropout >= 1.0 || latent_dropout < 0.0 || latent_dropout >= 1.0) {
      throw Error(Errc::kBadConfig, "dropout rate must be in [0, 1)");
    }
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// embedding -> input dropout -> (bi)recurrent encoder over non-PAD tokens ->
// latent dropout -> dense(relu) -> dense(sigmoid).
template <typename T>
class Classifier {
 public:
  explicit Classifier(const ModelConfig& cfg)
      : cfg_((cfg.validate(), cfg)),
        embedding_("embedding", {static_cast<std::size_t>(cfg.vocab), static_cast<std::size_t>(cfg.embed_dim)}),
        forward_(cfg.cell, cfg.embed_dim, cfg.hidden, "fwd"),
        head_(latent_size(cfg), cfg.dense_hidden) {
    if (cfg.bidirectional) backward_.emplace(cfg.cell, cfg.embed_dim, cfg.hidden, "bwd");
  }

  static std::size_t latent_size(const ModelConfig& cfg) {
    return static_cast<std::size_t>(cfg.hidden) * (cfg.bidirectional ? 2 : 1);
  }

  const ModelConfig& config() const { return cfg_; }
  std::size_t latent_size() const { return latent_size(cfg_); }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out{&embedding_};
    for (Param<T>* p : forward_.params()) out.push_back(p);
    if (backward_) {
      for (Param<T>* p : backward_->params()) out.push_back(p);
    }
    for (Param<T>* p : head_.params()) out.push_back(p);
    return out;
  }

  std::vector<const Param<T>*> params() const {
    auto mutable_params = const_cast<Classifier*>(this)->params();
    return {mutable_params.begin(), mutable_params.end()};
  }

  void initialize(Rng& rng) {
    for (Param<T>* p : params()) {
      std::fill(p->value.begin(), p->value.end(), T(0));
      init_uniform(*p, rng, cfg_.init_scale);
      p->zero_grad();
    }
  }

  void zero_grad() {
    for (Param<T>* p : params()) p->zero_grad();
  }

  Param<T>& embedding() { return embedding_; }
  CellParams<T>& forward_cell() { return forward_; }
  CellParams<T>* backward_cell() { return backward_ ? &*backward_ : nullptr; }
  DenseHead<T>& head() { return head_; }

  // Concatenated final states of both directions over the tokens with
  // mask[t] != 0. Throws kEmptySequence when no token is selected.
  std::vector<T> encode(std::span<const int> ids, std::span<const std::uint8_t> mask) const {
    require<T>(ids.size() == mask.size(), "ids and mask lengths differ");
    std::vector<int> real;
    for (std::size_t t = 0; t < ids.size(); ++t) {
      if (mask[t]) real.push_back(ids[t]);
    }
    Pass pass;
    Rng unused(0);
    run_encoder(real, Mode::kEval, unused, pass);
    return pass.latent;
  }

  // Eval-mode score; PAD ids are masked out.
  T score(std::span<const int> ids) const {
    Pass pass;
    Rng unused(0);
    return run(real_tokens(ids), Mode::kEval, unused, pass);
  }

  // Forward and backward for one labeled sample. Gradients are scaled by
  // grad_scale and accumulated. Returns (score, loss).
  std::pair<T, T> accumulate_gradients(std::span<const int> ids, int label, Mode mode, Rng& rng,
                                       T grad_scale) {
    Pass pass;
    const T score = run(real_tokens(ids), mode, rng, pass);
    auto [loss, dscore] = bce_loss(score, label);
    const T dlogit = dscore * score * (T(1) - score) * grad_scale;

    std::vector<T> dlatent = head_.backward(pass.head, dlogit);
    for (std::size_t j = 0; j < dlatent.size(); ++j) dlatent[j] *= pass.latent_mask[j];

    const std::size_t L = pass.ids.size();
    const std::size_t H = static_cast<std::size_t>(cfg_.hidden);
    std::vector<std::vector<T>> dx(L, std::vector<T>(static_cast<std::size_t>(cfg_.embed_dim), T(0)));
    std::vector<T*> dx_forward(L);
    for (std::size_t t = 0; t < L; ++t) dx_forward[t] = dx[t].data();
    backprop_sequence(forward_, pass.forward_tape, std::span<const T>(dlatent.data(), H), dx_forward);
    if (backward_) {
      std::vector<T*> dx_backward(L);
      for (std::size_t t = 0; t < L; ++t) dx_backward[t] = dx[L - 1 - t].data();
      backprop_sequence(*backward_, pass.backward_tape, std::span<const T>(dlatent.data() + H, H), dx_backward);
    }
    for (std::size_t t = 0; t < L; ++t) {
      for (std::size_t j = 0; j < dx[t].size(); ++j) dx[t][j] *= pass.input_masks[t][j];
    }
    embedding_backward<T>(pass.ids, dx, embedding_);
    return {score, loss};
  }

 private:
  struct Pass {
    std::vector<int> ids;
    std::vector<std::vector<T>> inputs;
    std::vector<std::vector<T>> input_masks;
    SequenceTape<T> forward_tape, backward_tape;
    std::vector<T> latent;  // before dropout
    std::vector<T> latent_mask;
    typename DenseHead<T>::Cache head;
  };

  static std::vector<int> real_tokens(std::span<const int> ids) {
    std::vector<int> real;
    real.reserve(ids.size());
    for (int id : ids) {
      if (id != 0) real.push_back(id);
    }
    return real;
  }

  void run_encoder(std::vector<int> ids, Mode mode, Rng& rng, Pass& pass) const {
    if (ids.empty()) throw Error(Errc::kEmptySequence, "no non-PAD tokens");
    pass.ids = std::move(ids);
    pass.inputs = embedding_forward<T>(pass.ids, embedding_);
    const std::size_t L = pass.ids.size();
    pass.input_masks.resize(L);
    std::vector<const T*> in_order(L), reversed(L);
    for (std::size_t t = 0; t < L; ++t) {
      pass.input_masks[t] = dropout_mask<T>(pass.inputs[t].size(), cfg_.input_dropout, mode, rng);
      for (std::size_t j = 0; j < pass.inputs[t].size(); ++j) pass.inputs[t][j] *= pass.input_masks[t][j];
      in_order[t] = pass.inputs[t].data();
      reversed[L - 1 - t] = pass.inputs[t].data();
    }
    run_sequence(forward_, in_order, pass.forward_tape);
    auto h = pass.forward_tape.final_state();
    pass.latent.assign(h.begin(), h.end());
    if (backward_) {
      run_sequence(*backward_, reversed, pass.backward_tape);
      auto hb = pass.backward_tape.final_state();
      pass.latent.insert(pass.latent.end(), hb.begin(), hb.end());
    }
  }

  T run(std::vector<int> ids, Mode mode, Rng& rng, Pass& pass) const {
    run_encoder(std::move(ids), mode, rng, pass);
    pass.latent_mask = dropout_mask<T>(pass.latent.size(), cfg_.latent_dropout, mode, rng);
    std::vector<T> dropped(pass.latent.size());
    for (std::size_t j = 0; j < dropped.size(); ++j) dropped[j] = pass.latent[j] * pass.latent_mask[j];
    return head_.forward(dropped, pass.head);
  }

  ModelConfig cfg_;
  Param<T> embedding_;
  CellParams<T> forward_;
  std::optional<CellParams<T>> backward_;
  DenseHead<T> head_;
};

}  // namespace melody::nn

#endif  // MELODY_NN_MODEL_HPP_
