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

#ifndef MELODY_NN_LAYERS_HPP_
#define MELODY_NN_LAYERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "melody/nn/cells.hpp"
#include "melody/nn/tensor.hpp"

namespace melody::nn {

enum class Mode { kTrain, kEval };

template <typename T>
void embedding_check(std::span<const int> ids, const Param<T>& table) {
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= table.rows()) {
      throw Error(Errc::kIdOutOfVocab, "id " + std::to_string(id) + " with vocab " + std::to_string(table.rows()));
    }
  }
}

// Row ids[t] of the [vocab x d] table for each t.
template <typename T>
std::vector<std::vector<T>> embedding_forward(std::span<const int> ids, const Param<T>& table) {
  embedding_check(ids, table);
  const std::size_t d = table.cols();
  std::vector<std::vector<T>> out;
  out.reserve(ids.size());
  for (int id : ids) {
    auto row = table.value.begin() + static_cast<std::ptrdiff_t>(id * d);
    out.emplace_back(row, row + static_cast<std::ptrdiff_t>(d));
  }
  return out;
}

template <typename T>
void embedding_backward(std::span<const int> ids, const std::vector<std::vector<T>>& upstream, Param<T>& table) {
  const std::size_t d = table.cols();
  for (std::size_t t = 0; t < ids.size(); ++t) {
    T* row = table.grad.data() + static_cast<std::size_t>(ids[t]) * d;
    for (std::size_t j = 0; j < d; ++j) row[j] += upstream[t][j];
  }
}

// Inverted dropout. The returned mask multiplies both the activation and,
// on the way back, its gradient. Eval mode and rate 0 draw nothing.
template <typename T>
std::vector<T> dropout_mask(std::size_t n, double rate, Mode mode, Rng& rng) {
  std::vector<T> mask(n, T(1));
  if (mode == Mode::kEval || rate <= 0.0) return mask;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  for (T& m : mask) m = rng.uniform() < rate ? T(0) : keep_scale;
  return mask;
}

template <typename T>
std::vector<T> dropout(std::span<const T> v, double rate, Mode mode, Rng& rng) {
  auto mask = dropout_mask<T>(v.size(), rate, mode, rng);
  for (std::size_t i = 0; i < v.size(); ++i) mask[i] *= v[i];
  return mask;
}

// score = sigmoid(w2 . relu(x W1 + b1) + b2)
template <typename T>
struct DenseHead {
  Param<T> w1, b1, w2, b2;

  DenseHead(std::size_t in, std::size_t hidden)
      : w1("head.W1", {in, hidden}), b1("head.b1", {hidden}), w2("head.W2", {hidden, 1}), b2("head.b2", {1}) {}

  std::size_t input() const { return w1.rows(); }
  std::size_t hidden() const { return w1.cols(); }
  std::vector<Param<T>*> params() { return {&w1, &b1, &w2, &b2}; }

  struct Cache {
    std::vector<T> x, act;  // act = relu output
    T logit = T(0);
    T score = T(0);
  };

  T forward(std::span<const T> x, Cache& cache) const {
    require<T>(x.size() == input(), "dense head input size");
    const std::size_t H = hidden();
    cache.x.assign(x.begin(), x.end());
    cache.act.assign(b1.value.begin(), b1.value.end());
    gemv_acc(x.data(), x.size(), w1.value.data(), H, H, cache.act.data());
    T logit = b2.value[0];
    for (std::size_t j = 0; j < H; ++j) {
      cache.act[j] = std::max(cache.act[j], T(0));
      logit += cache.act[j] * w2.value[j];
    }
    cache.logit = logit;
    cache.score = sigmoid(logit);
    return cache.score;
  }

  T forward(std::span<const T> x) const {
    Cache c;
    return forward(x, c);
  }

  // Takes d loss / d logit, returns d loss / d x.
  std::vector<T> backward(const Cache& cache, T dlogit) {
    const std::size_t H = hidden();
    b2.grad[0] += dlogit;
    std::vector<T> dact(H);
    for (std::size_t j = 0; j < H; ++j) {
      w2.grad[j] += cache.act[j] * dlogit;
      dact[j] = cache.act[j] > T(0) ? w2.value[j] * dlogit : T(0);
      b1.grad[j] += dact[j];
    }
    ger_acc(cache.x.data(), cache.x.size(), dact.data(), H, w1.grad.data(), H);
    std::vector<T> dx(cache.x.size(), T(0));
    gemv_t_acc(w1.value.data(), H, cache.x.size(), H, dact.data(), dx.data());
    return dx;
  }
};

inline constexpr double kBceEpsilon = 1e-7;

// Returns (loss, d loss / d score) with the score clamped to [eps, 1 - eps].
template <typename T>
std::pair<T, T> bce_loss(T score, int label) {
  const T eps = static_cast<T>(kBceEpsilon);
  const T p = std::clamp(score, eps, T(1) - eps);
  if (label == 1) return {-std::log(p), -T(1) / p};
  return {-std::log(T(1) - p), T(1) / (T(1) - p)};
}

// Bias-corrected Adam over a fixed list of parameters.
template <typename T>
class Adam {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  Adam(std::vector<Param<T>*> params, double lr) : params_(std::move(params)), lr_(lr) {
    for (const Param<T>* p : params_) {
      m_.emplace_back(p->size(), T(0));
      v_.emplace_back(p->size(), T(0));
    }
  }

  void step() {
    ++t_;
    const T b1 = static_cast<T>(kBeta1);
    const T b2 = static_cast<T>(kBeta2);
    const T correction1 = static_cast<T>(1.0 - std::pow(kBeta1, static_cast<double>(t_)));
    const T correction2 = static_cast<T>(1.0 - std::pow(kBeta2, static_cast<double>(t_)));
    const T lr = static_cast<T>(lr_);
    const T eps = static_cast<T>(kEpsilon);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Param<T>& p = *params_[k];
      require<T>(p.grad.size() == m_[k].size(), "parameter size changed under the optimizer");
      std::vector<T>& m = m_[k];
      std::vector<T>& v = v_[k];
      for (std::size_t i = 0; i < p.size(); ++i) {
        const T g = p.grad[i];
        m[i] = b1 * m[i] + (T(1) - b1) * g;
        v[i] = b2 * v[i] + (T(1) - b2) * g * g;
        const T m_hat = m[i] / correction1;
        const T v_hat = v[i] / correction2;
        p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
      }
    }
  }

  long long steps() const { return t_; }

 private:
  std::vector<Param<T>*> params_;
  double lr_;
  long long t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

}  // namespace melody::nn

#endif  // MELODY_NN_LAYERS_HPP_
