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

#ifndef MELODY_NN_TENSOR_HPP_
#define MELODY_NN_TENSOR_HPP_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "melody/error.hpp"
#include "melody/random.hpp"

namespace melody::nn {

// A named, row-major parameter with its gradient accumulator.
template <typename T>
struct Param {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<T> value;
  std::vector<T> grad;

  Param() = default;
  Param(std::string n, std::vector<std::size_t> s) : name(std::move(n)), shape(std::move(s)) {
    const std::size_t count =
        std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    value.assign(count, T(0));
    grad.assign(count, T(0));
  }

  std::size_t size() const { return value.size(); }
  std::size_t rows() const { return shape.empty() ? 1 : shape.front(); }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

// Weights uniform in [-scale, scale); biases (rank-1 params) stay zero.
template <typename T>
void init_uniform(Param<T>& p, Rng& rng, double scale) {
  if (p.shape.size() < 2) return;
  for (T& v : p.value) v = static_cast<T>(rng.uniform(-scale, scale));
}

template <typename T>
void require(bool ok, const char* what) {
  if (!ok) throw Error(Errc::kShapeMismatch, what);
}

// Kernels below read W as [rows x ld] row-major and touch `n` columns
// starting at W. They fix the summation order so float results do not
// depend on optimization level (build with -ffp-contract=off).

// y[c] += sum_i x[i] * W[i, c]
template <typename T>
void gemv_acc(const T* x, std::size_t rows, const T* w, std::size_t ld, std::size_t n, T* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const T xi = x[i];
    const T* row = w + i * ld;
    for (std::size_t c = 0; c < n; ++c) y[c] += xi * row[c];
  }
}

// dx[i] += sum_c W[i, c] * dy[c], eight interleaved partial sums per row.
template <typename T>
void gemv_t_acc(const T* w, std::size_t ld, std::size_t rows, std::size_t n, const T* dy, T* dx) {
  constexpr std::size_t kLanes = 8;
  const std::size_t body = n - n % kLanes;
  for (std::size_t i = 0; i < rows; ++i) {
    const T* row = w + i * ld;
    T acc[kLanes] = {};
    for (std::size_t c = 0; c < body; c += kLanes) {
      for (std::size_t k = 0; k < kLanes; ++k) acc[k] += row[c + k] * dy[c + k];
    }
    T sum = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    for (std::size_t c = body; c < n; ++c) sum += row[c] * dy[c];
    dx[i] += sum;
  }
}

// dW[i, c] += x[i] * dy[c]
template <typename T>
void ger_acc(const T* x, std::size_t rows, const T* dy, std::size_t n, T* dw, std::size_t ld) {
  for (std::size_t i = 0; i < rows; ++i) {
    const T xi = x[i];
    T* row = dw + i * ld;
    for (std::size_t c = 0; c < n; ++c) row[c] += xi * dy[c];
  }
}

}  // namespace melody::nn

#endif  // MELODY_NN_TENSOR_HPP_
