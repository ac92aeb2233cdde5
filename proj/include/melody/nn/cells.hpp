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

#ifndef MELODY_NN_CELLS_HPP_
#define MELODY_NN_CELLS_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "melody/nn/tensor.hpp"

namespace melody::nn {

enum class CellKind { kLstm, kGru, kMlstm };

inline std::string_view cell_name(CellKind kind) {
  switch (kind) {
    case CellKind::kLstm: return "lstm";
    case CellKind::kGru: return "gru";
    case CellKind::kMlstm: return "mlstm";
  }
  return "?";
}

inline CellKind parse_cell(std::string_view name) {
  if (name == "lstm") return CellKind::kLstm;
  if (name == "gru") return CellKind::kGru;
  if (name == "mlstm") return CellKind::kMlstm;
  throw Error(Errc::kBadConfig, "unknown cell '" + std::string(name) + "'");
}

inline std::size_t gate_count(CellKind kind) { return kind == CellKind::kGru ? 3 : 4; }

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// Gate blocks are laid out side by side along the columns of W, U and b:
// GRU (z, r, candidate), LSTM and mLSTM (i, f, g, o). W is [input x G*H],
// U is [H x G*H]. mLSTM adds Wmx [input x H] and Wmh [H x H] for the
// multiplicative state m = (x Wmx) * (h Wmh), which replaces h in the gates.
template <typename T>
struct CellParams {
  CellKind kind;
  std::size_t input;
  std::size_t hidden;
  Param<T> w, u, b, wmx, wmh;

  CellParams(CellKind k, std::size_t in, std::size_t h, const std::string& prefix = "cell")
      : kind(k),
        input(in),
        hidden(h),
        w(prefix + ".W", {in, gate_count(k) * h}),
        u(prefix + ".U", {h, gate_count(k) * h}),
        b(prefix + ".b", {gate_count(k) * h}) {
    if (k == CellKind::kMlstm) {
      wmx = Param<T>(prefix + ".Wmx", {in, h});
      wmh = Param<T>(prefix + ".Wmh", {h, h});
    }
  }

  std::size_t width() const { return gate_count(kind) * hidden; }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out{&w, &u, &b};
    if (kind == CellKind::kMlstm) {
      out.push_back(&wmx);
      out.push_back(&wmh);
    }
    return out;
  }
};

// Everything one step needs for its backward pass.
template <typename T>
struct StepCache {
  std::vector<T> x, h_prev, c_prev, gates, rh, mx, mh, m, c, tanh_c, h;

  void resize(const CellParams<T>& p) {
    x.resize(p.input);
    h_prev.resize(p.hidden);
    c_prev.resize(p.hidden);
    gates.resize(p.width());
    h.resize(p.hidden);
    if (p.kind == CellKind::kGru) {
      rh.resize(p.hidden);
    } else {
      c.resize(p.hidden);
      tanh_c.resize(p.hidden);
    }
    if (p.kind == CellKind::kMlstm) {
      mx.resize(p.hidden);
      mh.resize(p.hidden);
      m.resize(p.hidden);
    }
  }
};

// Reads cache.x, cache.h_prev (and cache.c_prev); writes the rest.
template <typename T>
void cell_forward(const CellParams<T>& p, StepCache<T>& s) {
  const std::size_t H = p.hidden;
  const std::size_t G = p.width();
  T* pre = s.gates.data();
  std::copy(p.b.value.begin(), p.b.value.end(), pre);
  gemv_acc(s.x.data(), p.input, p.w.value.data(), G, G, pre);

  if (p.kind == CellKind::kGru) {
    gemv_acc(s.h_prev.data(), H, p.u.value.data(), G, 2 * H, pre);
    for (std::size_t j = 0; j < 2 * H; ++j) pre[j] = sigmoid(pre[j]);
    const T* z = pre;
    const T* r = pre + H;
    for (std::size_t j = 0; j < H; ++j) s.rh[j] = r[j] * s.h_prev[j];
    T* cand = pre + 2 * H;
    gemv_acc(s.rh.data(), H, p.u.value.data() + 2 * H, G, H, cand);
    for (std::size_t j = 0; j < H; ++j) {
      cand[j] = std::tanh(cand[j]);
      s.h[j] = (T(1) - z[j]) * s.h_prev[j] + z[j] * cand[j];
    }
    return;
  }

  const T* recurrent = s.h_prev.data();
  if (p.kind == CellKind::kMlstm) {
    std::fill(s.mx.begin(), s.mx.end(), T(0));
    std::fill(s.mh.begin(), s.mh.end(), T(0));
    gemv_acc(s.x.data(), p.input, p.wmx.value.data(), H, H, s.mx.data());
    gemv_acc(s.h_prev.data(), H, p.wmh.value.data(), H, H, s.mh.data());
    for (std::size_t j = 0; j < H; ++j) s.m[j] = s.mx[j] * s.mh[j];
    recurrent = s.m.data();
  }
  gemv_acc(recurrent, H, p.u.value.data(), G, G, pre);
  T* i = pre;
  T* f = pre + H;
  T* g = pre + 2 * H;
  T* o = pre + 3 * H;
  for (std::size_t j = 0; j < H; ++j) {
    i[j] = sigmoid(i[j]);
    f[j] = sigmoid(f[j]);
    g[j] = std::tanh(g[j]);
    o[j] = sigmoid(o[j]);
    s.c[j] = f[j] * s.c_prev[j] + i[j] * g[j];
    s.tanh_c[j] = std::tanh(s.c[j]);
    s.h[j] = o[j] * s.tanh_c[j];
  }
}

// Accumulates parameter gradients into p and input/state gradients into
// dx, dh_prev and dc_prev. dc and dc_prev are ignored for GRU.
template <typename T>
void cell_backward(CellParams<T>& p, const StepCache<T>& s, const T* dh, const T* dc, T* dx, T* dh_prev,
                   T* dc_prev, std::vector<T>& scratch) {
  const std::size_t H = p.hidden;
  const std::size_t G = p.width();
  scratch.assign(G + H, T(0));
  T* dpre = scratch.data();
  T* dtmp = scratch.data() + G;

  if (p.kind == CellKind::kGru) {
    const T* z = s.gates.data();
    const T* r = z + H;
    const T* cand = z + 2 * H;
    T* dz = dpre;
    T* dr = dpre + H;
    T* dcand = dpre + 2 * H;
    for (std::size_t j = 0; j < H; ++j) {
      dz[j] = dh[j] * (cand[j] - s.h_prev[j]) * z[j] * (T(1) - z[j]);
      dcand[j] = dh[j] * z[j] * (T(1) - cand[j] * cand[j]);
      dh_prev[j] += dh[j] * (T(1) - z[j]);
    }
    // Candidate path through r * h.
    ger_acc(s.rh.data(), H, dcand, H, p.u.grad.data() + 2 * H, G);
    gemv_t_acc(p.u.value.data() + 2 * H, G, H, H, dcand, dtmp);
    for (std::size_t j = 0; j < H; ++j) {
      dr[j] = dtmp[j] * s.h_prev[j] * r[j] * (T(1) - r[j]);
      dh_prev[j] += dtmp[j] * r[j];
    }
    ger_acc(s.h_prev.data(), H, dpre, 2 * H, p.u.grad.data(), G);
    gemv_t_acc(p.u.value.data(), G, H, 2 * H, dpre, dh_prev);
  } else {
    const T* i = s.gates.data();
    const T* f = i + H;
    const T* g = i + 2 * H;
    const T* o = i + 3 * H;
    for (std::size_t j = 0; j < H; ++j) {
      const T dcell = (dc ? dc[j] : T(0)) + dh[j] * o[j] * (T(1) - s.tanh_c[j] * s.tanh_c[j]);
      dpre[j] = dcell * g[j] * i[j] * (T(1) - i[j]);
      dpre[H + j] = dcell * s.c_prev[j] * f[j] * (T(1) - f[j]);
      dpre[2 * H + j] = dcell * i[j] * (T(1) - g[j] * g[j]);
      dpre[3 * H + j] = dh[j] * s.tanh_c[j] * o[j] * (T(1) - o[j]);
      dc_prev[j] += dcell * f[j];
    }
    if (p.kind == CellKind::kLstm) {
      ger_acc(s.h_prev.data(), H, dpre, G, p.u.grad.data(), G);
      gemv_t_acc(p.u.value.data(), G, H, G, dpre, dh_prev);
    } else {
      ger_acc(s.m.data(), H, dpre, G, p.u.grad.data(), G);
      gemv_t_acc(p.u.value.data(), G, H, G, dpre, dtmp);  // dm
      std::vector<T> dmx(H), dmh(H);
      for (std::size_t j = 0; j < H; ++j) {
        dmx[j] = dtmp[j] * s.mh[j];
        dmh[j] = dtmp[j] * s.mx[j];
      }
      ger_acc(s.x.data(), p.input, dmx.data(), H, p.wmx.grad.data(), H);
      ger_acc(s.h_prev.data(), H, dmh.data(), H, p.wmh.grad.data(), H);
      gemv_t_acc(p.wmx.value.data(), H, p.input, H, dmx.data(), dx);
      gemv_t_acc(p.wmh.value.data(), H, H, H, dmh.data(), dh_prev);
    }
  }

  for (std::size_t j = 0; j < G; ++j) p.b.grad[j] += dpre[j];
  ger_acc(s.x.data(), p.input, dpre, G, p.w.grad.data(), G);
  gemv_t_acc(p.w.value.data(), G, p.input, G, dpre, dx);
}

namespace detail {

template <typename T>
StepCache<T> single_step(const CellParams<T>& p, CellKind expected, std::span<const T> x, std::span<const T> h,
                         std::span<const T> c) {
  require<T>(p.kind == expected, "cell kind does not match step function");
  require<T>(x.size() == p.input, "input size");
  require<T>(h.size() == p.hidden, "state size");
  require<T>(c.empty() || c.size() == p.hidden, "cell state size");
  StepCache<T> s;
  s.resize(p);
  std::copy(x.begin(), x.end(), s.x.begin());
  std::copy(h.begin(), h.end(), s.h_prev.begin());
  std::copy(c.begin(), c.end(), s.c_prev.begin());
  cell_forward(p, s);
  return s;
}

}  // namespace detail

// z = s(x Wz + h Uz + bz), r = s(x Wr + h Ur + br),
// n = tanh(x Wn + (r*h) Un + bn), h' = (1 - z) * h + z * n
template <typename T>
std::vector<T> gru_step(const CellParams<T>& p, std::span<const T> x, std::span<const T> h) {
  return detail::single_step(p, CellKind::kGru, x, h, {}).h;
}

// Returns (h', c').
template <typename T>
std::pair<std::vector<T>, std::vector<T>> lstm_step(const CellParams<T>& p, std::span<const T> x,
                                                    std::span<const T> h, std::span<const T> c) {
  auto s = detail::single_step(p, CellKind::kLstm, x, h, c);
  return {std::move(s.h), std::move(s.c)};
}

template <typename T>
std::pair<std::vector<T>, std::vector<T>> mlstm_step(const CellParams<T>& p, std::span<const T> x,
                                                     std::span<const T> h, std::span<const T> c) {
  auto s = detail::single_step(p, CellKind::kMlstm, x, h, c);
  return {std::move(s.h), std::move(s.c)};
}

// Unrolled run of one direction over a sequence, starting from zero state.
template <typename T>
struct SequenceTape {
  std::vector<StepCache<T>> steps;
  std::size_t length = 0;

  std::span<const T> final_state() const { return steps[length - 1].h; }
};

template <typename T>
void run_sequence(const CellParams<T>& p, const std::vector<const T*>& inputs, SequenceTape<T>& tape) {
  require<T>(!inputs.empty(), "empty sequence");
  tape.length = inputs.size();
  if (tape.steps.size() < tape.length) tape.steps.resize(tape.length);
  for (std::size_t t = 0; t < tape.length; ++t) {
    StepCache<T>& s = tape.steps[t];
    s.resize(p);
    std::copy(inputs[t], inputs[t] + p.input, s.x.begin());
    if (t == 0) {
      std::fill(s.h_prev.begin(), s.h_prev.end(), T(0));
      std::fill(s.c_prev.begin(), s.c_prev.end(), T(0));
    } else {
      const StepCache<T>& prev = tape.steps[t - 1];
      std::copy(prev.h.begin(), prev.h.end(), s.h_prev.begin());
      if (p.kind == CellKind::kGru) {
        std::fill(s.c_prev.begin(), s.c_prev.end(), T(0));
      } else {
        std::copy(prev.c.begin(), prev.c.end(), s.c_prev.begin());
      }
    }
    cell_forward(p, s);
  }
}

// BPTT from a gradient on the final state; dx[t] receives d loss / d x_t.
template <typename T>
void backprop_sequence(CellParams<T>& p, const SequenceTape<T>& tape, std::span<const T> dh_final,
                       const std::vector<T*>& dx) {
  const std::size_t H = p.hidden;
  std::vector<T> dh(dh_final.begin(), dh_final.end());
  std::vector<T> dc(H, T(0));
  std::vector<T> dh_prev(H), dc_prev(H), scratch;
  for (std::size_t t = tape.length; t-- > 0;) {
    std::fill(dh_prev.begin(), dh_prev.end(), T(0));
    std::fill(dc_prev.begin(), dc_prev.end(), T(0));
    cell_backward(p, tape.steps[t], dh.data(), dc.data(), dx[t], dh_prev.data(), dc_prev.data(), scratch);
    dh.swap(dh_prev);
    dc.swap(dc_prev);
  }
}

}  // namespace melody::nn

#endif  // MELODY_NN_CELLS_HPP_
