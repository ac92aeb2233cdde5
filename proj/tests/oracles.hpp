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

// Independent reference computations used only by the tests. Nothing here
// calls into the code paths it is used to check.

#ifndef MELODY_TESTS_ORACLES_HPP_
#define MELODY_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "melody/note_sequence.hpp"

namespace melody::testing {

// Formula-generated parameter value shared with the numpy fixtures.
inline double param_value(int tag, int g, int r, int c) {
  long long k = 0;
  for (int i : {g, r, c}) k = k * 31 + i + 1;
  return 0.6 * std::sin(1.7 * static_cast<double>(k) + tag);
}

// O(n^2) pair count: ties between a positive and a negative count one half.
inline double brute_force_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double good = 0.0;
  long long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) good += 1.0;
      else if (scores[i] == scores[j]) good += 0.5;
    }
  }
  return good / static_cast<double>(pairs);
}

// Random monophonic melody: notes in [lo_pitch, hi_pitch], durations and
// gaps drawn in seconds, starting at `start`.
inline NoteSequence random_melody(std::mt19937_64& gen, int count, double min_dur, double max_dur,
                                  double max_gap, int lo_pitch = 21, int hi_pitch = 108) {
  std::uniform_int_distribution<int> pitch(lo_pitch, hi_pitch);
  std::uniform_real_distribution<double> dur(min_dur, max_dur);
  std::uniform_real_distribution<double> gap(0.0, max_gap);
  std::bernoulli_distribution abut(0.3);
  NoteSequence seq;
  double t = gap(gen);
  for (int i = 0; i < count; ++i) {
    const double d = dur(gen);
    seq.notes.push_back({pitch(gen), t, t + d, 64});
    t += d + (abut(gen) ? 0.0 : gap(gen));
  }
  return seq;
}

// Pairs the k-th note of each pitch in `a` with the k-th note of that pitch
// in `b` and returns every |boundary difference|. Returns an empty vector
// and sets ok = false when per-pitch note counts differ.
inline std::vector<double> matched_boundary_errors(const NoteSequence& a, const NoteSequence& b, bool& ok) {
  std::map<int, std::vector<Note>> pa, pb;
  for (const Note& n : a.notes) pa[n.pitch].push_back(n);
  for (const Note& n : b.notes) pb[n.pitch].push_back(n);
  ok = pa.size() == pb.size();
  std::vector<double> errors;
  for (auto& [pitch, notes] : pa) {
    auto& other = pb[pitch];
    if (other.size() != notes.size()) {
      ok = false;
      return {};
    }
    auto by_onset = [](const Note& x, const Note& y) { return x.onset < y.onset; };
    std::sort(notes.begin(), notes.end(), by_onset);
    std::sort(other.begin(), other.end(), by_onset);
    for (std::size_t k = 0; k < notes.size(); ++k) {
      errors.push_back(std::abs(notes[k].onset - other[k].onset));
      errors.push_back(std::abs(notes[k].offset - other[k].offset));
    }
  }
  return errors;
}

// Reference recurrent cells written straight from the gate equations with
// explicit per-gate matrices, row vector convention x * W.
struct GateMats {
  std::vector<std::vector<double>> w;  // [in][H]
  std::vector<std::vector<double>> u;  // [H][H]
  std::vector<double> b;               // [H]
};

inline std::vector<double> affine(const std::vector<double>& x, const std::vector<std::vector<double>>& w) {
  std::vector<double> y(w.empty() ? 0 : w[0].size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += x[i] * w[i][j];
  }
  return y;
}

inline double ref_sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

inline std::vector<double> gate_pre(const GateMats& g, const std::vector<double>& x, const std::vector<double>& rec) {
  auto a = affine(x, g.w);
  auto b = affine(rec, g.u);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] += b[j] + g.b[j];
  return a;
}

// gates: z, r, candidate
inline std::vector<double> ref_gru(const std::vector<GateMats>& gates, const std::vector<double>& x,
                                   const std::vector<double>& h) {
  auto z = gate_pre(gates[0], x, h);
  auto r = gate_pre(gates[1], x, h);
  for (double& v : z) v = ref_sigmoid(v);
  for (double& v : r) v = ref_sigmoid(v);
  std::vector<double> rh(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) rh[j] = r[j] * h[j];
  auto n = gate_pre(gates[2], x, rh);
  std::vector<double> out(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) out[j] = (1 - z[j]) * h[j] + z[j] * std::tanh(n[j]);
  return out;
}

// gates: i, f, g, o. Returns {h', c'}.
inline std::vector<std::vector<double>> ref_lstm(const std::vector<GateMats>& gates, const std::vector<double>& x,
                                                 const std::vector<double>& rec, const std::vector<double>& c) {
  auto i = gate_pre(gates[0], x, rec);
  auto f = gate_pre(gates[1], x, rec);
  auto g = gate_pre(gates[2], x, rec);
  auto o = gate_pre(gates[3], x, rec);
  std::vector<double> h2(c.size()), c2(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    c2[j] = ref_sigmoid(f[j]) * c[j] + ref_sigmoid(i[j]) * std::tanh(g[j]);
    h2[j] = ref_sigmoid(o[j]) * std::tanh(c2[j]);
  }
  return {h2, c2};
}

}  // namespace melody::testing

#endif  // MELODY_TESTS_ORACLES_HPP_
