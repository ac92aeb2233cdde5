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

#ifndef MELODY_DATASET_HPP_
#define MELODY_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "melody/note_sequence.hpp"

namespace melody {

enum class PitchModel {
  kScaleStepwise,  // C major in [48, 84], |interval| <= 4 scale steps
  kUniformRandom,  // uniform in [21, 108]
};

// strict_16th when jitter_ms == 0; otherwise every grid boundary moves by
// N(0, jitter_ms), clipped to keep boundaries ordered.
struct GridModel {
  double jitter_ms = 0.0;

  static GridModel strict_16th() { return {}; }
  static GridModel jitter(double sigma_ms) { return {sigma_ms}; }
  bool strict() const { return jitter_ms == 0.0; }
};

struct ClassProfile {
  PitchModel pitch_model = PitchModel::kScaleStepwise;
  GridModel grid;
  bool repeat_phrases = true;
};

struct SynthSpec {
  int n_samples = 1000;
  int bars = 16;
  double tempo_qpm = 120.0;
  ClassProfile class1;
  ClassProfile class0;
  std::uint64_t seed = 0;

  // Throws kBadSpec.
  void validate() const;

  // class 1 stepwise, class 0 uniform random pitches; both on the strict grid.
  static SynthSpec pitch_task(int n_samples, std::uint64_t seed);
  // Both stepwise; class 1 strict grid, class 0 jittered by sigma_ms.
  static SynthSpec timing_task(int n_samples, std::uint64_t seed, double sigma_ms = 30.0);
};

struct LabeledNotes {
  std::string id;
  int label = 0;
  NoteSequence notes;
};

// n_samples / 2 melodies per class, alternating labels 1, 0, 1, ...
// Sample i draws from its own stream seeded by (seed, i).
std::vector<LabeledNotes> generate(const SynthSpec& spec);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Stratified, seeded, disjoint and exhaustive. Each class contributes
// round(n_class * val_fraction) samples to validation; every class must
// keep at least one sample on each side, otherwise kSingleClassData.
SplitIndices stratified_split(std::span<const int> labels, double val_fraction, std::uint64_t seed);

}  // namespace melody

#endif  // MELODY_DATASET_HPP_
