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

#include "melody/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

#include "melody/error.hpp"
#include "melody/random.hpp"

namespace melody {
namespace {

constexpr int kSixteenthsPerBar = 16;
constexpr int kPhraseBars = 4;
constexpr int kScaleLow = 48;
constexpr int kScaleHigh = 84;
constexpr int kMaxScaleStep = 4;
constexpr int kUniformLow = 21;
constexpr int kUniformHigh = 108;
constexpr double kRestProbability = 0.1;
// Keeps jittered neighbours at least 2 ms apart.
constexpr double kJitterMarginSeconds = 0.001;

struct Slot {
  int start;  // in sixteenths
  int length;
  int pitch;  // 0 for a rest
};

std::vector<int> c_major_pitches() {
  static constexpr int kMajor[] = {0, 2, 4, 5, 7, 9, 11};
  std::vector<int> out;
  for (int p = kScaleLow; p <= kScaleHigh; ++p) {
    if (std::find(std::begin(kMajor), std::end(kMajor), p % 12) != std::end(kMajor)) out.push_back(p);
  }
  return out;
}

int draw_length(Rng& rng) {
  // Lengths in sixteenths with a lead-sheet-like bias toward 8ths and quarters.
  static constexpr std::pair<int, double> kLengths[] = {{1, 0.15}, {2, 0.35}, {3, 0.10},
                                                        {4, 0.25}, {6, 0.05}, {8, 0.10}};
  double u = rng.uniform();
  for (auto [len, weight] : kLengths) {
    if (u < weight) return len;
    u -= weight;
  }
  return 2;
}

class PitchWalk {
 public:
  PitchWalk(PitchModel model, Rng& rng) : model_(model), scale_(c_major_pitches()) {
    index_ = static_cast<int>(scale_.size() / 2) + rng.uniform_int(-3, 3);
  }

  int next(Rng& rng) {
    if (model_ == PitchModel::kUniformRandom) return rng.uniform_int(kUniformLow, kUniformHigh);
    index_ += rng.uniform_int(-kMaxScaleStep, kMaxScaleStep);
    const int top = static_cast<int>(scale_.size()) - 1;
    if (index_ < 0) index_ = -index_;
    if (index_ > top) index_ = 2 * top - index_;
    return scale_[static_cast<std::size_t>(index_)];
  }

 private:
  PitchModel model_;
  std::vector<int> scale_;
  int index_;
};

std::vector<Slot> fill_span(int begin, int end, PitchWalk& walk, Rng& rng) {
  std::vector<Slot> slots;
  for (int pos = begin; pos < end;) {
    const int len = std::min(draw_length(rng), end - pos);
    const bool rest = rng.uniform() < kRestProbability;
    const int pitch = walk.next(rng);
    slots.push_back({pos, len, rest ? 0 : pitch});
    pos += len;
  }
  return slots;
}

NoteSequence render(const ClassProfile& profile, const SynthSpec& spec, Rng& rng) {
  const int total = spec.bars * kSixteenthsPerBar;
  const int phrase = kPhraseBars * kSixteenthsPerBar;
  PitchWalk walk(profile.pitch_model, rng);

  std::vector<Slot> slots;
  std::vector<Slot> first_phrase;
  for (int start = 0, index = 0; start < total; start += phrase, ++index) {
    const int end = std::min(total, start + phrase);
    // Phrase form A B A C ...: the third phrase restates the first.
    if (profile.repeat_phrases && index % 4 == 2 && !first_phrase.empty()) {
      for (Slot s : first_phrase) {
        s.start += start;
        if (s.start >= end) break;
        s.length = std::min(s.length, end - s.start);
        slots.push_back(s);
      }
      continue;
    }
    auto fresh = fill_span(start, end, walk, rng);
    if (index == 0) first_phrase = fresh;
    slots.insert(slots.end(), fresh.begin(), fresh.end());
  }

  const double sixteenth = 60.0 / spec.tempo_qpm / 4.0;
  const double span_end = total * sixteenth;
  const double clip = sixteenth / 2.0 - kJitterMarginSeconds;
  std::map<int, double> boundary;
  auto time_of = [&](int grid) {
    auto [it, inserted] = boundary.try_emplace(grid, grid * sixteenth);
    if (inserted && !profile.grid.strict()) {
      const double delta = std::clamp(rng.normal(0.0, profile.grid.jitter_ms / 1000.0), -clip, clip);
      it->second = std::clamp(grid * sixteenth + delta, 0.0, span_end);
    }
    return it->second;
  };

  NoteSequence seq;
  for (const Slot& s : slots) {
    if (s.pitch == 0) continue;
    const double on = time_of(s.start);
    const double off = time_of(s.start + s.length);
    seq.notes.push_back({s.pitch, on, off, kDefaultVelocity});
  }
  return normalize(std::move(seq));
}

}  // namespace

void SynthSpec::validate() const {
  if (n_samples <= 0 || n_samples % 2 != 0) throw Error(Errc::kBadSpec, "n_samples must be positive and even");
  if (bars < 1) throw Error(Errc::kBadSpec, "bars must be >= 1");
  if (!(tempo_qpm > 0.0)) throw Error(Errc::kBadSpec, "tempo must be positive");
  for (const ClassProfile* p : {&class1, &class0}) {
    if (!(p->grid.jitter_ms >= 0.0)) throw Error(Errc::kBadSpec, "jitter sigma must be >= 0");
  }
}

SynthSpec SynthSpec::pitch_task(int n_samples, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_samples = n_samples;
  spec.seed = seed;
  spec.class1 = {PitchModel::kScaleStepwise, GridModel::strict_16th(), true};
  spec.class0 = {PitchModel::kUniformRandom, GridModel::strict_16th(), false};
  return spec;
}

SynthSpec SynthSpec::timing_task(int n_samples, std::uint64_t seed, double sigma_ms) {
  SynthSpec spec;
  spec.n_samples = n_samples;
  spec.seed = seed;
  spec.class1 = {PitchModel::kScaleStepwise, GridModel::strict_16th(), true};
  spec.class0 = {PitchModel::kScaleStepwise, GridModel::jitter(sigma_ms), true};
  return spec;
}

std::vector<LabeledNotes> generate(const SynthSpec& spec) {
  spec.validate();
  std::vector<LabeledNotes> out;
  out.reserve(static_cast<std::size_t>(spec.n_samples));
  for (int i = 0; i < spec.n_samples; ++i) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
    const int label = i % 2 == 0 ? 1 : 0;
    char id[32];
    std::snprintf(id, sizeof id, "synth_%05d", i);
    LabeledNotes sample{id, label, render(label == 1 ? spec.class1 : spec.class0, spec, rng)};
    sample.notes.source_id = id;
    out.push_back(std::move(sample));
  }
  return out;
}

SplitIndices stratified_split(std::span<const int> labels, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw Error(Errc::kBadConfig, "val_fraction must be in (0, 1)");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error(Errc::kBadConfig, "labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  SplitIndices out;
  for (int c = 0; c < 2; ++c) {
    auto& members = by_class[c];
    const auto n = static_cast<long long>(members.size());
    const long long n_val = std::llround(static_cast<double>(n) * val_fraction);
    if (n_val < 1 || n - n_val < 1) {
      throw Error(Errc::kSingleClassData, "class " + std::to_string(c) + " has " + std::to_string(n) +
                                              " samples; cannot place one on each side of the split");
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(members);
    out.val.insert(out.val.end(), members.begin(), members.begin() + n_val);
    out.train.insert(out.train.end(), members.begin() + n_val, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  return out;
}

}  // namespace melody
