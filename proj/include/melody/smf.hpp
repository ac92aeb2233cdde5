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

#ifndef MELODY_SMF_HPP_
#define MELODY_SMF_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "melody/note_sequence.hpp"

namespace melody {

inline constexpr int kWritePpq = 480;
inline constexpr std::uint32_t kDefaultMicrosPerQuarter = 500000;  // 120 BPM

// Piecewise-constant tempo over ticks. The first entry is always at tick 0.
class TempoMap {
 public:
  struct Entry {
    std::int64_t tick;
    std::uint32_t micros_per_quarter;
  };

  explicit TempoMap(int ppq);
  // SMPTE division: a fixed number of seconds per tick, tempo events ignored.
  static TempoMap smpte(int frames_per_second, int ticks_per_frame);

  // Later calls at the same tick replace earlier ones.
  void add(std::int64_t tick, std::uint32_t micros_per_quarter);
  double seconds_at(std::int64_t tick) const;

  int ppq() const { return ppq_; }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  int ppq_;
  double smpte_seconds_per_tick_ = 0.0;
  std::vector<Entry> entries_;
};

// Parses a format 0 or 1 Standard MIDI File. All tracks are merged and the
// result is normalized. Throws melody::Error on any malformed input.
NoteSequence parse_smf(std::span<const std::uint8_t> bytes);

// Format 0, one track, 480 ppq, a single 120 BPM tempo, velocity 64.
std::vector<std::uint8_t> write_smf(const NoteSequence& seq);

}  // namespace melody

#endif  // MELODY_SMF_HPP_
