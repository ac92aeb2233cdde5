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

#ifndef MELODY_PERFORMANCE_HPP_
#define MELODY_PERFORMANCE_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "melody/note_sequence.hpp"

namespace melody {

inline constexpr int kPadId = 0;
inline constexpr int kEosId = 1;
inline constexpr int kDefaultMaxLen = 200;

struct PerformanceConfig {
  int min_pitch = 21;
  int max_pitch = 108;
  int steps_per_second = 100;
  int num_velocity_bins = 0;

  int pitch_count() const { return max_pitch - min_pitch + 1; }
  // Throws kBadConfig.
  void validate() const;

  friend bool operator==(const PerformanceConfig&, const PerformanceConfig&) = default;
};

enum class EventKind { kPad, kEos, kNoteOn, kNoteOff, kTimeShift };

struct Event {
  EventKind kind = EventKind::kPad;
  int value = 0;  // pitch for note events, step count for time shifts

  static Event pad() { return {EventKind::kPad, 0}; }
  static Event eos() { return {EventKind::kEos, 0}; }
  static Event note_on(int pitch) { return {EventKind::kNoteOn, pitch}; }
  static Event note_off(int pitch) { return {EventKind::kNoteOff, pitch}; }
  static Event time_shift(int steps) { return {EventKind::kTimeShift, steps}; }

  friend bool operator==(const Event&, const Event&) = default;
};

struct EventSequence {
  std::vector<int> ids;

  friend bool operator==(const EventSequence&, const EventSequence&) = default;
};

// 2 * pitch_count + steps_per_second + num_velocity_bins + 2.
int vocab_size(const PerformanceConfig& cfg);

// Id layout: PAD, EOS, NOTE_ON block, NOTE_OFF block, TIME_SHIFT(1..steps).
// Velocity ids, when configured, occupy the tail and have no Event form here.
int event_to_id(const Event& e, const PerformanceConfig& cfg);
Event id_to_event(int id, const PerformanceConfig& cfg);

// Quantizes to 1/steps_per_second (half up), emits NOTE_OFF before NOTE_ON at
// equal times, splits long gaps into TIME_SHIFT(steps_per_second) chunks and
// appends EOS. Notes quantized to zero length get one step.
EventSequence encode_events(const NoteSequence& seq, const PerformanceConfig& cfg);

// Replays the stream with a running clock. Unmatched NOTE_OFFs are dropped,
// unmatched NOTE_ONs close at stream end; every note lasts at least one step.
NoteSequence decode_events(const EventSequence& ev, const PerformanceConfig& cfg);

// Head-truncates or PAD-fills to exactly max_len ids.
std::vector<int> prepare_sequence(const EventSequence& ev, int max_len = kDefaultMaxLen);

// One line of the JSONL dataset interchange format.
struct EncodedSample {
  std::string id;
  int label = 0;
  int steps_per_second = 0;
  std::vector<int> events;

  friend bool operator==(const EncodedSample&, const EncodedSample&) = default;
};

void write_jsonl(std::ostream& out, const std::vector<EncodedSample>& samples);
// Throws kBadFile with the offending line number.
std::vector<EncodedSample> read_jsonl(std::istream& in);

}  // namespace melody

#endif  // MELODY_PERFORMANCE_HPP_
