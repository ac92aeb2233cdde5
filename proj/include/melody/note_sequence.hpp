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

#ifndef MELODY_NOTE_SEQUENCE_HPP_
#define MELODY_NOTE_SEQUENCE_HPP_

#include <string>
#include <vector>

namespace melody {

inline constexpr int kMaxMidiValue = 127;
inline constexpr int kDefaultVelocity = 64;

// A sounding note. Times are seconds from the start of the piece; every
// codec quantizes at its own boundary.
struct Note {
  int pitch = 60;
  double onset = 0.0;
  double offset = 0.0;
  int velocity = kDefaultVelocity;

  double duration() const { return offset - onset; }

  friend bool operator==(const Note&, const Note&) = default;
};

struct NoteSequence {
  std::vector<Note> notes;
  std::string source_id;

  bool empty() const { return notes.empty(); }
  // End of the last sounding note, 0 when empty.
  double end_time() const;

  friend bool operator==(const NoteSequence&, const NoteSequence&) = default;
};

// Sorts by (onset, pitch) and drops notes with non-positive duration.
NoteSequence normalize(NoteSequence seq);

// True iff no two notes of a normalized sequence have overlapping
// [onset, offset) intervals.
bool is_monophonic(const NoteSequence& seq);

}  // namespace melody

#endif  // MELODY_NOTE_SEQUENCE_HPP_
