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

#ifndef MELODY_PIANOROLL_HPP_
#define MELODY_PIANOROLL_HPP_

#include <string>
#include <vector>

#include "melody/note_sequence.hpp"

namespace melody {

inline constexpr int kDefaultColFs = 8;

// One pitch per frame; 0 marks a rest.
struct PitchFrameVector {
  std::vector<int> frames;
  int col_fs = kDefaultColFs;

  friend bool operator==(const PitchFrameVector&, const PitchFrameVector&) = default;
};

// Frame f holds the pitch sounding at the frame center (f + 0.5) / col_fs,
// except that a final partial frame is sampled inside the part it covers.
// Throws kNotMonophonic for overlapping notes, kBadConfig for col_fs < 1.
PitchFrameVector encode_pianoroll(const NoteSequence& seq, int col_fs = kDefaultColFs);

bool contains_rest(const PitchFrameVector& v);

// "60,60,0,62" (no trailing newline).
std::string to_csv_line(const PitchFrameVector& v);

}  // namespace melody

#endif  // MELODY_PIANOROLL_HPP_
