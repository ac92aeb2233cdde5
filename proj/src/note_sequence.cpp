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

#include "melody/note_sequence.hpp"

#include <algorithm>
#include <tuple>

namespace melody {

double NoteSequence::end_time() const {
  double end = 0.0;
  for (const Note& n : notes) end = std::max(end, n.offset);
  return end;
}

NoteSequence normalize(NoteSequence seq) {
  std::erase_if(seq.notes, [](const Note& n) { return !(n.offset > n.onset); });
  // Offset and velocity participate only to make the order total.
  std::stable_sort(seq.notes.begin(), seq.notes.end(),
                   [](const Note& a, const Note& b) {
                     return std::tie(a.onset, a.pitch, a.offset, a.velocity) <
                            std::tie(b.onset, b.pitch, b.offset, b.velocity);
                   });
  return seq;
}

bool is_monophonic(const NoteSequence& seq) {
  // Sorted by onset, so overlap with any earlier note implies overlap with
  // the latest-ending one seen so far.
  double latest_end = -1.0;
  bool first = true;
  for (const Note& n : seq.notes) {
    if (!first && n.onset < latest_end) return false;
    latest_end = first ? n.offset : std::max(latest_end, n.offset);
    first = false;
  }
  return true;
}

}  // namespace melody
