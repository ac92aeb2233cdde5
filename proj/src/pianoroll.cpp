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

#include "melody/pianoroll.hpp"

#include <algorithm>
#include <cmath>

#include "melody/error.hpp"

namespace melody {

PitchFrameVector encode_pianoroll(const NoteSequence& seq, int col_fs) {
  if (col_fs < 1) throw Error(Errc::kBadConfig, "col_fs must be >= 1");
  if (!is_monophonic(seq)) throw Error(Errc::kNotMonophonic, "piano roll needs one pitch per frame");

  PitchFrameVector out;
  out.col_fs = col_fs;
  // The epsilon keeps 0.5 s * 8 from becoming 5 frames through rounding noise.
  const auto count = static_cast<std::size_t>(std::max(0.0, std::ceil(seq.end_time() * col_fs - 1e-9)));
  out.frames.assign(count, 0);

  // A trailing partial frame is sampled at the middle of its covered part;
  // its nominal center can lie past the last offset and would read as a rest.
  const double end = seq.end_time();
  std::size_t next = 0;
  for (std::size_t f = 0; f < count; ++f) {
    const double begin = static_cast<double>(f) / col_fs;
    const double center = std::min((static_cast<double>(f) + 0.5) / col_fs, 0.5 * (begin + end));
    while (next < seq.notes.size() && seq.notes[next].offset <= center) ++next;
    if (next < seq.notes.size() && seq.notes[next].onset <= center) out.frames[f] = seq.notes[next].pitch;
  }
  return out;
}

bool contains_rest(const PitchFrameVector& v) {
  return std::find(v.frames.begin(), v.frames.end(), 0) != v.frames.end();
}

std::string to_csv_line(const PitchFrameVector& v) {
  std::string line;
  for (std::size_t i = 0; i < v.frames.size(); ++i) {
    if (i > 0) line += ',';
    line += std::to_string(v.frames[i]);
  }
  return line;
}

}  // namespace melody
