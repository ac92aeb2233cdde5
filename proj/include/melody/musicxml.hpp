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

#ifndef MELODY_MUSICXML_HPP_
#define MELODY_MUSICXML_HPP_

#include <string_view>

#include "melody/note_sequence.hpp"

namespace melody {

inline constexpr int kDefaultBars = 16;
inline constexpr double kDefaultTempoQpm = 120.0;

// Position state while walking the measures of one part.
struct MeasureCursor {
  int divisions = 0;  // per quarter note; 0 until the first <divisions>
  double tempo_qpm = kDefaultTempoQpm;
  int measure_index = 0;
  long long position_div = 0;  // within the current measure
};

// Extracts a melody from an uncompressed score-partwise MusicXML document:
// first part, first voice, chords collapsed to their top note, ties merged,
// at most `max_bars` written measures. The result is normalized and
// monophonic. Compressed .mxl content is rejected with kCompressedMusicXml.
NoteSequence ingest_musicxml(std::string_view text, int max_bars = kDefaultBars);

}  // namespace melody

#endif  // MELODY_MUSICXML_HPP_
