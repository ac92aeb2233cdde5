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

#include "melody/error.hpp"

namespace melody {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kMalformedHeader: return "MalformedHeader";
    case Errc::kUnsupportedFormat: return "UnsupportedFormat";
    case Errc::kTruncatedChunk: return "TruncatedChunk";
    case Errc::kBadVarint: return "BadVarint";
    case Errc::kMalformedEvent: return "MalformedEvent";
    case Errc::kPitchOutOfRange: return "PitchOutOfRange";
    case Errc::kNotPartwise: return "NotPartwise";
    case Errc::kNoParts: return "NoParts";
    case Errc::kBadDivisions: return "BadDivisions";
    case Errc::kUnparseableXml: return "UnparseableXml";
    case Errc::kCompressedMusicXml: return "CompressedMusicXml";
    case Errc::kNotMonophonic: return "NotMonophonic";
    case Errc::kValueOutOfRange: return "ValueOutOfRange";
    case Errc::kIdOutOfVocab: return "IdOutOfVocab";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kEmptySequence: return "EmptySequence";
    case Errc::kSingleClassData: return "SingleClassData";
    case Errc::kVocabMismatch: return "VocabMismatch";
    case Errc::kBadConfig: return "BadConfig";
    case Errc::kBadSpec: return "BadSpec";
    case Errc::kBadFile: return "BadFile";
  }
  return "Unknown";
}

}  // namespace melody
