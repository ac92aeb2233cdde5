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

#include "melody/musicxml.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "melody/error.hpp"

namespace melody {
namespace {

using boost::property_tree::ptree;

constexpr double kTimeEps = 1e-9;
constexpr int kMaxNesting = 512;

std::optional<long long> to_integer(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> to_real(const std::string& s) {
  std::istringstream in(s);
  double v = 0.0;
  if (!(in >> v) || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string attribute(const ptree& node, const char* name) {
  if (auto attrs = node.get_child_optional("<xmlattr>")) {
    if (auto v = attrs->get_optional<std::string>(name)) return *v;
  }
  return {};
}

bool has_child(const ptree& node, const char* name) { return node.find(name) != node.not_found(); }

// rapidxml recurses per element; refuse pathological nesting up front.
void check_nesting(std::string_view text) {
  int depth = 0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] != '<') continue;
    const char next = text[i + 1];
    if (next == '/') {
      --depth;
    } else if (next != '!' && next != '?') {
      if (++depth > kMaxNesting) throw Error(Errc::kUnparseableXml, "element nesting too deep");
    }
  }
}

int step_semitone(char step) {
  switch (step) {
    case 'C': return 0;
    case 'D': return 2;
    case 'E': return 4;
    case 'F': return 5;
    case 'G': return 7;
    case 'A': return 9;
    case 'B': return 11;
    default: return -1;
  }
}

std::optional<int> midi_pitch(const ptree& pitch) {
  const std::string step = pitch.get<std::string>("step", "");
  const auto octave = to_integer(pitch.get<std::string>("octave", ""));
  if (step.empty() || !octave || *octave < -1 || *octave > 9) return std::nullopt;
  const int semitone = step_semitone(step.front());
  if (semitone < 0) return std::nullopt;
  double alter = 0.0;
  if (auto a = pitch.get_optional<std::string>("alter")) alter = to_real(*a).value_or(0.0);
  const long long midi = (*octave + 1) * 12 + semitone + std::lround(alter);
  if (midi < 0 || midi > kMaxMidiValue) return std::nullopt;
  return static_cast<int>(midi);
}

std::pair<bool, bool> tie_flags(const ptree& note) {
  bool start = false;
  bool stop = false;
  auto scan = [&](const ptree& parent, const char* tag) {
    for (const auto& [name, child] : parent) {
      if (name != tag) continue;
      const std::string type = attribute(child, "type");
      start |= type == "start";
      stop |= type == "stop";
    }
  };
  scan(note, "tie");
  for (const auto& [name, child] : note) {
    if (name == "notations") scan(child, "tied");
  }
  return {start, stop};
}

std::optional<double> direction_tempo(const ptree& direction) {
  if (auto sound = direction.get_child_optional("sound")) {
    if (auto t = to_real(attribute(*sound, "tempo")); t && *t > 0) return t;
  }
  for (const auto& [name, type] : direction) {
    if (name != "direction-type") continue;
    auto metronome = type.get_child_optional("metronome");
    if (!metronome) continue;
    auto per_minute = to_real(metronome->get<std::string>("per-minute", ""));
    if (!per_minute || *per_minute <= 0) continue;
    const std::string unit = metronome->get<std::string>("beat-unit", "quarter");
    double quarters = 1.0;
    if (unit == "whole") quarters = 4.0;
    else if (unit == "half") quarters = 2.0;
    else if (unit == "eighth") quarters = 0.5;
    else if (unit == "16th") quarters = 0.25;
    if (has_child(*metronome, "beat-unit-dot")) quarters *= 1.5;
    return *per_minute * quarters;
  }
  return std::nullopt;
}

struct PendingNote {
  int pitch;
  double onset_q;  // quarter notes from the start
  double offset_q;
  bool tie_open;
};

class TempoTrack {
 public:
  void set(double at_q, double qpm) {
    if (!changes_.empty() && std::abs(changes_.back().first - at_q) < kTimeEps) {
      changes_.back().second = qpm;
    } else if (changes_.empty() || at_q > changes_.back().first) {
      changes_.emplace_back(at_q, qpm);
    }
  }

  double seconds(double q) const {
    double s = 0.0;
    for (std::size_t i = 0; i < changes_.size(); ++i) {
      const double begin = changes_[i].first;
      if (q <= begin) break;
      const double end = i + 1 < changes_.size() ? std::min(q, changes_[i + 1].first) : q;
      s += (end - begin) * 60.0 / changes_[i].second;
    }
    return s;
  }

 private:
  std::vector<std::pair<double, double>> changes_{{0.0, kDefaultTempoQpm}};
};

}  // namespace

NoteSequence ingest_musicxml(std::string_view text, int max_bars) {
  if (max_bars < 1) throw Error(Errc::kBadConfig, "max_bars must be >= 1");
  if (text.size() >= 2 && text[0] == 'P' && text[1] == 'K') {
    throw Error(Errc::kCompressedMusicXml,
                "compressed .mxl archives are not supported; unzip to uncompressed MusicXML first");
  }
  check_nesting(text);

  ptree doc;
  try {
    std::istringstream in{std::string(text)};
    boost::property_tree::read_xml(in, doc, boost::property_tree::xml_parser::no_comments);
  } catch (const std::exception& e) {
    throw Error(Errc::kUnparseableXml, e.what());
  }

  const ptree* score = nullptr;
  for (const auto& [name, child] : doc) {
    if (name.empty() || name.front() == '<') continue;
    if (name != "score-partwise") throw Error(Errc::kNotPartwise, "root element <" + name + ">");
    score = &child;
    break;
  }
  if (score == nullptr) throw Error(Errc::kUnparseableXml, "no root element");
  auto part_it = score->find("part");
  if (part_it == score->not_found()) throw Error(Errc::kNoParts, "score-partwise has no <part>");
  const ptree& part = part_it->second;

  MeasureCursor cursor;
  TempoTrack tempo;
  std::vector<PendingNote> notes;
  std::optional<std::string> melody_voice;
  double measure_start_q = 0.0;

  for (const auto& [mname, measure] : part) {
    if (mname != "measure") continue;
    if (cursor.measure_index >= max_bars) break;
    cursor.position_div = 0;
    double pos_q = measure_start_q;
    double measure_end_q = measure_start_q;
    double last_onset_q = measure_start_q;
    bool last_note_melodic = false;

    auto advance = [&](long long div) {
      pos_q = std::max(measure_start_q, pos_q + static_cast<double>(div) / cursor.divisions);
      cursor.position_div = std::max(0LL, cursor.position_div + div);
      measure_end_q = std::max(measure_end_q, pos_q);
    };
    auto duration_of = [&](const ptree& node) -> long long {
      if (cursor.divisions <= 0) throw Error(Errc::kBadDivisions, "duration before <divisions>");
      return std::max(0LL, to_integer(node.get<std::string>("duration", "")).value_or(0));
    };

    for (const auto& [ename, elem] : measure) {
      if (ename == "attributes") {
        if (auto d = elem.get_optional<std::string>("divisions")) {
          auto v = to_integer(*d);
          if (!v || *v <= 0 || *v > 1'000'000'000) throw Error(Errc::kBadDivisions, "divisions '" + *d + "'");
          cursor.divisions = static_cast<int>(*v);
        }
      } else if (ename == "direction") {
        if (auto t = direction_tempo(elem)) {
          cursor.tempo_qpm = *t;
          tempo.set(pos_q, *t);
        }
      } else if (ename == "sound") {
        if (auto t = to_real(attribute(elem, "tempo")); t && *t > 0) {
          cursor.tempo_qpm = *t;
          tempo.set(pos_q, *t);
        }
      } else if (ename == "backup") {
        advance(-duration_of(elem));
      } else if (ename == "forward") {
        advance(duration_of(elem));
      } else if (ename == "note") {
        if (has_child(elem, "grace")) continue;
        const bool chord = has_child(elem, "chord");
        const long long dur = duration_of(elem);
        const double dur_q = static_cast<double>(dur) / cursor.divisions;
        const double onset_q = chord ? last_onset_q : pos_q;
        if (!chord) {
          last_onset_q = onset_q;
          last_note_melodic = false;
          advance(dur);
        }
        if (has_child(elem, "rest")) continue;
        auto pitch_node = elem.get_child_optional("pitch");
        if (!pitch_node) continue;
        const std::string voice = elem.get<std::string>("voice", "1");
        if (!melody_voice) melody_voice = voice;
        if (voice != *melody_voice) continue;
        auto pitch = midi_pitch(*pitch_node);
        if (!pitch || dur_q <= 0.0) continue;
        auto [tie_start, tie_stop] = tie_flags(elem);

        if (chord) {
          if (last_note_melodic && !notes.empty() && *pitch > notes.back().pitch) {
            notes.back().pitch = *pitch;
          }
          continue;
        }
        last_note_melodic = true;
        if (tie_stop) {
          auto open = std::find_if(notes.rbegin(), notes.rend(), [&](const PendingNote& n) {
            return n.tie_open && n.pitch == *pitch && std::abs(n.offset_q - onset_q) < kTimeEps;
          });
          if (open != notes.rend()) {
            open->offset_q = onset_q + dur_q;
            open->tie_open = tie_start;
            // Keep the merged note last so a following chord tone attaches to it.
            std::rotate(open.base() - 1, open.base(), notes.end());
            continue;
          }
        }
        notes.push_back({*pitch, onset_q, onset_q + dur_q, tie_start});
      }
    }
    measure_start_q = measure_end_q;
    ++cursor.measure_index;
  }

  NoteSequence seq;
  for (const PendingNote& n : notes) {
    seq.notes.push_back({n.pitch, tempo.seconds(n.onset_q), tempo.seconds(n.offset_q), kDefaultVelocity});
  }
  seq = normalize(std::move(seq));

  // Overlaps (backup within the melody voice, odd ties) truncate the earlier note.
  std::vector<Note> mono;
  mono.reserve(seq.notes.size());
  for (const Note& n : seq.notes) {
    while (!mono.empty() && mono.back().offset > n.onset) {
      mono.back().offset = n.onset;
      if (!(mono.back().offset > mono.back().onset)) {
        mono.pop_back();
      } else {
        break;
      }
    }
    mono.push_back(n);
  }
  seq.notes = std::move(mono);
  return seq;
}

}  // namespace melody
