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

#include "melody/performance.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "melody/error.hpp"

namespace melody {
namespace {

// Absorbs representation noise such as 2.85 * 100 = 284.99999999999997.
constexpr double kQuantizeEps = 1e-9;

long long quantize(double seconds, int steps_per_second) {
  return static_cast<long long>(std::floor(seconds * steps_per_second + 0.5 + kQuantizeEps));
}

void check_pitch(int pitch, const PerformanceConfig& cfg, Errc code) {
  if (pitch < cfg.min_pitch || pitch > cfg.max_pitch) {
    throw Error(code, "pitch " + std::to_string(pitch) + " outside [" + std::to_string(cfg.min_pitch) +
                          ", " + std::to_string(cfg.max_pitch) + "]");
  }
}

}  // namespace

void PerformanceConfig::validate() const {
  if (min_pitch < 0 || max_pitch > kMaxMidiValue || min_pitch > max_pitch) {
    throw Error(Errc::kBadConfig, "pitch range [" + std::to_string(min_pitch) + ", " +
                                      std::to_string(max_pitch) + "]");
  }
  if (steps_per_second < 1) throw Error(Errc::kBadConfig, "steps_per_second must be >= 1");
  if (num_velocity_bins < 0) throw Error(Errc::kBadConfig, "num_velocity_bins must be >= 0");
}

int vocab_size(const PerformanceConfig& cfg) {
  return 2 * cfg.pitch_count() + cfg.steps_per_second + cfg.num_velocity_bins + 2;
}

int event_to_id(const Event& e, const PerformanceConfig& cfg) {
  const int pitches = cfg.pitch_count();
  switch (e.kind) {
    case EventKind::kPad:
      return kPadId;
    case EventKind::kEos:
      return kEosId;
    case EventKind::kNoteOn:
      check_pitch(e.value, cfg, Errc::kValueOutOfRange);
      return 2 + (e.value - cfg.min_pitch);
    case EventKind::kNoteOff:
      check_pitch(e.value, cfg, Errc::kValueOutOfRange);
      return 2 + pitches + (e.value - cfg.min_pitch);
    case EventKind::kTimeShift:
      if (e.value < 1 || e.value > cfg.steps_per_second) {
        throw Error(Errc::kValueOutOfRange, "time shift " + std::to_string(e.value));
      }
      return 2 + 2 * pitches + (e.value - 1);
  }
  throw Error(Errc::kValueOutOfRange, "unknown event kind");
}

Event id_to_event(int id, const PerformanceConfig& cfg) {
  const int pitches = cfg.pitch_count();
  if (id < 0 || id >= 2 + 2 * pitches + cfg.steps_per_second) {
    throw Error(Errc::kIdOutOfVocab, "id " + std::to_string(id));
  }
  if (id == kPadId) return Event::pad();
  if (id == kEosId) return Event::eos();
  id -= 2;
  if (id < pitches) return Event::note_on(cfg.min_pitch + id);
  id -= pitches;
  if (id < pitches) return Event::note_off(cfg.min_pitch + id);
  id -= pitches;
  return Event::time_shift(id + 1);
}

EventSequence encode_events(const NoteSequence& seq, const PerformanceConfig& cfg) {
  cfg.validate();
  struct Timed {
    long long step;
    bool on;
    int pitch;
  };
  std::vector<Timed> timeline;
  timeline.reserve(seq.notes.size() * 2);
  for (const Note& n : seq.notes) {
    check_pitch(n.pitch, cfg, Errc::kPitchOutOfRange);
    const long long on = std::max(0LL, quantize(n.onset, cfg.steps_per_second));
    const long long off = std::max(on + 1, quantize(n.offset, cfg.steps_per_second));
    timeline.push_back({on, true, n.pitch});
    timeline.push_back({off, false, n.pitch});
  }
  std::stable_sort(timeline.begin(), timeline.end(), [](const Timed& a, const Timed& b) {
    return std::make_tuple(a.step, a.on) < std::make_tuple(b.step, b.on);
  });

  EventSequence out;
  long long clock = 0;
  for (const Timed& t : timeline) {
    for (long long gap = t.step - clock; gap > 0;) {
      const int chunk = static_cast<int>(std::min<long long>(gap, cfg.steps_per_second));
      out.ids.push_back(event_to_id(Event::time_shift(chunk), cfg));
      gap -= chunk;
    }
    clock = t.step;
    out.ids.push_back(event_to_id(t.on ? Event::note_on(t.pitch) : Event::note_off(t.pitch), cfg));
  }
  out.ids.push_back(kEosId);
  return out;
}

NoteSequence decode_events(const EventSequence& ev, const PerformanceConfig& cfg) {
  cfg.validate();
  const int vocab = vocab_size(cfg);
  const double step_seconds = 1.0 / cfg.steps_per_second;
  std::vector<std::deque<long long>> open(cfg.pitch_count());
  NoteSequence out;
  long long clock = 0;

  auto close = [&](int pitch, long long onset) {
    const long long offset = std::max(clock, onset + 1);
    out.notes.push_back({pitch, onset * step_seconds, offset * step_seconds, kDefaultVelocity});
  };

  for (int id : ev.ids) {
    if (id < 0 || id >= vocab) throw Error(Errc::kIdOutOfVocab, "id " + std::to_string(id));
    if (id >= vocab - cfg.num_velocity_bins) continue;  // velocity ids carry no timing
    const Event e = id_to_event(id, cfg);
    switch (e.kind) {
      case EventKind::kPad:
      case EventKind::kEos:
        break;
      case EventKind::kTimeShift:
        clock += e.value;
        break;
      case EventKind::kNoteOn:
        open[e.value - cfg.min_pitch].push_back(clock);
        break;
      case EventKind::kNoteOff: {
        auto& queue = open[e.value - cfg.min_pitch];
        if (!queue.empty()) {
          close(e.value, queue.front());
          queue.pop_front();
        }
        break;
      }
    }
  }
  for (int i = 0; i < cfg.pitch_count(); ++i) {
    for (long long onset : open[i]) close(cfg.min_pitch + i, onset);
  }
  return normalize(std::move(out));
}

std::vector<int> prepare_sequence(const EventSequence& ev, int max_len) {
  if (max_len < 1) throw Error(Errc::kBadConfig, "max_len must be >= 1");
  std::vector<int> out(ev.ids.begin(), ev.ids.begin() + std::min<std::size_t>(ev.ids.size(), max_len));
  out.resize(static_cast<std::size_t>(max_len), kPadId);
  return out;
}

void write_jsonl(std::ostream& out, const std::vector<EncodedSample>& samples) {
  for (const EncodedSample& s : samples) {
    nlohmann::json j = {{"id", s.id}, {"label", s.label}, {"steps_per_second", s.steps_per_second},
                        {"events", s.events}};
    out << j.dump() << '\n';
  }
}

std::vector<EncodedSample> read_jsonl(std::istream& in) {
  std::vector<EncodedSample> samples;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EncodedSample s;
      s.id = j.at("id").get<std::string>();
      s.label = j.at("label").get<int>();
      s.steps_per_second = j.at("steps_per_second").get<int>();
      s.events = j.at("events").get<std::vector<int>>();
      if (s.label != 0 && s.label != 1) throw std::invalid_argument("label must be 0 or 1");
      samples.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw Error(Errc::kBadFile, "JSONL line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return samples;
}

}  // namespace melody
