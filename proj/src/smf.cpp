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

#include "melody/smf.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <string>
#include <tuple>
#include <utility>

#include "melody/error.hpp"

namespace melody {
namespace {

constexpr std::uint8_t kMetaEndOfTrack = 0x2F;
constexpr std::uint8_t kMetaTempo = 0x51;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ >= bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint8_t peek() const {
    need(1);
    return bytes_[pos_];
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>((bytes_[pos_] << 8) | bytes_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }
  // MIDI variable-length quantity, at most four bytes.
  std::uint32_t varint() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if ((b & 0x80) == 0) return v;
    }
    throw Error(Errc::kBadVarint, "variable-length quantity longer than 4 bytes");
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  void skip(std::size_t n) { take(n); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Error(Errc::kTruncatedChunk, "unexpected end of data");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct RawNote {
  std::int64_t on_tick;
  std::int64_t off_tick;
  int pitch;
  int velocity;
};

struct TrackContent {
  std::vector<RawNote> notes;
  std::vector<std::pair<std::int64_t, std::uint32_t>> tempos;
};

TrackContent parse_track(std::span<const std::uint8_t> chunk) {
  TrackContent out;
  ByteReader r(chunk);
  std::int64_t tick = 0;
  std::uint8_t running = 0;
  // FIFO of (tick, velocity) per (channel, pitch).
  std::map<std::pair<int, int>, std::deque<std::pair<std::int64_t, int>>> open;

  while (!r.done()) {
    tick += r.varint();
    std::uint8_t status;
    if (r.peek() & 0x80) {
      status = r.u8();
    } else {
      if (running == 0) throw Error(Errc::kMalformedEvent, "data byte without running status");
      status = running;
    }

    if (status == 0xFF) {
      std::uint8_t type = r.u8();
      std::uint32_t len = r.varint();
      auto data = r.take(len);
      if (type == kMetaEndOfTrack) break;
      if (type == kMetaTempo && len == 3) {
        std::uint32_t us = (std::uint32_t{data[0]} << 16) | (std::uint32_t{data[1]} << 8) | data[2];
        if (us > 0) out.tempos.emplace_back(tick, us);
      }
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      r.skip(r.varint());
      continue;
    }
    if (status >= 0xF0) throw Error(Errc::kMalformedEvent, "system message inside track");

    running = status;
    const int kind = status & 0xF0;
    const int channel = status & 0x0F;
    const int data_len = (kind == 0xC0 || kind == 0xD0) ? 1 : 2;
    std::uint8_t d[2] = {0, 0};
    for (int i = 0; i < data_len; ++i) {
      d[i] = r.u8();
      if (d[i] & 0x80) throw Error(Errc::kMalformedEvent, "status byte where data byte expected");
    }
    if (kind == 0x90 && d[1] > 0) {
      open[{channel, d[0]}].emplace_back(tick, d[1]);
    } else if (kind == 0x80 || kind == 0x90) {
      auto it = open.find({channel, d[0]});
      if (it != open.end() && !it->second.empty()) {
        auto [on_tick, vel] = it->second.front();
        it->second.pop_front();
        out.notes.push_back({on_tick, tick, d[0], vel});
      }
    }
  }

  // Unterminated notes are closed at the track's final tick.
  for (auto& [key, queue] : open) {
    for (auto [on_tick, vel] : queue) out.notes.push_back({on_tick, tick, key.second, vel});
  }
  return out;
}

void append_varint(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[4];
  int n = 0;
  buf[n++] = v & 0x7F;
  while ((v >>= 7) != 0) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
  while (n > 0) out.push_back(buf[--n]);
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

}  // namespace

TempoMap::TempoMap(int ppq) : ppq_(ppq) { entries_.push_back({0, kDefaultMicrosPerQuarter}); }

TempoMap TempoMap::smpte(int frames_per_second, int ticks_per_frame) {
  TempoMap map(1);
  map.smpte_seconds_per_tick_ = 1.0 / (static_cast<double>(frames_per_second) * ticks_per_frame);
  return map;
}

void TempoMap::add(std::int64_t tick, std::uint32_t micros_per_quarter) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), tick,
                             [](const Entry& e, std::int64_t t) { return e.tick < t; });
  if (it != entries_.end() && it->tick == tick) {
    it->micros_per_quarter = micros_per_quarter;
  } else {
    entries_.insert(it, {tick, micros_per_quarter});
  }
}

double TempoMap::seconds_at(std::int64_t tick) const {
  if (smpte_seconds_per_tick_ > 0.0) return static_cast<double>(tick) * smpte_seconds_per_tick_;
  double seconds = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const std::int64_t begin = entries_[i].tick;
    if (tick <= begin) break;
    const std::int64_t end = (i + 1 < entries_.size()) ? std::min(tick, entries_[i + 1].tick) : tick;
    seconds += static_cast<double>(end - begin) * entries_[i].micros_per_quarter / (1e6 * ppq_);
  }
  return seconds;
}

NoteSequence parse_smf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || !std::equal(bytes.begin(), bytes.begin() + 4, "MThd")) {
    throw Error(Errc::kMalformedHeader, "missing MThd chunk");
  }
  ByteReader r(bytes);
  r.skip(4);
  const std::uint32_t header_len = r.u32();
  if (header_len < 6) throw Error(Errc::kMalformedHeader, "MThd length " + std::to_string(header_len));
  if (header_len > r.remaining()) throw Error(Errc::kTruncatedChunk, "MThd longer than file");
  ByteReader header(r.take(header_len));
  const std::uint16_t format = header.u16();
  const std::uint16_t ntracks = header.u16();
  const std::uint16_t division = header.u16();
  if (format > 1) throw Error(Errc::kUnsupportedFormat, "SMF format " + std::to_string(format));

  TempoMap tempo(1);
  if (division & 0x8000) {
    const int fps = -static_cast<std::int8_t>(division >> 8);
    const int tpf = division & 0xFF;
    if (fps <= 0 || tpf == 0) throw Error(Errc::kMalformedHeader, "bad SMPTE division");
    tempo = TempoMap::smpte(fps, tpf);
  } else {
    if (division == 0) throw Error(Errc::kMalformedHeader, "zero ticks per quarter");
    tempo = TempoMap(division);
  }

  std::vector<TrackContent> tracks;
  while (tracks.size() < ntracks) {
    if (r.remaining() < 8) throw Error(Errc::kTruncatedChunk, "missing track chunk");
    auto id = r.take(4);
    const std::uint32_t len = r.u32();
    if (len > r.remaining()) throw Error(Errc::kTruncatedChunk, "chunk length exceeds file size");
    auto body = r.take(len);
    if (std::equal(id.begin(), id.end(), "MTrk")) tracks.push_back(parse_track(body));
  }

  std::vector<std::pair<std::int64_t, std::uint32_t>> tempos;
  for (const auto& t : tracks) tempos.insert(tempos.end(), t.tempos.begin(), t.tempos.end());
  std::stable_sort(tempos.begin(), tempos.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto [tick, us] : tempos) tempo.add(tick, us);

  NoteSequence seq;
  for (const auto& t : tracks) {
    for (const RawNote& n : t.notes) {
      seq.notes.push_back({n.pitch, tempo.seconds_at(n.on_tick), tempo.seconds_at(n.off_tick), n.velocity});
    }
  }
  return normalize(std::move(seq));
}

std::vector<std::uint8_t> write_smf(const NoteSequence& seq) {
  constexpr double kTicksPerSecond = kWritePpq * 1e6 / kDefaultMicrosPerQuarter;

  struct Event {
    std::int64_t tick;
    bool on;
    int pitch;
  };
  std::vector<Event> events;
  events.reserve(seq.notes.size() * 2);
  for (const Note& n : seq.notes) {
    if (n.pitch < 0 || n.pitch > kMaxMidiValue) {
      throw Error(Errc::kPitchOutOfRange, "pitch " + std::to_string(n.pitch));
    }
    const std::int64_t on = std::max<std::int64_t>(0, std::llround(n.onset * kTicksPerSecond));
    const std::int64_t off = std::max<std::int64_t>(on + 1, std::llround(n.offset * kTicksPerSecond));
    events.push_back({on, true, n.pitch});
    events.push_back({off, false, n.pitch});
  }
  // Note-offs precede note-ons at the same tick.
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return std::make_tuple(a.tick, a.on) < std::make_tuple(b.tick, b.on);
  });

  std::vector<std::uint8_t> track;
  append_varint(track, 0);
  track.insert(track.end(), {0xFF, kMetaTempo, 0x03, 0x07, 0xA1, 0x20});
  std::int64_t last = 0;
  for (const Event& e : events) {
    if (e.tick - last > 0x0FFFFFFF) throw Error(Errc::kValueOutOfRange, "delta time exceeds 28 bits");
    append_varint(track, static_cast<std::uint32_t>(e.tick - last));
    last = e.tick;
    track.push_back(e.on ? 0x90 : 0x80);
    track.push_back(static_cast<std::uint8_t>(e.pitch));
    track.push_back(e.on ? kDefaultVelocity : 0x40);
  }
  append_varint(track, 0);
  track.insert(track.end(), {0xFF, kMetaEndOfTrack, 0x00});

  std::vector<std::uint8_t> out{'M', 'T', 'h', 'd'};
  append_u32(out, 6);
  append_u16(out, 0);
  append_u16(out, 1);
  append_u16(out, kWritePpq);
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  append_u32(out, static_cast<std::uint32_t>(track.size()));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

}  // namespace melody
