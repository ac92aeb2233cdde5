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


// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Long-running; registered in ctest as "acceptance".

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "melody/classifier.hpp"
#include "melody/dataset.hpp"
#include "melody/error.hpp"
#include "melody/musicxml.hpp"
#include "melody/note_sequence.hpp"
#include "melody/performance.hpp"
#include "melody/pianoroll.hpp"
#include "melody/smf.hpp"
#include "oracles.hpp"
#include "xml_builder.hpp"

namespace melody {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  std::string name;
  double limit_s;
  std::function<Outcome()> body;
};

PerformanceConfig steps_cfg(int steps) {
  PerformanceConfig cfg;
  cfg.steps_per_second = steps;
  return cfg;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// Shared corpus for the round-trip and coarse-quantization criteria.
std::vector<NoteSequence> codec_corpus() {
  std::mt19937_64 gen(2020);
  std::vector<NoteSequence> corpus;
  for (int i = 0; i < 1000; ++i) {
    corpus.push_back(normalize(testing::random_melody(gen, 1 + i % 60, 0.01, 3.0, 4.0)));
  }
  return corpus;
}

Outcome vocabulary_law() {
  const std::map<int, int> expected = {{100, 278}, {50, 228}, {20, 198}, {10, 188}, {5, 183}, {2, 180}, {1, 179}};
  Outcome out{true, ""};
  for (auto [steps, want] : expected) {
    const auto cfg = steps_cfg(steps);
    std::set<int> ids{event_to_id(Event::pad(), cfg), event_to_id(Event::eos(), cfg)};
    for (int p = cfg.min_pitch; p <= cfg.max_pitch; ++p) {
      ids.insert(event_to_id(Event::note_on(p), cfg));
      ids.insert(event_to_id(Event::note_off(p), cfg));
    }
    for (int k = 1; k <= steps; ++k) ids.insert(event_to_id(Event::time_shift(k), cfg));
    const int table = static_cast<int>(ids.size());
    const bool dense = *ids.begin() == 0 && *ids.rbegin() == table - 1;
    const int formula = 2 * (cfg.max_pitch - cfg.min_pitch + 1) + steps + 2;
    const bool ok = dense && table == want && formula == want && vocab_size(cfg) == want;
    out.pass = out.pass && ok;
    out.detail += std::to_string(steps) + ":" + std::to_string(vocab_size(cfg)) + (ok ? " " : "(!) ");
  }
  return out;
}

Outcome fine_round_trip(const std::vector<NoteSequence>& corpus) {
  const auto cfg = steps_cfg(100);
  double worst = 0.0;
  long boundaries = 0;
  bool pitches = true;
  bool counts = true;
  for (const NoteSequence& s : corpus) {
    const auto back = decode_events(encode_events(s, cfg), cfg);
    if (back.notes.size() != s.notes.size()) {
      counts = false;
      continue;
    }
    for (std::size_t i = 0; i < s.notes.size(); ++i) {
      pitches = pitches && back.notes[i].pitch == s.notes[i].pitch;
      worst = std::max({worst, std::abs(back.notes[i].onset - s.notes[i].onset),
                        std::abs(back.notes[i].offset - s.notes[i].offset)});
      boundaries += 2;
    }
  }
  const bool ok = counts && pitches && worst <= 0.005 + 1e-9;
  return {ok, std::to_string(boundaries) + " boundaries, max error " + fmt("%.4f ms", worst * 1e3) +
                  (pitches ? ", pitches exact" : ", PITCH MISMATCH") + (counts ? "" : ", NOTE COUNT MISMATCH")};
}

Outcome coarse_integer_seconds(const std::vector<NoteSequence>& corpus) {
  const auto cfg = steps_cfg(1);
  long boundaries = 0;
  long off_grid = 0;
  for (const NoteSequence& s : corpus) {
    for (const Note& n : decode_events(encode_events(s, cfg), cfg).notes) {
      off_grid += (n.onset != std::round(n.onset)) + (n.offset != std::round(n.offset));
      boundaries += 2;
    }
  }
  return {off_grid == 0 && boundaries > 0,
          std::to_string(boundaries) + " boundaries, " + std::to_string(off_grid) + " off the whole-second grid"};
}

Outcome pianoroll_split_invariance() {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> frac(0.01, 0.99);
  int changed = 0;
  int checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto seq = normalize(testing::random_melody(gen, 1 + trial % 40, 0.02, 1.5, 0.6));
    const std::size_t k = gen() % seq.notes.size();
    auto split = seq;
    Note tail = split.notes[k];
    const double cut = tail.onset + frac(gen) * tail.duration();
    split.notes[k].offset = cut;
    tail.onset = cut;
    split.notes.insert(split.notes.begin() + static_cast<long>(k) + 1, tail);
    for (int col_fs : {kDefaultColFs, 1 + static_cast<int>(gen() % 32)}) {
      ++checks;
      changed += encode_pianoroll(seq, col_fs) != encode_pianoroll(split, col_fs);
    }
  }
  return {changed == 0, std::to_string(checks) + " split/unsplit pairs, " + std::to_string(changed) + " differ"};
}

Outcome gradient_suite() {
  using nn::CellKind;
  double worst = 0.0;
  long checked = 0;
  std::string where;
  auto take = [&](const std::string& label, const testing::GradReport& r) {
    checked += r.checked;
    if (r.max_rel >= worst) {
      worst = r.max_rel;
      where = label + " " + r.worst;
    }
  };
  const std::vector<std::pair<CellKind, std::string>> cells = {
      {CellKind::kGru, "gru"}, {CellKind::kLstm, "lstm"}, {CellKind::kMlstm, "mlstm"}};
  for (std::uint64_t seed : {1u, 2u}) {
    for (const auto& [kind, name] : cells) {
      take(name, testing::check_cell(kind, seed));
      take(name + " bidirectional model", testing::check_model(kind, seed, true));
    }
    take("embedding", testing::check_embedding(seed));
    take("dense head", testing::check_head(seed, 0));
    take("dense head", testing::check_head(seed, 1));
  }
  return {worst <= testing::kGradTolerance,
          std::to_string(checked) + " partials, max rel error " + fmt("%.2e", worst) + " at " + where};
}

Outcome auc_oracle() {
  std::mt19937_64 gen(6);
  int mismatches = 0;
  int with_ties = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 2 + static_cast<int>(gen() % 199);
    const int levels = 1 + static_cast<int>(gen() % 25);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(gen() % static_cast<unsigned>(levels)) / levels;
      labels[i] = static_cast<int>(gen() % 2);
    }
    labels[0] = 1;
    labels[1] = 0;
    if (std::set<double>(scores.begin(), scores.end()).size() < scores.size()) ++with_ties;
    mismatches += auc(scores, labels) != testing::brute_force_auc(scores, labels);
  }
  return {mismatches == 0, "100 instances (" + std::to_string(with_ties) + " with ties), " +
                               std::to_string(mismatches) + " differ from pair counting"};
}

TrainConfig full_recipe() {
  TrainConfig cfg;  // BiGRU, embed 128, hidden 64, dense 32, Adam 1e-4, batch 32
  cfg.seed = 0;
  // The epoch-10 checkpoint of a longer run is bit-identical to this one:
  // nothing in epochs 1..10 depends on the total epoch count.
  cfg.epochs = 10;
  cfg.checkpoint_epoch = 10;
  return cfg;
}

Outcome pitch_task() {
  const auto source = generate(SynthSpec::pitch_task(1000, 0));
  TrainConfig cfg = full_recipe();
  cfg.steps_per_second = 100;
  const auto run = train(encode_dataset(source, cfg.performance()), cfg);
  const double v = run.records[9].val_auc;
  return {v >= 0.95, "epoch-10 val AUC " + fmt("%.4f", v) + " (need >= 0.95)"};
}

Outcome timing_trend() {
  const auto source = generate(SynthSpec::timing_task(1000, 0, 30.0));
  const std::vector<int> steps = {100, 1};
  const auto entries = sweep(source, steps, full_recipe());
  const double fine = entries[0].selected_val_auc;
  const double coarse = entries[1].selected_val_auc;
  return {fine - coarse >= 0.2 && coarse <= 0.65, "AUC(100) " + fmt("%.4f", fine) + ", AUC(1) " +
                                                      fmt("%.4f", coarse) + ", gap " + fmt("%.4f", fine - coarse) +
                                                      " (need gap >= 0.2, AUC(1) <= 0.65)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int shell(const std::string& args) {
  const std::string cmd = std::string(MELODYCLF_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

// Two CLI sweeps over all seven resolutions with the full model and the
// same seed. 200 samples keep the pair of sweeps near twice the runtime of
// the pitch task.
Outcome sweep_determinism() {
  const fs::path root = fs::temp_directory_path() / "melody_acceptance_sweep";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string midi = (root / "midi").string();
  if (shell("synth-data --task timing --n 200 --seed 0 --out " + midi) != 0) return {false, "synth-data failed"};
  const std::string args = "sweep --data " + midi + " --labels " + midi + "/labels.csv --epochs 10 --seed 0 --out ";
  if (shell(args + (root / "a").string()) != 0 || shell(args + (root / "b").string()) != 0) {
    return {false, "sweep failed"};
  }
  const auto a = tree(root / "a");
  const auto b = tree(root / "b");
  std::size_t bytes = 0;
  int metrics = 0;
  int checkpoints = 0;
  for (const auto& [name, content] : a) {
    bytes += content.size();
    metrics += name.ends_with("metrics.csv");
    checkpoints += name.ends_with("manifest.txt");
  }
  const bool same = a == b;
  const bool complete = metrics == 7 && checkpoints == 70;
  fs::remove_all(root);
  return {same && complete, std::to_string(a.size()) + " files (" + std::to_string(metrics) + " metrics CSVs, " +
                                std::to_string(checkpoints) + " checkpoints, " + std::to_string(bytes) + " bytes)" +
                                (same ? " byte-identical" : " DIFFER")};
}

// Runs `parse` on every input; only melody::Error may escape. `valid` checks
// whatever parses successfully.
template <typename Input>
Outcome fuzz(const std::vector<Input>& inputs, const std::function<bool(const Input&)>& parse) {
  int structured = 0;
  int accepted = 0;
  int invalid = 0;
  int foreign = 0;
  for (const Input& in : inputs) {
    try {
      if (parse(in)) ++accepted;
      else ++invalid;
    } catch (const Error&) {
      ++structured;
    } catch (...) {
      ++foreign;
    }
  }
  return {foreign == 0 && invalid == 0,
          std::to_string(inputs.size()) + " inputs: " + std::to_string(accepted) + " parsed, " +
              std::to_string(structured) + " structured errors, " + std::to_string(foreign) + " other exceptions, " +
              std::to_string(invalid) + " bad parses"};
}

std::vector<std::vector<std::uint8_t>> smf_inputs() {
  std::mt19937_64 gen(10);
  std::vector<std::vector<std::uint8_t>> pool;
  for (int i = 0; i < 16; ++i) pool.push_back(write_smf(normalize(testing::random_melody(gen, 1 + i * 3, 0.05, 1.0, 0.5))));
  std::vector<std::vector<std::uint8_t>> inputs;
  auto byte = [&] { return static_cast<std::uint8_t>(gen()); };
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::uint8_t> b;
    switch (i % 5) {
      case 0:  // random bytes, sometimes behind a valid header magic
        b.resize(gen() % 200);
        for (auto& v : b) v = byte();
        if (gen() % 2) b.insert(b.begin(), {'M', 'T', 'h', 'd', 0, 0, 0, 6});
        break;
      case 1: {  // truncation
        b = pool[gen() % pool.size()];
        b.resize(gen() % (b.size() + 1));
        break;
      }
      case 2: {  // duplicated or deleted span
        b = pool[gen() % pool.size()];
        const std::size_t at = gen() % b.size();
        const std::size_t len = 1 + gen() % 16;
        if (gen() % 2) {
          const std::vector<std::uint8_t> span(b.begin() + at, b.begin() + std::min(b.size(), at + len));
          b.insert(b.begin() + at, span.begin(), span.end());
        } else {
          b.erase(b.begin() + at, b.begin() + std::min(b.size(), at + len));
        }
        break;
      }
      default: {  // byte flips
        b = pool[gen() % pool.size()];
        const int flips = 1 + static_cast<int>(gen() % 8);
        for (int k = 0; k < flips; ++k) b[gen() % b.size()] = byte();
        break;
      }
    }
    inputs.push_back(std::move(b));
  }
  return inputs;
}

std::vector<std::string> musicxml_inputs() {
  std::mt19937_64 gen(11);
  static const char* fragments[] = {"<divisions>0</divisions>", "<duration>-4</duration>", "<alter>99</alter>",
                                    "<octave>99</octave>",      "<note><chord/>",          "</measure>",
                                    "<backup><duration>999</duration></backup>",
                                    "<sound tempo=\"-1\"/>",    "<!--",                    "&bogus;"};
  std::vector<std::string> inputs;
  for (int i = 0; i < 10000; ++i) {
    std::string x;
    switch (i % 5) {
      case 0:  // random text drawn from markup-heavy characters
        x.resize(gen() % 300);
        for (char& c : x) c = "<>/=\"' abcdeinoprstu0123456789-&;\n\x01\xff"[gen() % 37];
        break;
      case 1:
        x = testing::random_score(gen);
        x.resize(gen() % (x.size() + 1));
        break;
      case 2: {
        x = testing::random_score(gen);
        x.insert(gen() % x.size(), fragments[gen() % std::size(fragments)]);
        break;
      }
      default: {
        x = testing::random_score(gen);
        const int edits = 1 + static_cast<int>(gen() % 6);
        for (int k = 0; k < edits; ++k) x[gen() % x.size()] = "<>/=\"0-9x \x01"[gen() % 11];
        break;
      }
    }
    inputs.push_back(std::move(x));
  }
  return inputs;
}

Outcome parser_robustness() {
  const auto smf = fuzz<std::vector<std::uint8_t>>(smf_inputs(), [](const std::vector<std::uint8_t>& b) {
    const auto seq = parse_smf(b);
    return std::is_sorted(seq.notes.begin(), seq.notes.end(),
                          [](const Note& a, const Note& c) { return a.onset < c.onset; });
  });
  const auto xml = fuzz<std::string>(musicxml_inputs(), [](const std::string& x) {
    return is_monophonic(ingest_musicxml(x));
  });
  return {smf.pass && xml.pass, "SMF " + smf.detail + "; MusicXML " + xml.detail};
}

}  // namespace
}  // namespace melody

int main() {
  using namespace melody;
  const auto corpus = codec_corpus();
  const std::vector<Criterion> criteria = {
      {1, "vocabulary law", 1, vocabulary_law},
      {2, "codec round-trip at 100 steps/s", 10, [&] { return fine_round_trip(corpus); }},
      {3, "whole seconds at 1 step/s", 10, [&] { return coarse_integer_seconds(corpus); }},
      {4, "piano roll ignores note splits", 5, pianoroll_split_invariance},
      {5, "gradient suite", 120, gradient_suite},
      {6, "AUC matches pair counting", 5, auc_oracle},
      {7, "pitch-separable task", 15 * 60, pitch_task},
      {8, "timing resolution trend", 30 * 60, timing_trend},
      {9, "sweep determinism", 30 * 60, sweep_determinism},
      {10, "parser robustness", 120, parser_robustness},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::printf("%s %2d %s: %s [%.1f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.number, c.name.c_str(),
                out.detail.c_str(), secs, c.limit_s, in_time ? "" : ", EXCEEDED");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
