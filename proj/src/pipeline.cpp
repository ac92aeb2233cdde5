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

#include "melody/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "melody/checkpoint.hpp"
#include "melody/error.hpp"
#include "melody/smf.hpp"

namespace fs = std::filesystem;

namespace melody {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string format_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kBadFile, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kBadFile, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(Errc::kBadFile, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

StagedDirectory::StagedDirectory(fs::path target) : target_(std::move(target)) {
  staging_ = target_;
  staging_ += ".partial";
  fs::remove_all(staging_);
  fs::create_directories(staging_);
}

StagedDirectory::~StagedDirectory() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
}

void StagedDirectory::commit() {
  fs::remove_all(target_);
  fs::rename(staging_, target_);
  committed_ = true;
}

std::vector<std::pair<std::string, int>> parse_labels_csv(std::string_view text) {
  std::vector<std::pair<std::string, int>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (!header) {
      if (row != "id,label") throw Error(Errc::kBadFile, "labels CSV must start with the header 'id,label'");
      header = true;
      continue;
    }
    const auto comma = row.rfind(',');
    if (comma == std::string_view::npos) throw Error(Errc::kBadFile, "labels CSV line " + std::to_string(lineno));
    const std::string id(trim(row.substr(0, comma)));
    const std::string_view label = trim(row.substr(comma + 1));
    if (id.empty() || (label != "0" && label != "1")) {
      throw Error(Errc::kBadFile, "labels CSV line " + std::to_string(lineno) + ": expected id,0|1");
    }
    rows.emplace_back(id, label == "1" ? 1 : 0);
  }
  if (!header) throw Error(Errc::kBadFile, "labels CSV is empty");
  return rows;
}

std::string labels_csv(const std::vector<LabeledNotes>& samples) {
  std::string out = "id,label\n";
  for (const auto& s : samples) out += s.id + "," + std::to_string(s.label) + "\n";
  return out;
}

std::vector<LabeledNotes> load_midi_dataset(const fs::path& dir, const fs::path& labels) {
  std::vector<LabeledNotes> out;
  std::set<std::string> seen;
  for (const auto& [id, label] : parse_labels_csv(read_file(labels))) {
    if (!seen.insert(id).second) throw Error(Errc::kBadFile, "duplicate id '" + id + "' in labels CSV");
    const std::string bytes = read_file(dir / (id + ".mid"));
    LabeledNotes sample;
    sample.id = id;
    sample.label = label;
    try {
      sample.notes = parse_smf({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
    } catch (const Error& e) {
      throw Error(e.code(), id + ".mid: " + e.what());
    }
    sample.notes.source_id = id;
    out.push_back(std::move(sample));
  }
  return out;
}

void write_midi_dataset(const fs::path& dir, const std::vector<LabeledNotes>& samples) {
  fs::create_directories(dir);
  for (const auto& s : samples) {
    const auto bytes = write_smf(s.notes);
    write_file_atomic(dir / (s.id + ".mid"), {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
  }
  write_file_atomic(dir / "labels.csv", labels_csv(samples));
}

std::string metrics_csv(const std::vector<EpochRecord>& records) {
  std::string out = "epoch,train_loss,train_auc,val_loss,val_auc\n";
  for (const EpochRecord& r : records) {
    out += std::to_string(r.epoch) + "," + format_metric(r.train_loss) + "," + format_metric(r.train_auc) + "," +
           format_metric(r.val_loss) + "," + format_metric(r.val_auc) + "\n";
  }
  return out;
}

std::string predictions_jsonl(const std::vector<std::pair<std::string, double>>& predictions) {
  std::string out;
  for (const auto& [id, score] : predictions) {
    out += nlohmann::json{{"id", id}, {"score", score}}.dump();
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, double>> parse_predictions_jsonl(std::string_view text) {
  std::vector<std::pair<std::string, double>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.emplace_back(j.at("id").get<std::string>(), j.at("score").get<double>());
    } catch (const std::exception& e) {
      throw Error(Errc::kBadFile, "predictions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string checkpoint_dir_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%03d", epoch);
  return buf;
}

std::string sweep_entry_dir_name(int steps_per_second) { return "steps_" + std::to_string(steps_per_second); }

void write_train_run(const fs::path& dir, const TrainRun& run) {
  fs::create_directories(dir);
  write_file_atomic(dir / "metrics.csv", metrics_csv(run.records));
  for (const Checkpoint& ckpt : run.checkpoints) {
    save_checkpoint(ckpt, dir / "checkpoints" / checkpoint_dir_name(ckpt.epoch));
  }
}

void write_sweep_entry(const fs::path& dir, const SweepEntry& entry) {
  write_train_run(dir, entry.run);
  write_file_atomic(dir / ("predictions_" + checkpoint_dir_name(entry.selected_epoch) + ".jsonl"),
                    predictions_jsonl(entry.predictions));
}

}  // namespace melody
