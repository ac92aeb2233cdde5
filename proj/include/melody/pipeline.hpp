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

#ifndef MELODY_PIPELINE_HPP_
#define MELODY_PIPELINE_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "melody/classifier.hpp"
#include "melody/dataset.hpp"

namespace melody {

std::string read_file(const std::filesystem::path& path);

// Writes to "<path>.tmp" and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Builds a directory under "<target>.partial" and swaps it into place on
// commit(); an uncommitted stage is removed on destruction.
class StagedDirectory {
 public:
  explicit StagedDirectory(std::filesystem::path target);
  ~StagedDirectory();
  StagedDirectory(const StagedDirectory&) = delete;
  StagedDirectory& operator=(const StagedDirectory&) = delete;

  const std::filesystem::path& path() const { return staging_; }
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path staging_;
  bool committed_ = false;
};

// "id,label" header required; labels must be 0 or 1.
std::vector<std::pair<std::string, int>> parse_labels_csv(std::string_view text);
std::string labels_csv(const std::vector<LabeledNotes>& samples);

// Reads "<dir>/<id>.mid" for each labels.csv row, in row order.
std::vector<LabeledNotes> load_midi_dataset(const std::filesystem::path& dir, const std::filesystem::path& labels);
// Writes "<id>.mid" per sample plus labels.csv into `dir`.
void write_midi_dataset(const std::filesystem::path& dir, const std::vector<LabeledNotes>& samples);

// epoch,train_loss,train_auc,val_loss,val_auc
std::string metrics_csv(const std::vector<EpochRecord>& records);
// One {"id": ..., "score": ...} object per line.
std::string predictions_jsonl(const std::vector<std::pair<std::string, double>>& predictions);
std::vector<std::pair<std::string, double>> parse_predictions_jsonl(std::string_view text);

std::string checkpoint_dir_name(int epoch);  // "epoch_010"

// metrics.csv and checkpoints/epoch_NNN/ for every epoch.
void write_train_run(const std::filesystem::path& dir, const TrainRun& run);
// A run directory plus predictions_epoch_NNN.jsonl from the selected checkpoint.
void write_sweep_entry(const std::filesystem::path& dir, const SweepEntry& entry);
std::string sweep_entry_dir_name(int steps_per_second);  // "steps_100"

}  // namespace melody

#endif  // MELODY_PIPELINE_HPP_
