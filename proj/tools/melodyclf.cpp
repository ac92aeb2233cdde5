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

// melodyclf: symbolic melody encoding and classification pipeline.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "melody/checkpoint.hpp"
#include "melody/classifier.hpp"
#include "melody/dataset.hpp"
#include "melody/error.hpp"
#include "melody/musicxml.hpp"
#include "melody/pianoroll.hpp"
#include "melody/pipeline.hpp"
#include "melody/smf.hpp"

namespace fs = std::filesystem;
using namespace melody;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void log(const std::string& msg) { std::cerr << "[melodyclf] " << msg << '\n'; }

std::vector<fs::path> files_with_extension(const fs::path& dir, std::initializer_list<const char*> exts) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    for (const char* e : exts) {
      if (ext == e) out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

NoteSequence read_midi(const fs::path& path) {
  const std::string bytes = read_file(path);
  return parse_smf({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
}

std::vector<EncodedSample> read_jsonl_file(const fs::path& path) {
  std::istringstream in(read_file(path));
  return read_jsonl(in);
}

struct TrainFlags {
  TrainConfig cfg;
  std::string cell = "gru";
  bool unidirectional = false;

  void attach(CLI::App* app) {
    app->add_option("--cell", cell, "recurrent cell: gru, lstm or mlstm")->capture_default_str();
    app->add_flag("--unidirectional", unidirectional, "forward direction only");
    app->add_option("--epochs", cfg.epochs, "training epochs")->capture_default_str();
    app->add_option("--checkpoint-epoch", cfg.checkpoint_epoch, "epoch whose checkpoint makes predictions")
        ->capture_default_str();
    app->add_option("--batch-size", cfg.batch_size)->capture_default_str();
    app->add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
    app->add_option("--val-split", cfg.val_split, "stratified validation fraction")->capture_default_str();
    app->add_option("--max-len", cfg.max_len, "events per sample after truncation/padding")->capture_default_str();
    app->add_option("--seed", cfg.seed, "seed for split, init, dropout and shuffling")->capture_default_str();
  }

  TrainConfig resolve() {
    try {
      cfg.cell = nn::parse_cell(cell);
      cfg.bidirectional = !unidirectional;
      cfg.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

void log_epoch(const EpochRecord& r) {
  std::ostringstream msg;
  msg << "epoch " << r.epoch << " train_loss=" << r.train_loss << " train_auc=" << r.train_auc
      << " val_loss=" << r.val_loss << " val_auc=" << r.val_auc;
  log(msg.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Melody classification from performance-event encodings"};
  app.require_subcommand(1);

  // ingest-musicxml
  std::string ingest_in, ingest_out;
  int ingest_bars = kDefaultBars;
  auto* ingest = app.add_subcommand("ingest-musicxml", "MusicXML lead sheets -> melody-only MIDI files");
  ingest->add_option("--in", ingest_in, "directory of .xml/.musicxml files")->required();
  ingest->add_option("--out", ingest_out, "output directory for .mid files")->required();
  ingest->add_option("--bars", ingest_bars, "written measures to keep")->capture_default_str();

  // midi2events
  std::string m2e_in, m2e_labels, m2e_out;
  int m2e_steps = 100;
  auto* m2e = app.add_subcommand("midi2events", "MIDI directory + labels -> JSONL event dataset");
  m2e->add_option("--in", m2e_in, "directory containing <id>.mid")->required();
  m2e->add_option("--labels", m2e_labels, "CSV with header id,label")->required();
  m2e->add_option("--steps", m2e_steps, "steps_per_second")->capture_default_str();
  m2e->add_option("--out", m2e_out, "output JSONL file")->required();

  // events2midi
  std::string e2m_in, e2m_out;
  auto* e2m = app.add_subcommand("events2midi", "JSONL event dataset -> decoded MIDI files");
  e2m->add_option("--in", e2m_in, "JSONL dataset")->required();
  e2m->add_option("--out", e2m_out, "output directory")->required();

  // pianoroll
  std::string pr_in, pr_labels, pr_out;
  int pr_col_fs = kDefaultColFs;
  auto* pr = app.add_subcommand("pianoroll", "MIDI directory -> one comma-separated frame vector per line");
  pr->add_option("--in", pr_in, "directory of .mid files")->required();
  pr->add_option("--labels", pr_labels, "optional id,label CSV fixing sample order");
  pr->add_option("--col-fs", pr_col_fs, "frames per second")->capture_default_str();
  pr->add_option("--out", pr_out, "output text file")->required();

  // synth-data
  std::string synth_task = "pitch", synth_out;
  int synth_n = 1000;
  double synth_sigma = 30.0;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth-data", "synthetic labeled melodies as MIDI files + labels.csv");
  synth->add_option("--task", synth_task, "pitch (pitch-separable) or timing (jitter-only)")->capture_default_str();
  synth->add_option("--n", synth_n, "number of samples (even)")->capture_default_str();
  synth->add_option("--sigma-ms", synth_sigma, "timing jitter of class 0 for --task timing")->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--out", synth_out, "output directory")->required();

  // train
  std::string train_data, train_out;
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "train a classifier on a JSONL dataset");
  train_cmd->add_option("--data", train_data, "JSONL dataset (single steps_per_second)")->required();
  train_cmd->add_option("--out", train_out, "run directory")->required();
  train_flags.attach(train_cmd);

  // predict
  std::string pred_ckpt, pred_data, pred_out;
  auto* pred = app.add_subcommand("predict", "score a JSONL dataset with a checkpoint");
  pred->add_option("--checkpoint", pred_ckpt, "checkpoint directory")->required();
  pred->add_option("--data", pred_data, "JSONL dataset")->required();
  pred->add_option("--out", pred_out, "predictions JSONL")->required();

  // eval-auc
  std::string auc_preds, auc_labels;
  auto* eval = app.add_subcommand("eval-auc", "AUC of predictions against labels");
  eval->add_option("--predictions", auc_preds, "predictions JSONL")->required();
  eval->add_option("--labels", auc_labels, "labels CSV or JSONL dataset")->required();

  // sweep
  std::string sweep_data, sweep_labels, sweep_out;
  std::vector<int> sweep_steps{100, 50, 20, 10, 5, 2, 1};
  TrainFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "train once per steps_per_second value");
  sweep_cmd->add_option("--data", sweep_data, "directory containing <id>.mid")->required();
  sweep_cmd->add_option("--labels", sweep_labels, "CSV with header id,label")->required();
  sweep_cmd->add_option("--steps", sweep_steps, "comma-separated steps_per_second values")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "output directory, one steps_<n>/ per value")->required();
  sweep_flags.attach(sweep_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cerr, std::cerr);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest) {
      if (ingest_bars < 1) throw UsageError("--bars must be >= 1");
      StagedDirectory stage(ingest_out);
      int written = 0;
      for (const auto& path : files_with_extension(ingest_in, {".xml", ".musicxml", ".mxl"})) {
        try {
          if (path.extension() == ".mxl") {
            throw Error(Errc::kCompressedMusicXml, "compressed .mxl is not supported; unzip it first");
          }
          const NoteSequence seq = ingest_musicxml(read_file(path), ingest_bars);
          const auto bytes = write_smf(seq);
          write_file_atomic(stage.path() / (path.stem().string() + ".mid"),
                            {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
          ++written;
        } catch (const Error& e) {
          log("skipping " + path.filename().string() + ": " + e.what());
        }
      }
      stage.commit();
      log("wrote " + std::to_string(written) + " MIDI files to " + ingest_out);
    } else if (*m2e) {
      if (m2e_steps < 1) throw UsageError("--steps must be >= 1");
      PerformanceConfig cfg;
      cfg.steps_per_second = m2e_steps;
      const auto data = encode_dataset(load_midi_dataset(m2e_in, m2e_labels), cfg);
      std::ostringstream out;
      write_jsonl(out, data);
      write_file_atomic(m2e_out, out.str());
      log("encoded " + std::to_string(data.size()) + " samples, vocab size " + std::to_string(vocab_size(cfg)));
    } else if (*e2m) {
      std::vector<LabeledNotes> decoded;
      for (const auto& s : read_jsonl_file(e2m_in)) {
        PerformanceConfig cfg;
        cfg.steps_per_second = s.steps_per_second;
        decoded.push_back({s.id, s.label, decode_events({s.events}, cfg)});
      }
      StagedDirectory stage(e2m_out);
      write_midi_dataset(stage.path(), decoded);
      stage.commit();
    } else if (*pr) {
      if (pr_col_fs < 1) throw UsageError("--col-fs must be >= 1");
      std::vector<fs::path> files;
      if (!pr_labels.empty()) {
        for (const auto& [id, label] : parse_labels_csv(read_file(pr_labels))) {
          files.push_back(fs::path(pr_in) / (id + ".mid"));
        }
      } else {
        files = files_with_extension(pr_in, {".mid", ".midi"});
      }
      std::string out;
      for (const auto& f : files) {
        out += to_csv_line(encode_pianoroll(read_midi(f), pr_col_fs));
        out += '\n';
      }
      write_file_atomic(pr_out, out);
    } else if (*synth) {
      if (synth_task != "pitch" && synth_task != "timing") throw UsageError("--task must be pitch or timing");
      if (synth_n <= 0 || synth_n % 2 != 0) throw UsageError("--n must be positive and even");
      if (synth_sigma < 0) throw UsageError("--sigma-ms must be >= 0");
      const SynthSpec spec = synth_task == "pitch" ? SynthSpec::pitch_task(synth_n, synth_seed)
                                                   : SynthSpec::timing_task(synth_n, synth_seed, synth_sigma);
      StagedDirectory stage(synth_out);
      write_midi_dataset(stage.path(), generate(spec));
      stage.commit();
    } else if (*train_cmd) {
      TrainConfig cfg = train_flags.resolve();
      const auto data = read_jsonl_file(train_data);
      if (data.empty()) throw Error(Errc::kBadFile, "empty dataset");
      cfg.steps_per_second = data.front().steps_per_second;
      cfg.validate();
      StagedDirectory stage(train_out);
      const TrainRun run = train(data, cfg, [](const EpochRecord& r, const Checkpoint&) { log_epoch(r); });
      write_train_run(stage.path(), run);
      const auto scores = predict(run.at_epoch(cfg.checkpoint_epoch), data);
      std::vector<std::pair<std::string, double>> preds;
      for (std::size_t i = 0; i < data.size(); ++i) preds.emplace_back(data[i].id, scores[i]);
      write_file_atomic(stage.path() / ("predictions_" + checkpoint_dir_name(cfg.checkpoint_epoch) + ".jsonl"),
                        predictions_jsonl(preds));
      stage.commit();
    } else if (*pred) {
      const Checkpoint ckpt = load_checkpoint(pred_ckpt);
      const auto data = read_jsonl_file(pred_data);
      const auto scores = predict(ckpt, data);
      std::vector<std::pair<std::string, double>> preds;
      for (std::size_t i = 0; i < data.size(); ++i) preds.emplace_back(data[i].id, scores[i]);
      write_file_atomic(pred_out, predictions_jsonl(preds));
    } else if (*eval) {
      std::vector<std::pair<std::string, int>> labels;
      if (fs::path(auc_labels).extension() == ".csv") {
        labels = parse_labels_csv(read_file(auc_labels));
      } else {
        for (const auto& s : read_jsonl_file(auc_labels)) labels.emplace_back(s.id, s.label);
      }
      std::map<std::string, int> by_id(labels.begin(), labels.end());
      std::vector<double> scores;
      std::vector<int> ys;
      for (const auto& [id, score] : parse_predictions_jsonl(read_file(auc_preds))) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw Error(Errc::kBadFile, "no label for prediction id '" + id + "'");
        scores.push_back(score);
        ys.push_back(it->second);
      }
      std::cout << auc(scores, ys) << '\n';
    } else if (*sweep_cmd) {
      TrainConfig cfg = sweep_flags.resolve();
      if (sweep_steps.empty()) throw UsageError("--steps needs at least one value");
      for (int s : sweep_steps) {
        if (s < 1) throw UsageError("--steps values must be >= 1");
      }
      const auto source = load_midi_dataset(sweep_data, sweep_labels);
      StagedDirectory stage(sweep_out);
      sweep(source, sweep_steps, cfg, [&](const SweepEntry& entry) {
        std::ostringstream msg;
        msg << "steps " << entry.steps_per_second << ": epoch " << entry.selected_epoch
            << " val_auc=" << entry.selected_val_auc;
        log(msg.str());
        write_sweep_entry(stage.path() / sweep_entry_dir_name(entry.steps_per_second), entry);
      });
      stage.commit();
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
    return kExitUsage;
  } catch (const Error& e) {
    log(std::string("error: ") + e.what());
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    log(std::string("error: ") + e.what());
    return kExitData;
  }
  return 0;
}
