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

#include "melody/checkpoint.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>
#include <vector>

#include "melody/error.hpp"
#include "melody/pipeline.hpp"

namespace melody {
namespace {

constexpr const char* kFormatTag = "melody-checkpoint-v1";

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out;
}

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::kBadFile, "checkpoint: " + what); }

}  // namespace

std::string checkpoint_manifest(const Checkpoint& ckpt) {
  const nn::ModelConfig& m = ckpt.model.config();
  std::ostringstream out;
  out << "format " << kFormatTag << '\n'
      << "epoch " << ckpt.epoch << '\n'
      << "cell " << nn::cell_name(m.cell) << '\n'
      << "bidirectional " << (m.bidirectional ? 1 : 0) << '\n'
      << "vocab " << m.vocab << '\n'
      << "embed_dim " << m.embed_dim << '\n'
      << "hidden " << m.hidden << '\n'
      << "dense_hidden " << m.dense_hidden << '\n'
      << "input_dropout " << format_double(m.input_dropout) << '\n'
      << "latent_dropout " << format_double(m.latent_dropout) << '\n'
      << "init_scale " << format_double(m.init_scale) << '\n'
      << "min_pitch " << ckpt.performance.min_pitch << '\n'
      << "max_pitch " << ckpt.performance.max_pitch << '\n'
      << "steps_per_second " << ckpt.performance.steps_per_second << '\n'
      << "num_velocity_bins " << ckpt.performance.num_velocity_bins << '\n'
      << "max_len " << ckpt.max_len << '\n';
  std::size_t offset = 0;
  for (const auto* p : ckpt.model.params()) {
    out << "tensor " << p->name << ' ' << shape_string(p->shape) << ' ' << offset << '\n';
    offset += p->size() * sizeof(float);
  }
  return out.str();
}

std::string checkpoint_blob(const Checkpoint& ckpt) {
  std::string blob;
  for (const auto* p : ckpt.model.params()) {
    for (float v : p->value) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      for (int k = 0; k < 4; ++k) blob.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
    }
  }
  return blob;
}

Checkpoint parse_checkpoint(const std::string& manifest, const std::string& blob) {
  std::map<std::string, std::string> kv;
  struct TensorLine {
    std::string name, shape;
    std::size_t offset;
  };
  std::vector<TensorLine> tensors;
  std::istringstream in(manifest);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "tensor") {
      TensorLine t;
      if (!(fields >> t.name >> t.shape >> t.offset)) bad("malformed tensor line '" + line + "'");
      tensors.push_back(t);
    } else {
      std::string value;
      if (!(fields >> value)) bad("missing value for '" + key + "'");
      kv[key] = value;
    }
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) bad(std::string("missing key '") + key + "'");
    return it->second;
  };
  auto get_int = [&](const char* key) {
    try {
      return std::stoi(get(key));
    } catch (const std::logic_error&) {
      bad(std::string("bad integer for '") + key + "'");
    }
  };
  auto get_double = [&](const char* key) {
    try {
      return std::stod(get(key));
    } catch (const std::logic_error&) {
      bad(std::string("bad number for '") + key + "'");
    }
  };
  if (get("format") != kFormatTag) bad("unknown format '" + get("format") + "'");

  nn::ModelConfig m;
  PerformanceConfig perf;
  int epoch = 0;
  int max_len = 0;
  try {
    m.cell = nn::parse_cell(get("cell"));
    m.bidirectional = get_int("bidirectional") != 0;
    m.vocab = get_int("vocab");
    m.embed_dim = get_int("embed_dim");
    m.hidden = get_int("hidden");
    m.dense_hidden = get_int("dense_hidden");
    m.input_dropout = get_double("input_dropout");
    m.latent_dropout = get_double("latent_dropout");
    m.init_scale = get_double("init_scale");
    perf.min_pitch = get_int("min_pitch");
    perf.max_pitch = get_int("max_pitch");
    perf.steps_per_second = get_int("steps_per_second");
    perf.num_velocity_bins = get_int("num_velocity_bins");
    epoch = get_int("epoch");
    max_len = get_int("max_len");
    perf.validate();
    m.validate();
  } catch (const Error& e) {
    if (e.code() == Errc::kBadFile) throw;
    bad(e.what());
  }
  if (vocab_size(perf) != m.vocab) bad("vocab does not match the performance settings");

  Checkpoint ckpt{epoch, perf, max_len, nn::Classifier<float>(m)};
  auto params = ckpt.model.params();
  if (params.size() != tensors.size()) bad("tensor count mismatch");
  std::size_t expected_offset = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    nn::Param<float>& p = *params[k];
    const TensorLine& t = tensors[k];
    if (t.name != p.name || t.shape != shape_string(p.shape) || t.offset != expected_offset) {
      bad("tensor '" + t.name + "' does not match the model layout");
    }
    if (blob.size() < t.offset + p.size() * sizeof(float)) bad("params.bin too short");
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[t.offset + 4 * i + b])) << (8 * b);
      }
      std::memcpy(&p.value[i], &bits, sizeof bits);
    }
    expected_offset += p.size() * sizeof(float);
  }
  if (blob.size() != expected_offset) bad("params.bin has trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / kBlobFile, checkpoint_blob(ckpt));
  write_file_atomic(dir / kManifestFile, checkpoint_manifest(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  return parse_checkpoint(read_file(dir / kManifestFile), read_file(dir / kBlobFile));
}

}  // namespace melody
