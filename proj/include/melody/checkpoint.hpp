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

#ifndef MELODY_CHECKPOINT_HPP_
#define MELODY_CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include "melody/classifier.hpp"

namespace melody {

// A checkpoint directory holds two files:
//   manifest.txt  "key value" lines (format, epoch, model and performance
//                 settings) followed by one "tensor <name> <d0>x<d1>.. <offset>"
//                 line per parameter, in parameter order
//   params.bin    little-endian float32 values at the manifest byte offsets
inline constexpr const char* kManifestFile = "manifest.txt";
inline constexpr const char* kBlobFile = "params.bin";

std::string checkpoint_manifest(const Checkpoint& ckpt);
std::string checkpoint_blob(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& manifest, const std::string& blob);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);
// Throws kBadFile for missing files or inconsistent contents.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace melody

#endif  // MELODY_CHECKPOINT_HPP_
