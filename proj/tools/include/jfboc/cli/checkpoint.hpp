/*
 Copyright 2026 The jfboc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "jfboc/training.hpp"
#include "jfboc/valuenet.hpp"

namespace jfboc::cli {

inline constexpr std::uint64_t kCheckpointFormatVersion = 1;

/// Everything needed to continue a run bit-for-bit.
struct Checkpoint {
  std::uint64_t format_version = kCheckpointFormatVersion;
  std::string config_text;
  int run = 0;
  TrainState state;
};

/// Length-prefixed little-endian binary with a magic header.
std::string encode_checkpoint(const Checkpoint& checkpoint);
/// Throws IoError on truncation or a bad magic, and ConfigError on a newer format.
Checkpoint decode_checkpoint(const std::string& bytes);

/// Writes through a temporary file and a rename.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace jfboc::cli
