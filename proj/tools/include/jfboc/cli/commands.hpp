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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "jfboc/cli/config.hpp"

namespace jfboc::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRuntime = 2 };

struct TrainCommand {
  std::string config;
  std::filesystem::path out_dir;
  int workers = 1;
  bool resume = false;
  bool verbose = false;
  /// Checkpoint every this many epochs (the last epoch is always saved).
  int checkpoint_every = 1;
};

struct EvalCommand {
  std::string config;
  std::filesystem::path checkpoint;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

struct CheckCommand {
  std::string config;
  std::filesystem::path checkpoint;
  std::filesystem::path report_csv;  // empty: next to the checkpoint
  bool dense = false;
  int pairs = 200;
  int samples = 4;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct PlotCommand {
  /// "LABEL=DIR" or "DIR"; DIR holds run*/metrics.csv.
  std::vector<std::string> series;
  std::vector<std::filesystem::path> trajectories;
  std::filesystem::path out_dir;
  std::string title;
};

int cmd_train(const TrainCommand& cmd, std::ostream& out);
int cmd_eval(const EvalCommand& cmd, std::ostream& out);
int cmd_check(const CheckCommand& cmd, std::ostream& out);
int cmd_plot(const PlotCommand& cmd, std::ostream& out);

/// Parses argv, dispatches, and maps errors to exit codes: 1 for usage or
/// configuration problems, 2 for runtime and I/O failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jfboc::cli
