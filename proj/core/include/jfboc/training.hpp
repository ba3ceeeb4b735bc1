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
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "jfboc/fixedpoint.hpp"
#include "jfboc/problems.hpp"
#include "jfboc/rollout.hpp"
#include "jfboc/valuenet.hpp"

namespace jfboc {

struct SchedulerSettings {
  enum class Kind { kConstant, kReduceOnPlateau };
  Kind kind = Kind::kConstant;
  double factor = 0.5;
  int patience = 10;
  double min_lr = 1e-5;
  /// Relative improvement needed to reset the patience counter.
  double threshold = 1e-4;
};

std::string to_string(SchedulerSettings::Kind kind);
SchedulerSettings::Kind scheduler_kind_from_string(const std::string& name);

struct SchedulerState {
  double lr = 0.0;
  double best = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
};

/// ReduceOnPlateau (min mode, relative threshold): after more than `patience`
/// epochs without improvement, lr <- max(lr * factor, min_lr). Constant
/// schedules return lr unchanged.
double scheduler_step(const SchedulerSettings& settings, SchedulerState& state, double loss);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  Vector m;
  Vector v;
};

void adam_update(Vector& params, const Vector& grad, double lr, AdamState& state);

struct TrainSettings {
  int epochs = 100;
  int batch_size = 32;
  double lr0 = 1e-3;
  SchedulerSettings scheduler;
  InitScheme init;
  GradientMode mode = GradientMode::kJfb;
  std::uint64_t seed = 0;
  int runs = 1;
  /// Draw one batch per run and reuse it every epoch.
  bool fixed_dataset = false;
  /// Global-norm clip; <= 0 disables.
  double grad_clip = 100.0;
  int workers = 1;
  /// A run aborts after this many consecutive failed epochs.
  int max_failed_epochs = 10;
  /// Log clipping and failed epochs to std::clog.
  bool verbose = false;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;
  double cum_runtime_s = 0.0;
  std::int64_t cum_work_units = 0;
  std::int64_t peak_tape_bytes = 0;
  double lr = 0.0;
  // Not part of metrics.csv.
  std::int64_t fp_iterations = 0;
  std::int64_t work_units = 0;
  bool failed = false;
  bool clipped = false;
};

/// Everything needed to continue a run bit-exactly.
struct TrainState {
  ParamVector theta;
  AdamState adam;
  SchedulerState scheduler;
  int next_epoch = 0;
  double cum_runtime_s = 0.0;
  std::int64_t cum_work_units = 0;
  int consecutive_failures = 0;
};

struct RunResult {
  int run = 0;
  std::vector<EpochMetrics> history;
  TrainState final_state;
  bool aborted = false;
  std::string abort_reason;
};

using EpochCallback = std::function<void(int run, const EpochMetrics&, const TrainState&)>;

/// Deterministic seed streams (splitmix64 mixing).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t run_seed(std::uint64_t seed, int run);
std::uint64_t batch_seed(std::uint64_t run_seed, int epoch);
std::uint64_t init_seed(std::uint64_t run_seed);

TrainState initial_train_state(const NetArchitecture& arch, const TrainSettings& settings, int run);

/// Continues `state` until settings.epochs. Each epoch: sample a batch from rho,
/// batch_loss_grad, clip, Adam step, scheduler step on the loss.
RunResult train_run(const ControlProblem& problem, const Discretization& disc,
                    const FixedPointSettings& fp, const TrainSettings& settings, int run,
                    TrainState state, const EpochCallback& on_epoch = {});

/// settings.runs independent replicates from fresh initializations.
std::vector<RunResult> train(const ControlProblem& problem, const NetArchitecture& arch,
                             const Discretization& disc, const FixedPointSettings& fp,
                             const TrainSettings& settings, const EpochCallback& on_epoch = {});

/// Mean objective over `count` fresh initial states drawn with `seed`.
double evaluate(const ParamVector& theta, const ControlProblem& problem, const Discretization& disc,
                const FixedPointSettings& fp, int count, std::uint64_t seed, int workers = 1);

/// Per-epoch mean/min/max of the loss across runs (runs of unequal length are cut
/// to the shortest).
struct LossBand {
  int epoch = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};
std::vector<LossBand> loss_bands(const std::vector<std::vector<EpochMetrics>>& runs);

}  // namespace jfboc
