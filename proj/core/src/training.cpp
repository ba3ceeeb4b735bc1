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

#include "jfboc/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <utility>

#include "jfboc/errors.hpp"

namespace jfboc {

std::string to_string(SchedulerSettings::Kind kind) {
  return kind == SchedulerSettings::Kind::kConstant ? "constant" : "plateau";
}

SchedulerSettings::Kind scheduler_kind_from_string(const std::string& name) {
  if (name == "constant") return SchedulerSettings::Kind::kConstant;
  if (name == "plateau" || name == "reduce_on_plateau") return SchedulerSettings::Kind::kReduceOnPlateau;
  throw ConfigError("unknown scheduler '" + name + "' (expected constant or plateau)");
}

double scheduler_step(const SchedulerSettings& settings, SchedulerState& state, double loss) {
  if (settings.kind == SchedulerSettings::Kind::kConstant) return state.lr;
  if (!std::isfinite(loss)) return state.lr;
  if (loss < state.best * (1.0 - settings.threshold) || !std::isfinite(state.best)) {
    state.best = loss;
    state.bad_epochs = 0;
  } else {
    ++state.bad_epochs;
  }
  if (state.bad_epochs > settings.patience) {
    state.lr = std::max(state.lr * settings.factor, settings.min_lr);
    state.bad_epochs = 0;
  }
  return state.lr;
}

void adam_update(Vector& params, const Vector& grad, double lr, AdamState& state) {
  if (state.m.size() != params.size()) {
    state.m = Vector::Zero(params.size());
    state.v = Vector::Zero(params.size());
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

void TrainSettings::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(lr0 >= 0.0)) throw ConfigError("train: lr0 must be >= 0");
  if (runs < 1) throw ConfigError("train: runs must be >= 1");
  if (workers < 1) throw ConfigError("train: workers must be >= 1");
  if (scheduler.kind == SchedulerSettings::Kind::kReduceOnPlateau) {
    if (!(scheduler.factor > 0.0 && scheduler.factor < 1.0)) {
      throw ConfigError("train: plateau factor must lie in (0, 1)");
    }
    if (scheduler.patience < 0) throw ConfigError("train: plateau patience must be >= 0");
  }
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t run_seed(std::uint64_t seed, int run) { return mix_seed(seed, static_cast<std::uint64_t>(run)); }

std::uint64_t batch_seed(std::uint64_t rs, int epoch) {
  return mix_seed(rs, 0x100000000ULL + static_cast<std::uint64_t>(epoch));
}

std::uint64_t init_seed(std::uint64_t rs) { return mix_seed(rs, 0xfeedULL); }

TrainState initial_train_state(const NetArchitecture& arch, const TrainSettings& settings, int run) {
  TrainState state{init_params(arch, init_seed(run_seed(settings.seed, run)), settings.init), AdamState{},
                   SchedulerState{}, 0, 0.0, 0, 0};
  state.scheduler.lr = settings.lr0;
  return state;
}

RunResult train_run(const ControlProblem& problem, const Discretization& disc,
                    const FixedPointSettings& fp, const TrainSettings& settings, int run,
                    TrainState state, const EpochCallback& on_epoch) {
  settings.validate();
  fp.validate();
  disc.validate();
  using Clock = std::chrono::steady_clock;

  RunResult result{run, {}, std::move(state), false, {}};
  TrainState& st = result.final_state;
  const std::uint64_t rs = run_seed(settings.seed, run);

  for (int epoch = st.next_epoch; epoch < settings.epochs; ++epoch) {
    const auto start = Clock::now();
    const std::uint64_t bs = settings.fixed_dataset ? batch_seed(rs, 0) : batch_seed(rs, epoch);
    const std::vector<Vector> batch = problem.sample_initial(bs, settings.batch_size);

    EpochMetrics m;
    m.epoch = epoch;
    m.lr = st.scheduler.lr;
    try {
      const BatchResult br =
          batch_loss_grad(st.theta, batch, problem, disc, fp, settings.mode, settings.workers);
      Vector grad = br.grad_theta;
      const double norm = grad.norm();
      if (!std::isfinite(norm)) throw DivergenceError("non-finite gradient");
      if (settings.grad_clip > 0.0 && norm > settings.grad_clip) {
        grad *= settings.grad_clip / norm;
        m.clipped = true;
        if (settings.verbose) {
          std::clog << "[run " << run << " epoch " << epoch << "] gradient clipped (norm " << norm
                    << ")\n";
        }
      }
      Vector values = st.theta.values();
      adam_update(values, grad, st.scheduler.lr, st.adam);
      st.theta.set_values(values);

      m.loss = br.mean_objective;
      m.work_units = br.work_units;
      m.peak_tape_bytes = br.peak_tape_bytes;
      m.fp_iterations = br.total_fp_iters;
      st.consecutive_failures = 0;
      scheduler_step(settings.scheduler, st.scheduler, m.loss);
    } catch (const Error& e) {
      m.failed = true;
      m.loss = std::numeric_limits<double>::quiet_NaN();
      ++st.consecutive_failures;
      if (settings.verbose) {
        std::clog << "[run " << run << " epoch " << epoch << "] epoch failed: " << e.what() << "\n";
      }
    }

    st.cum_runtime_s += std::chrono::duration<double>(Clock::now() - start).count();
    st.cum_work_units += m.work_units;
    st.next_epoch = epoch + 1;
    m.cum_runtime_s = st.cum_runtime_s;
    m.cum_work_units = st.cum_work_units;
    result.history.push_back(m);
    if (on_epoch) on_epoch(run, m, st);

    if (st.consecutive_failures >= settings.max_failed_epochs) {
      result.aborted = true;
      result.abort_reason = "aborted after " + std::to_string(st.consecutive_failures) +
                            " consecutive failed epochs";
      break;
    }
  }
  return result;
}

std::vector<RunResult> train(const ControlProblem& problem, const NetArchitecture& arch,
                             const Discretization& disc, const FixedPointSettings& fp,
                             const TrainSettings& settings, const EpochCallback& on_epoch) {
  settings.validate();
  if (arch.input_dim != problem.state_dim() + 1) {
    throw DimensionError("network input_dim must equal state dimension + 1");
  }
  std::vector<RunResult> runs;
  runs.reserve(static_cast<std::size_t>(settings.runs));
  for (int r = 0; r < settings.runs; ++r) {
    runs.push_back(train_run(problem, disc, fp, settings, r, initial_train_state(arch, settings, r),
                             on_epoch));
  }
  return runs;
}

double evaluate(const ParamVector& theta, const ControlProblem& problem, const Discretization& disc,
                const FixedPointSettings& fp, int count, std::uint64_t seed, int workers) {
  if (count < 1) throw ConfigError("evaluate: count must be >= 1");
  return batch_objective(theta, problem.sample_initial(seed, count), problem, disc, fp, workers);
}

std::vector<LossBand> loss_bands(const std::vector<std::vector<EpochMetrics>>& runs) {
  std::vector<LossBand> bands;
  if (runs.empty()) return bands;
  std::size_t len = runs.front().size();
  for (const auto& r : runs) len = std::min(len, r.size());
  bands.reserve(len);
  for (std::size_t e = 0; e < len; ++e) {
    LossBand b;
    b.epoch = runs.front()[e].epoch;
    b.min = std::numeric_limits<double>::infinity();
    b.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& r : runs) {
      const double l = r[e].loss;
      sum += l;
      b.min = std::min(b.min, l);
      b.max = std::max(b.max, l);
    }
    b.mean = sum / static_cast<double>(runs.size());
    // Keep min <= mean <= max under rounding.
    b.mean = std::clamp(b.mean, b.min, b.max);
    bands.push_back(b);
  }
  return bands;
}

}  // namespace jfboc
