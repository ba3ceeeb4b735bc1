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
#include <string>
#include <vector>

#include "jfboc/fixedpoint.hpp"
#include "jfboc/problems.hpp"
#include "jfboc/valuenet.hpp"

namespace jfboc {

enum class Scheme { kEuler, kRk4 };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

/// Uniform time grid t_k = k * dt, dt = T / steps.
struct Discretization {
  int steps = 50;
  double dt = 0.02;
  Scheme scheme = Scheme::kEuler;
  /// rk4 only: solve a fixed point at every stage instead of freezing u over the step.
  bool rk4_resolve_stages = false;

  static Discretization uniform(double horizon, int steps, Scheme scheme = Scheme::kEuler);
  void validate() const;
  double time(int k) const { return k * dt; }
};

/// One fixed-point evaluation along the trajectory.
struct ControlSolve {
  double t = 0.0;
  Vector z;
  Vector u;
  int iterations = 0;
  double residual = 0.0;
  /// Iterates u_0..u_K, kept only in unrolled mode.
  std::vector<Vector> history;
};

struct Trajectory {
  std::vector<double> times;       // N_t + 1
  std::vector<Vector> states;      // N_t + 1
  std::vector<Vector> controls;    // N_t
  std::vector<double> step_costs;  // N_t, running cost at the left endpoint
  /// Per step: one solve (euler, frozen rk4) or four stage solves (rk4 with re-solve).
  std::vector<std::vector<ControlSolve>> solves;
};

struct RolloutResult {
  double objective = 0.0;
  Trajectory trajectory;
  std::int64_t total_fp_iters = 0;
  std::int64_t work_units = 0;
  /// Bytes of retained backward intermediates (states, controls, iterate histories).
  std::int64_t peak_tape_bytes = 0;
  GradientMode mode = GradientMode::kJfb;
};

/// Generates z_{k+1} = z_k + dt f(t_k, z_k, u_k) (or rk4) with u_k the fixed point
/// of T at (t_k, z_k). Throws NonConvergenceError when a solve hits max_iter
/// with tol > 0.
RolloutResult rollout(const ParamVector& theta, const Vector& x, const ControlProblem& problem,
                      const Discretization& disc, const FixedPointSettings& fp,
                      GradientMode mode = GradientMode::kJfb);

/// What the discrete adjoint recursion saw at one engine call.
struct StepSensitivity {
  int step = 0;
  int stage = 0;
  const AscentOperator* op = nullptr;
  const ControlSolve* solve = nullptr;
  Vector cotangent;  // a_k
  OperatorCotangent pulled;
};

using StepObserver = std::function<void(const StepSensitivity&)>;

struct BackwardResult {
  Vector grad_theta;
  WorkCounters counters;
};

/// Discrete adjoint of rollout: lambda_N = grad G, then for k = N-1..0
///   a_k = dt grad_u L + dt B^T lambda_{k+1}
///   lambda_k = lambda_{k+1} + dt (A^T lambda_{k+1} + grad_z L) + g_z
/// with (g_theta, g_z) from the mode's engine.
BackwardResult backward(const ParamVector& theta, const RolloutResult& result,
                        const ControlProblem& problem, const Discretization& disc,
                        GradientMode mode, const FixedPointSettings& fp,
                        const StepObserver& observer = {});

struct BatchResult {
  double mean_objective = 0.0;
  Vector grad_theta;
  std::int64_t work_units = 0;
  std::int64_t linear_solve_flops = 0;
  std::int64_t peak_tape_bytes = 0;
  std::int64_t total_fp_iters = 0;
};

/// Mean objective and gradient over a batch of initial states. All forward tapes
/// are alive before the backward sweeps start, so the peak is their sum.
BatchResult batch_loss_grad(const ParamVector& theta, const std::vector<Vector>& batch,
                            const ControlProblem& problem, const Discretization& disc,
                            const FixedPointSettings& fp, GradientMode mode, int workers = 1);

/// Mean objective only (no tapes are differentiated).
double batch_objective(const ParamVector& theta, const std::vector<Vector>& batch,
                       const ControlProblem& problem, const Discretization& disc,
                       const FixedPointSettings& fp, int workers = 1);

/// Central differences of J_x over every parameter, fixed points solved to 1e-12.
/// Only for small networks (P <= 2000).
Vector finite_diff_grad(const ParamVector& theta, const Vector& x, const ControlProblem& problem,
                        const Discretization& disc, const FixedPointSettings& fp, double step);

constexpr std::size_t kMaxDenseParams = 2000;

}  // namespace jfboc
