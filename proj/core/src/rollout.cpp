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

#include "jfboc/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "jfboc/errors.hpp"
#include "jfboc/parallel.hpp"

namespace jfboc {

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kEuler:
      return "euler";
    case Scheme::kRk4:
      return "rk4";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "euler") return Scheme::kEuler;
  if (name == "rk4") return Scheme::kRk4;
  throw ConfigError("unknown integration scheme '" + name + "' (expected euler or rk4)");
}

Discretization Discretization::uniform(double horizon, int steps, Scheme scheme) {
  if (steps < 1) throw ConfigError("discretization: steps must be >= 1");
  if (!(horizon > 0.0)) throw ConfigError("discretization: horizon must be positive");
  Discretization d;
  d.steps = steps;
  d.dt = horizon / steps;
  d.scheme = scheme;
  return d;
}

void Discretization::validate() const {
  if (steps < 1) throw ConfigError("discretization: steps must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("discretization: dt must be positive");
}

namespace {

constexpr std::int64_t kDoubleBytes = static_cast<std::int64_t>(sizeof(double));

std::int64_t tape_bytes(const ControlSolve& s) {
  std::int64_t doubles = 1 + s.z.size() + s.u.size();
  for (const Vector& h : s.history) doubles += h.size();
  return doubles * kDoubleBytes;
}

class ControlEvaluator {
 public:
  ControlEvaluator(const ParamVector& theta, const ControlProblem& problem,
                   const FixedPointSettings& fp, GradientMode mode)
      : theta_(theta),
        problem_(problem),
        fp_(fp),
        keep_history_(mode == GradientMode::kUnrolled),
        warm_(Vector::Zero(problem.control_dim())) {}

  ControlSolve operator()(double t, const Vector& z) {
    const AscentOperator op(theta_, problem_, t, z, fp_.alpha);
    const Vector init = fp_.warm_start ? warm_ : Vector(Vector::Zero(problem_.control_dim()));
    FixedPointResult r = solve(op, init, fp_, keep_history_);
    if (!r.converged && !fp_.fixed_iteration_count()) {
      throw NonConvergenceError("fixed point did not converge at t = " + std::to_string(t) +
                                " (residual " + std::to_string(r.residual) + " after " +
                                std::to_string(r.iterations) + " iterations)");
    }
    total_iters_ += r.iterations;
    warm_ = r.u_star;
    ControlSolve s;
    s.t = t;
    s.z = z;
    s.u = std::move(r.u_star);
    s.iterations = r.iterations;
    s.residual = r.residual;
    s.history = std::move(r.history);
    return s;
  }

  std::int64_t total_iterations() const { return total_iters_; }

 private:
  const ParamVector& theta_;
  const ControlProblem& problem_;
  const FixedPointSettings& fp_;
  bool keep_history_;
  Vector warm_;
  std::int64_t total_iters_ = 0;
};

}  // namespace

RolloutResult rollout(const ParamVector& theta, const Vector& x, const ControlProblem& problem,
                      const Discretization& disc, const FixedPointSettings& fp, GradientMode mode) {
  disc.validate();
  fp.validate();
  if (x.size() != problem.state_dim()) throw DimensionError("rollout: initial state dimension mismatch");

  RolloutResult result;
  result.mode = mode;
  Trajectory& traj = result.trajectory;
  const int N = disc.steps;
  const double h = disc.dt;
  traj.times.reserve(static_cast<std::size_t>(N) + 1);
  traj.states.reserve(static_cast<std::size_t>(N) + 1);
  traj.controls.reserve(static_cast<std::size_t>(N));
  traj.step_costs.reserve(static_cast<std::size_t>(N));
  traj.solves.reserve(static_cast<std::size_t>(N));

  ControlEvaluator control(theta, problem, fp, mode);
  Vector z = x;
  traj.times.push_back(0.0);
  traj.states.push_back(z);
  double running = 0.0;

  for (int k = 0; k < N; ++k) {
    const double t = disc.time(k);
    std::vector<ControlSolve> solves;
    solves.push_back(control(t, z));
    const Vector& u = solves.front().u;
    const double cost = problem.running_cost(t, z, u);
    running += h * cost;

    Vector next;
    if (disc.scheme == Scheme::kEuler) {
      next = z + h * problem.dynamics(t, z, u);
    } else if (!disc.rk4_resolve_stages) {
      const Vector k1 = problem.dynamics(t, z, u);
      const Vector k2 = problem.dynamics(t + h / 2, z + h / 2 * k1, u);
      const Vector k3 = problem.dynamics(t + h / 2, z + h / 2 * k2, u);
      const Vector k4 = problem.dynamics(t + h, z + h * k3, u);
      next = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    } else {
      const Vector k1 = problem.dynamics(t, z, u);
      const Vector z2 = z + h / 2 * k1;
      solves.push_back(control(t + h / 2, z2));
      const Vector k2 = problem.dynamics(t + h / 2, z2, solves.back().u);
      const Vector z3 = z + h / 2 * k2;
      solves.push_back(control(t + h / 2, z3));
      const Vector k3 = problem.dynamics(t + h / 2, z3, solves.back().u);
      const Vector z4 = z + h * k3;
      solves.push_back(control(t + h, z4));
      const Vector k4 = problem.dynamics(t + h, z4, solves.back().u);
      next = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    if (!next.allFinite()) throw DivergenceError("rollout: state became non-finite");

    traj.controls.push_back(u);
    traj.step_costs.push_back(cost);
    for (const ControlSolve& s : solves) result.peak_tape_bytes += tape_bytes(s);
    traj.solves.push_back(std::move(solves));
    z = std::move(next);
    traj.times.push_back(disc.time(k + 1));
    traj.states.push_back(z);
  }
  result.peak_tape_bytes += z.size() * kDoubleBytes;
  result.objective = running + problem.terminal_cost(z);
  result.total_fp_iters = control.total_iterations();
  return result;
}

namespace {

OperatorCotangent run_engine(GradientMode mode, const AscentOperator& op, const ControlSolve& s,
                             const Vector& a, WorkCounters& counters) {
  switch (mode) {
    case GradientMode::kJfb:
      return jfb_vjp(op, s.u, a, counters);
    case GradientMode::kImplicit:
      return implicit_vjp(op, s.u, a, counters);
    case GradientMode::kUnrolled:
      return unrolled_vjp(op, s.history, a, counters);
  }
  throw ConfigError("unknown gradient mode");
}

}  // namespace

BackwardResult backward(const ParamVector& theta, const RolloutResult& result,
                        const ControlProblem& problem, const Discretization& disc,
                        GradientMode mode, const FixedPointSettings& fp,
                        const StepObserver& observer) {
  const Trajectory& traj = result.trajectory;
  const int N = disc.steps;
  if (static_cast<int>(traj.solves.size()) != N) {
    throw ConfigError("backward: rollout result does not match the discretization");
  }
  if (mode == GradientMode::kUnrolled && result.mode != GradientMode::kUnrolled) {
    throw ConfigError("backward: unrolled mode needs a rollout that stored iterate histories");
  }
  const double h = disc.dt;

  BackwardResult out;
  out.grad_theta = Vector::Zero(static_cast<Eigen::Index>(theta.size()));
  Vector lambda = problem.terminal_cost_grad(traj.states.back());

  auto engine = [&](int k, int stage, const ControlSolve& s, const Vector& a) {
    const AscentOperator op(theta, problem, s.t, s.z, fp.alpha);
    OperatorCotangent pulled = run_engine(mode, op, s, a, out.counters);
    out.grad_theta += pulled.g_theta;
    if (observer) {
      StepSensitivity info;
      info.step = k;
      info.stage = stage;
      info.op = &op;
      info.solve = &s;
      info.cotangent = a;
      info.pulled = pulled;
      observer(info);
    }
    return pulled.g_z;
  };

  for (int k = N - 1; k >= 0; --k) {
    const std::vector<ControlSolve>& solves = traj.solves[static_cast<std::size_t>(k)];
    const ControlSolve& s1 = solves.front();
    const double t = s1.t;
    const Vector& z = s1.z;
    const Vector& u = s1.u;
    const RunningCostDerivatives cost = problem.running_cost_derivatives(t, z, u);

    if (disc.scheme == Scheme::kEuler) {
      const DynamicsJacobians jac = problem.dynamics_jacobians(t, z, u);
      const Vector a = h * (cost.grad_u + jac.B.transpose() * lambda);
      const Vector g_z = engine(k, 0, s1, a);
      lambda = lambda + h * (jac.A.transpose() * lambda + cost.grad_z) + g_z;
      continue;
    }

    // rk4: reverse through the four stages of z' = z + h/6 (k1 + 2 k2 + 2 k3 + k4).
    const bool resolve = disc.rk4_resolve_stages;
    const Vector& u2 = resolve ? solves[1].u : u;
    const Vector& u3 = resolve ? solves[2].u : u;
    const Vector& u4 = resolve ? solves[3].u : u;
    const Vector k1 = problem.dynamics(t, z, u);
    const Vector z2 = z + h / 2 * k1;
    const Vector k2 = problem.dynamics(t + h / 2, z2, u2);
    const Vector z3 = z + h / 2 * k2;
    const Vector k3 = problem.dynamics(t + h / 2, z3, u3);
    const Vector z4 = z + h * k3;

    Vector k1_bar = h / 6 * lambda;
    Vector k2_bar = h / 3 * lambda;
    Vector k3_bar = h / 3 * lambda;
    const Vector k4_bar = h / 6 * lambda;
    Vector z_bar = lambda;
    Vector u_bar = Vector::Zero(u.size());

    const DynamicsJacobians j4 = problem.dynamics_jacobians(t + h, z4, u4);
    Vector z4_bar = j4.A.transpose() * k4_bar;
    if (resolve) {
      z4_bar += engine(k, 3, solves[3], j4.B.transpose() * k4_bar);
    } else {
      u_bar += j4.B.transpose() * k4_bar;
    }
    k3_bar += h * z4_bar;
    z_bar += z4_bar;

    const DynamicsJacobians j3 = problem.dynamics_jacobians(t + h / 2, z3, u3);
    Vector z3_bar = j3.A.transpose() * k3_bar;
    if (resolve) {
      z3_bar += engine(k, 2, solves[2], j3.B.transpose() * k3_bar);
    } else {
      u_bar += j3.B.transpose() * k3_bar;
    }
    k2_bar += h / 2 * z3_bar;
    z_bar += z3_bar;

    const DynamicsJacobians j2 = problem.dynamics_jacobians(t + h / 2, z2, u2);
    Vector z2_bar = j2.A.transpose() * k2_bar;
    if (resolve) {
      z2_bar += engine(k, 1, solves[1], j2.B.transpose() * k2_bar);
    } else {
      u_bar += j2.B.transpose() * k2_bar;
    }
    k1_bar += h / 2 * z2_bar;
    z_bar += z2_bar;

    const DynamicsJacobians j1 = problem.dynamics_jacobians(t, z, u);
    z_bar += j1.A.transpose() * k1_bar + h * cost.grad_z;
    u_bar += j1.B.transpose() * k1_bar + h * cost.grad_u;
    z_bar += engine(k, 0, s1, u_bar);
    lambda = std::move(z_bar);
  }
  return out;
}

BatchResult batch_loss_grad(const ParamVector& theta, const std::vector<Vector>& batch,
                            const ControlProblem& problem, const Discretization& disc,
                            const FixedPointSettings& fp, GradientMode mode, int workers) {
  if (batch.empty()) throw ConfigError("batch_loss_grad: batch must be non-empty");
  const std::size_t count = batch.size();

  std::vector<RolloutResult> forward(count);
  parallel_for(count, workers, [&](std::size_t i) {
    try {
      forward[i] = rollout(theta, batch[i], problem, disc, fp, mode);
    } catch (const NonConvergenceError& e) {
      throw NonConvergenceError("sample " + std::to_string(i) + ": " + e.what());
    }
  });

  std::vector<BackwardResult> reverse(count);
  parallel_for(count, workers, [&](std::size_t i) {
    reverse[i] = backward(theta, forward[i], problem, disc, mode, fp);
  });

  BatchResult out;
  out.grad_theta = Vector::Zero(static_cast<Eigen::Index>(theta.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    total += forward[i].objective;
    out.grad_theta += reverse[i].grad_theta;
    out.work_units += reverse[i].counters.work_units;
    out.linear_solve_flops += reverse[i].counters.linear_solve_flops;
    out.peak_tape_bytes += forward[i].peak_tape_bytes;
    out.total_fp_iters += forward[i].total_fp_iters;
  }
  const double inv = 1.0 / static_cast<double>(count);
  out.mean_objective = total * inv;
  out.grad_theta *= inv;
  return out;
}

double batch_objective(const ParamVector& theta, const std::vector<Vector>& batch,
                       const ControlProblem& problem, const Discretization& disc,
                       const FixedPointSettings& fp, int workers) {
  if (batch.empty()) throw ConfigError("batch_objective: batch must be non-empty");
  std::vector<double> values(batch.size());
  parallel_for(batch.size(), workers, [&](std::size_t i) {
    values[i] = rollout(theta, batch[i], problem, disc, fp).objective;
  });
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

Vector finite_diff_grad(const ParamVector& theta, const Vector& x, const ControlProblem& problem,
                        const Discretization& disc, const FixedPointSettings& fp, double step) {
  if (theta.size() > kMaxDenseParams) {
    throw ConfigError("finite_diff_grad: " + std::to_string(theta.size()) +
                      " parameters exceeds the dense limit of " + std::to_string(kMaxDenseParams));
  }
  if (!(step > 0.0)) throw ConfigError("finite_diff_grad: step must be positive");
  FixedPointSettings tight = fp;
  tight.tol = 1e-12;
  tight.max_iter = std::max(fp.max_iter, 20000);

  Vector grad(static_cast<Eigen::Index>(theta.size()));
  Vector values = theta.values();
  ParamVector probe = theta;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    probe.set_values(values);
    const double plus = rollout(probe, x, problem, disc, tight).objective;
    values[i] = saved - step;
    probe.set_values(values);
    const double minus = rollout(probe, x, problem, disc, tight).objective;
    values[i] = saved;
    grad[i] = (plus - minus) / (2.0 * step);
  }
  return grad;
}

}  // namespace jfboc
