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
#include <optional>
#include <string>
#include <vector>

#include "jfboc/problems.hpp"
#include "jfboc/valuenet.hpp"

namespace jfboc {

enum class GradientMode {
  kJfb,       // backpropagate through one attached application of T
  kImplicit,  // exact implicit differentiation (m x m solve per evaluation)
  kUnrolled,  // reverse sweep through every stored iterate
};

std::string to_string(GradientMode mode);
GradientMode gradient_mode_from_string(const std::string& name);

struct FixedPointSettings {
  double alpha = 0.1;
  /// Stop when |u_{k+1} - u_k| < tol. tol = 0 runs exactly max_iter iterations
  /// and is not treated as a failure.
  double tol = 1e-6;
  int max_iter = 100;
  bool warm_start = true;

  void validate() const;
  bool fixed_iteration_count() const { return tol == 0.0; }
};

struct FixedPointResult {
  Vector u_star;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  /// u_0 ... u_K, only when requested by the caller.
  std::vector<Vector> history;
};

/// Per-worker accumulators; merged by summation.
struct WorkCounters {
  /// Number of (dT/dtheta)^T products.
  std::int64_t work_units = 0;
  /// Dense-solve flop tally of the implicit engine (2/3 m^3 + 2 m^2 per solve).
  std::int64_t linear_solve_flops = 0;

  WorkCounters& operator+=(const WorkCounters& other) {
    work_units += other.work_units;
    linear_solve_flops += other.linear_solve_flops;
    return *this;
  }
};

/// Cotangents of one operator application pulled back to theta and z.
struct OperatorCotangent {
  Vector g_theta;
  Vector g_z;
};

/// T(u; t, z) = clamp(u + alpha * grad_u H(t, z, grad_z phi_theta(t, z), u)).
///
/// The adjoint p = grad_z phi is evaluated once at construction; every method
/// below reuses it. Derivatives treat the clamp as a projection: coordinates
/// where it is active have zero rows in dT/du, dT/dz and dT/dtheta.
class AscentOperator {
 public:
  AscentOperator(const ParamVector& theta, const ControlProblem& problem, double t, Vector z,
                 double alpha);

  const ParamVector& theta() const { return *theta_; }
  const ControlProblem& problem() const { return *problem_; }
  double time() const { return t_; }
  const Vector& state() const { return z_; }
  const AdjointVector& adjoint() const { return p_; }
  double alpha() const { return alpha_; }

  Vector apply(const Vector& u) const;
  /// Clamps u into the problem's control bounds (identity without bounds).
  Vector project(const Vector& u) const;
  /// 1 where the clamp is inactive after the ascent step at u, 0 where it binds.
  Vector active_mask(const Vector& u) const;

  /// dT/du (m x m).
  Matrix jacobian_u(const Vector& u) const;
  /// (dT/du)^T a.
  Vector vjp_u(const Vector& u, const Vector& a) const;
  /// (dT/dtheta)^T a and (dT/dz)^T a at u. Does not touch any counter.
  OperatorCotangent vjp_theta_z(const Vector& u, const Vector& a) const;

 private:
  void check_control(const Vector& u) const;

  const ParamVector* theta_;
  const ControlProblem* problem_;
  double t_;
  Vector z_;
  double alpha_;
  AdjointVector p_;
  std::optional<ControlBounds> bounds_;
};

/// One ascent step with p = grad_z phi_theta(t, z).
Vector t_apply(const ParamVector& theta, const ControlProblem& problem, double t, const Vector& z,
               const Vector& u, double alpha);

/// Iterates u_{k+1} = T(u_k) until |u_{k+1} - u_k| < tol or max_iter. Never
/// throws on non-convergence; the flag is reported in the result.
FixedPointResult solve(const AscentOperator& op, const Vector& u_init,
                       const FixedPointSettings& settings, bool keep_history = false);
FixedPointResult solve(const ParamVector& theta, const ControlProblem& problem, double t,
                       const Vector& z, const Vector& u_init, const FixedPointSettings& settings,
                       bool keep_history = false);

/// JFB: du*/dtheta ~= dT/dtheta. One work unit.
OperatorCotangent jfb_vjp(const AscentOperator& op, const Vector& u_star, const Vector& a,
                          WorkCounters& counters);

/// Solves (I - dT/du)^T y = a at u_star with a partial-pivot LU.
Vector implicit_adjoint(const AscentOperator& op, const Vector& u_star, const Vector& a,
                        WorkCounters& counters);

/// Exact implicit gradient: the JFB products applied to y. One work unit plus the solve.
OperatorCotangent implicit_vjp(const AscentOperator& op, const Vector& u_star, const Vector& a,
                               WorkCounters& counters);

/// Reverse sweep through history = [u_0, ..., u_K]; K work units. The warm-start
/// iterate u_0 is treated as a constant.
OperatorCotangent unrolled_vjp(const AscentOperator& op, const std::vector<Vector>& history,
                               const Vector& a, WorkCounters& counters);

}  // namespace jfboc
