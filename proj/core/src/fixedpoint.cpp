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

#include "jfboc/fixedpoint.hpp"

#include <cmath>
#include <utility>

#include <Eigen/LU>

#include "jfboc/errors.hpp"

namespace jfboc {

std::string to_string(GradientMode mode) {
  switch (mode) {
    case GradientMode::kJfb:
      return "jfb";
    case GradientMode::kImplicit:
      return "implicit";
    case GradientMode::kUnrolled:
      return "unrolled";
  }
  return "unknown";
}

GradientMode gradient_mode_from_string(const std::string& name) {
  if (name == "jfb") return GradientMode::kJfb;
  if (name == "implicit") return GradientMode::kImplicit;
  if (name == "unrolled" || name == "ad") return GradientMode::kUnrolled;
  throw ConfigError("unknown gradient mode '" + name + "' (expected jfb, implicit or unrolled)");
}

void FixedPointSettings::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("fixedpoint: alpha must be > 0");
  if (!(tol >= 0.0)) throw ConfigError("fixedpoint: tol must be >= 0");
  if (max_iter < 1) throw ConfigError("fixedpoint: max_iter must be >= 1");
}

AscentOperator::AscentOperator(const ParamVector& theta, const ControlProblem& problem, double t,
                               Vector z, double alpha)
    : theta_(&theta),
      problem_(&problem),
      t_(t),
      z_(std::move(z)),
      alpha_(alpha),
      p_(grad_z_phi(theta, t, z_)),
      bounds_(problem.control_bounds()) {
  if (z_.size() != problem.state_dim()) throw DimensionError("AscentOperator: state dimension mismatch");
}

void AscentOperator::check_control(const Vector& u) const {
  if (u.size() != problem_->control_dim()) {
    throw DimensionError("AscentOperator: control dimension mismatch");
  }
}

Vector AscentOperator::project(const Vector& u) const {
  if (!bounds_) return u;
  return u.cwiseMax(bounds_->lower).cwiseMin(bounds_->upper);
}

Vector AscentOperator::apply(const Vector& u) const {
  check_control(u);
  return project(u + alpha_ * hamiltonian_grad_u(*problem_, t_, z_, p_, u));
}

Vector AscentOperator::active_mask(const Vector& u) const {
  check_control(u);
  Vector mask = Vector::Ones(u.size());
  if (!bounds_) return mask;
  const Vector step = u + alpha_ * hamiltonian_grad_u(*problem_, t_, z_, p_, u);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (step[i] < bounds_->lower[i] || step[i] > bounds_->upper[i]) mask[i] = 0.0;
  }
  return mask;
}

Matrix AscentOperator::jacobian_u(const Vector& u) const {
  const Vector mask = active_mask(u);
  Matrix jac = Matrix::Identity(u.size(), u.size()) +
               alpha_ * hamiltonian_hess_uu(*problem_, t_, z_, p_, u);
  return mask.asDiagonal() * jac;
}

Vector AscentOperator::vjp_u(const Vector& u, const Vector& a) const {
  check_control(a);
  const Vector masked = active_mask(u).cwiseProduct(a);
  const Matrix hess = hamiltonian_hess_uu(*problem_, t_, z_, p_, u);
  return masked + alpha_ * hess.transpose() * masked;
}

OperatorCotangent AscentOperator::vjp_theta_z(const Vector& u, const Vector& a) const {
  check_control(a);
  const Vector masked = active_mask(u).cwiseProduct(a);
  const DynamicsJacobians jac = problem_->dynamics_jacobians(t_, z_, u);
  const Vector direction = jac.B * masked;
  const SecondOrderProducts so = second_order_products(*theta_, t_, z_, direction);
  const Matrix jac_z = hamiltonian_grad_u_jac_z(*problem_, t_, z_, p_, u);

  OperatorCotangent out;
  out.g_theta = -alpha_ * so.mixed;
  out.g_z = alpha_ * (jac_z.transpose() * masked - so.hvp);
  return out;
}

Vector t_apply(const ParamVector& theta, const ControlProblem& problem, double t, const Vector& z,
               const Vector& u, double alpha) {
  return AscentOperator(theta, problem, t, z, alpha).apply(u);
}

FixedPointResult solve(const AscentOperator& op, const Vector& u_init,
                       const FixedPointSettings& settings, bool keep_history) {
  settings.validate();
  FixedPointResult result;
  Vector u = u_init;
  if (keep_history) result.history.push_back(u);
  for (int k = 0; k < settings.max_iter; ++k) {
    Vector next = op.apply(u);
    if (!next.allFinite()) throw DivergenceError("fixed-point iterate became non-finite");
    result.residual = (next - u).norm();
    result.iterations = k + 1;
    u = std::move(next);
    if (keep_history) result.history.push_back(u);
    if (result.residual < settings.tol) {
      result.converged = true;
      break;
    }
  }
  result.u_star = std::move(u);
  return result;
}

FixedPointResult solve(const ParamVector& theta, const ControlProblem& problem, double t,
                       const Vector& z, const Vector& u_init, const FixedPointSettings& settings,
                       bool keep_history) {
  return solve(AscentOperator(theta, problem, t, z, settings.alpha), u_init, settings, keep_history);
}

OperatorCotangent jfb_vjp(const AscentOperator& op, const Vector& u_star, const Vector& a,
                          WorkCounters& counters) {
  counters.work_units += 1;
  return op.vjp_theta_z(u_star, a);
}

Vector implicit_adjoint(const AscentOperator& op, const Vector& u_star, const Vector& a,
                        WorkCounters& counters) {
  const Eigen::Index m = u_star.size();
  const Matrix system = (Matrix::Identity(m, m) - op.jacobian_u(u_star)).transpose();
  const Eigen::PartialPivLU<Matrix> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    throw SingularSystemError("implicit engine: I - dT/du is singular (rcond = " +
                              std::to_string(rcond) + ")");
  }
  Vector y = lu.solve(a);
  if (!y.allFinite()) throw SingularSystemError("implicit engine: non-finite solution");
  counters.linear_solve_flops += (2 * m * m * m) / 3 + 2 * m * m;
  return y;
}

OperatorCotangent implicit_vjp(const AscentOperator& op, const Vector& u_star, const Vector& a,
                               WorkCounters& counters) {
  const Vector y = implicit_adjoint(op, u_star, a, counters);
  counters.work_units += 1;
  return op.vjp_theta_z(u_star, y);
}

OperatorCotangent unrolled_vjp(const AscentOperator& op, const std::vector<Vector>& history,
                               const Vector& a, WorkCounters& counters) {
  if (history.size() < 2) {
    throw ConfigError("unrolled engine: iterate history missing (rollout must run in unrolled mode)");
  }
  OperatorCotangent total{Vector::Zero(static_cast<Eigen::Index>(op.theta().size())),
                          Vector::Zero(op.state().size())};
  Vector cot = a;
  for (std::size_t k = history.size() - 1; k >= 1; --k) {
    const Vector& u_prev = history[k - 1];
    const OperatorCotangent step = op.vjp_theta_z(u_prev, cot);
    total.g_theta += step.g_theta;
    total.g_z += step.g_z;
    counters.work_units += 1;
    if (k > 1) cot = op.vjp_u(u_prev, cot);
  }
  return total;
}

}  // namespace jfboc
