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

#include "jfboc/problems.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <utility>

#include "jfboc/errors.hpp"

namespace jfboc {

// ---------------------------------------------------------------------------
// ControlProblem

ControlProblem::ControlProblem(double horizon, Vector target)
    : horizon_(horizon), target_(std::move(target)) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("problem horizon must be positive and finite");
  }
}

Vector ControlProblem::reference(double /*t*/) const { return target_; }

void ControlProblem::check_state(const Vector& z) const {
  if (z.size() != state_dim()) {
    throw DimensionError(name() + ": state has dimension " + std::to_string(z.size()) +
                         ", expected " + std::to_string(state_dim()));
  }
}

void ControlProblem::check_control(const Vector& u) const {
  if (u.size() != control_dim()) {
    throw DimensionError(name() + ": control has dimension " + std::to_string(u.size()) +
                         ", expected " + std::to_string(control_dim()));
  }
}

void ControlProblem::check_dims(const Vector& z, const Vector& u) const {
  check_state(z);
  check_control(u);
}

void ControlProblem::check_count(int count) {
  if (count < 1) throw ConfigError("sample_initial: count must be >= 1");
}

double hamiltonian(const ControlProblem& problem, double t, const Vector& z, const AdjointVector& p,
                   const Vector& u) {
  if (p.size() != problem.state_dim()) throw DimensionError("hamiltonian: adjoint dimension mismatch");
  return -p.dot(problem.dynamics(t, z, u)) - problem.running_cost(t, z, u);
}

Vector hamiltonian_grad_u(const ControlProblem& problem, double t, const Vector& z,
                          const AdjointVector& p, const Vector& u) {
  if (p.size() != problem.state_dim()) throw DimensionError("hamiltonian: adjoint dimension mismatch");
  const DynamicsJacobians jac = problem.dynamics_jacobians(t, z, u);
  const RunningCostDerivatives cost = problem.running_cost_derivatives(t, z, u);
  return -jac.B.transpose() * p - cost.grad_u;
}

Matrix hamiltonian_hess_uu(const ControlProblem& problem, double t, const Vector& z,
                           const AdjointVector& p, const Vector& u) {
  if (p.size() != problem.state_dim()) throw DimensionError("hamiltonian: adjoint dimension mismatch");
  const RunningCostDerivatives cost = problem.running_cost_derivatives(t, z, u);
  return -problem.dynamics_uu_contraction(t, z, u, p) - cost.hess_uu;
}

Matrix hamiltonian_grad_u_jac_z(const ControlProblem& problem, double t, const Vector& z,
                                const AdjointVector& p, const Vector& u) {
  if (p.size() != problem.state_dim()) throw DimensionError("hamiltonian: adjoint dimension mismatch");
  const RunningCostDerivatives cost = problem.running_cost_derivatives(t, z, u);
  return -problem.dynamics_uz_contraction(t, z, u, p) - cost.jac_zu;
}

// ---------------------------------------------------------------------------
// Double integrator

DoubleIntegratorProblem::DoubleIntegratorProblem() : DoubleIntegratorProblem(Options{}) {}

DoubleIntegratorProblem::DoubleIntegratorProblem(Options options)
    : ControlProblem(options.horizon, options.target), options_(std::move(options)) {
  if (options_.target.size() != 2) throw ConfigError("lqr: target must have 2 entries");
  if (options_.rho_half_width < 0.0) throw ConfigError("lqr: rho_half_width must be >= 0");
}

Vector DoubleIntegratorProblem::dynamics(double, const Vector& z, const Vector& u) const {
  check_dims(z, u);
  return Vector{{z[1], u[0]}};
}

DynamicsJacobians DoubleIntegratorProblem::dynamics_jacobians(double, const Vector& z,
                                                              const Vector& u) const {
  check_dims(z, u);
  DynamicsJacobians jac{Matrix::Zero(2, 2), Matrix::Zero(2, 1)};
  jac.A(0, 1) = 1.0;
  jac.B(1, 0) = 1.0;
  return jac;
}

Matrix DoubleIntegratorProblem::dynamics_uu_contraction(double, const Vector& z, const Vector& u,
                                                        const Vector&) const {
  check_dims(z, u);
  return Matrix::Zero(1, 1);
}

Matrix DoubleIntegratorProblem::dynamics_uz_contraction(double, const Vector& z, const Vector& u,
                                                        const Vector&) const {
  check_dims(z, u);
  return Matrix::Zero(1, 2);
}

double DoubleIntegratorProblem::running_cost(double, const Vector& z, const Vector& u) const {
  check_dims(z, u);
  return 0.5 * u.squaredNorm() + 0.5 * options_.state_weight * z.squaredNorm();
}

RunningCostDerivatives DoubleIntegratorProblem::running_cost_derivatives(double t, const Vector& z,
                                                                         const Vector& u) const {
  RunningCostDerivatives d;
  d.value = running_cost(t, z, u);
  d.grad_z = options_.state_weight * z;
  d.grad_u = u;
  d.hess_uu = Matrix::Identity(1, 1);
  d.jac_zu = Matrix::Zero(1, 2);
  return d;
}

double DoubleIntegratorProblem::terminal_cost(const Vector& z) const {
  check_state(z);
  return options_.terminal_weight * (z - target()).squaredNorm();
}

Vector DoubleIntegratorProblem::terminal_cost_grad(const Vector& z) const {
  check_state(z);
  return 2.0 * options_.terminal_weight * (z - target());
}

std::vector<Vector> DoubleIntegratorProblem::sample_initial(std::uint64_t seed, int count) const {
  check_count(count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-options_.rho_half_width, options_.rho_half_width);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vector x(2);
    x[0] = box(rng);
    x[1] = box(rng);
    out.push_back(std::move(x));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadrotor

namespace {

constexpr int kPos = 0;
constexpr int kVel = 3;
constexpr int kAng = 6;
constexpr int kRate = 9;

struct Trig {
  double sphi, cphi, sth, cth, spsi, cpsi;
};

Trig trig_of(const Vector& z) {
  const double cth = std::cos(z[kAng + 1]);
  if (std::abs(cth) < 1e-6) throw DomainError("quadrotor: pitch at +-pi/2 (Euler singularity)");
  return {std::sin(z[kAng]), std::cos(z[kAng]), std::sin(z[kAng + 1]), cth,
          std::sin(z[kAng + 2]), std::cos(z[kAng + 2])};
}

// Third column of the body-to-world rotation R = Rz(psi) Ry(theta) Rx(phi).
Eigen::Vector3d thrust_axis(const Trig& c) {
  return {c.cphi * c.sth * c.cpsi + c.sphi * c.spsi, c.cphi * c.sth * c.spsi - c.sphi * c.cpsi,
          c.cphi * c.cth};
}

// d(thrust_axis)/d(phi, theta, psi), 3 x 3.
Eigen::Matrix3d thrust_axis_jacobian(const Trig& c) {
  Eigen::Matrix3d d;
  d << -c.sphi * c.sth * c.cpsi + c.cphi * c.spsi, c.cphi * c.cth * c.cpsi,
      -c.cphi * c.sth * c.spsi + c.sphi * c.cpsi,  //
      -c.sphi * c.sth * c.spsi - c.cphi * c.cpsi, c.cphi * c.cth * c.spsi,
      c.cphi * c.sth * c.cpsi + c.sphi * c.spsi,  //
      -c.sphi * c.cth, -c.cphi * c.sth, 0.0;
  return d;
}

void check_exponent(double norm_sq) {
  if (!(norm_sq <= QuadrotorProblem::kMaxControlNormSq)) {
    throw DivergenceError("quadrotor: |u|^2 = " + std::to_string(norm_sq) +
                          " exceeds the exponential-cost guard");
  }
}

}  // namespace

QuadrotorProblem::QuadrotorProblem() : QuadrotorProblem(Options{}) {}

QuadrotorProblem::QuadrotorProblem(Options options)
    : ControlProblem(options.horizon, options.target), options_(std::move(options)) {
  if (options_.target.size() != 12) throw ConfigError("quadrotor: target must have 12 entries");
  if (options_.rho_position_center.size() != 0 && options_.rho_position_center.size() != 3) {
    throw ConfigError("quadrotor: rho_position_center must have 3 entries");
  }
}

Vector QuadrotorProblem::dynamics(double, const Vector& z, const Vector& u) const {
  check_dims(z, u);
  const Trig c = trig_of(z);
  const double thrust = 1.0 + u[0];
  const double p = z[kRate], q = z[kRate + 1], r = z[kRate + 2];
  const double tth = c.sth / c.cth;

  Vector f(12);
  f.segment<3>(kPos) = z.segment<3>(kVel);
  f.segment<3>(kVel) = thrust * thrust_axis(c) - Eigen::Vector3d::UnitZ();
  f[kAng] = p + c.sphi * tth * q + c.cphi * tth * r;
  f[kAng + 1] = c.cphi * q - c.sphi * r;
  f[kAng + 2] = (c.sphi * q + c.cphi * r) / c.cth;
  f.segment<3>(kRate) = u.segment<3>(1);
  return f;
}

DynamicsJacobians QuadrotorProblem::dynamics_jacobians(double, const Vector& z,
                                                       const Vector& u) const {
  check_dims(z, u);
  const Trig c = trig_of(z);
  const double thrust = 1.0 + u[0];
  const double q = z[kRate + 1], r = z[kRate + 2];
  const double tth = c.sth / c.cth;
  const double sec2 = 1.0 / (c.cth * c.cth);

  DynamicsJacobians jac{Matrix::Zero(12, 12), Matrix::Zero(12, 4)};
  Matrix& A = jac.A;
  A.block<3, 3>(kPos, kVel).setIdentity();
  A.block<3, 3>(kVel, kAng) = thrust * thrust_axis_jacobian(c);

  // phi_dot = p + sin(phi) tan(theta) q + cos(phi) tan(theta) r
  A(kAng, kAng) = c.cphi * tth * q - c.sphi * tth * r;
  A(kAng, kAng + 1) = (c.sphi * q + c.cphi * r) * sec2;
  A(kAng, kRate) = 1.0;
  A(kAng, kRate + 1) = c.sphi * tth;
  A(kAng, kRate + 2) = c.cphi * tth;
  // theta_dot = cos(phi) q - sin(phi) r
  A(kAng + 1, kAng) = -c.sphi * q - c.cphi * r;
  A(kAng + 1, kRate + 1) = c.cphi;
  A(kAng + 1, kRate + 2) = -c.sphi;
  // psi_dot = (sin(phi) q + cos(phi) r) / cos(theta)
  A(kAng + 2, kAng) = (c.cphi * q - c.sphi * r) / c.cth;
  A(kAng + 2, kAng + 1) = (c.sphi * q + c.cphi * r) * c.sth * sec2;
  A(kAng + 2, kRate + 1) = c.sphi / c.cth;
  A(kAng + 2, kRate + 2) = c.cphi / c.cth;

  jac.B.block<3, 1>(kVel, 0) = thrust_axis(c);
  jac.B.block<3, 3>(kRate, 1).setIdentity();
  return jac;
}

Matrix QuadrotorProblem::dynamics_uu_contraction(double, const Vector& z, const Vector& u,
                                                 const Vector& p) const {
  check_dims(z, u);
  check_state(p);
  return Matrix::Zero(4, 4);
}

Matrix QuadrotorProblem::dynamics_uz_contraction(double, const Vector& z, const Vector& u,
                                                 const Vector& p) const {
  check_dims(z, u);
  check_state(p);
  const Trig c = trig_of(z);
  Matrix out = Matrix::Zero(4, 12);
  // Only the thrust column of B depends on z, through the attitude.
  out.block<1, 3>(0, kAng) = p.segment<3>(kVel).transpose() * thrust_axis_jacobian(c);
  return out;
}

double QuadrotorProblem::running_cost(double, const Vector& z, const Vector& u) const {
  check_dims(z, u);
  const double n2 = u.squaredNorm();
  check_exponent(n2);
  return std::exp(n2);
}

RunningCostDerivatives QuadrotorProblem::running_cost_derivatives(double, const Vector& z,
                                                                  const Vector& u) const {
  check_dims(z, u);
  const double n2 = u.squaredNorm();
  check_exponent(n2);
  const double e = std::exp(n2);
  RunningCostDerivatives d;
  d.value = e;
  d.grad_z = Vector::Zero(12);
  d.grad_u = 2.0 * e * u;
  d.hess_uu = e * (2.0 * Matrix::Identity(4, 4) + 4.0 * u * u.transpose());
  d.jac_zu = Matrix::Zero(4, 12);
  return d;
}

double QuadrotorProblem::terminal_cost(const Vector& z) const {
  check_state(z);
  return options_.terminal_weight * (z - target()).squaredNorm();
}

Vector QuadrotorProblem::terminal_cost_grad(const Vector& z) const {
  check_state(z);
  return 2.0 * options_.terminal_weight * (z - target());
}

std::vector<Vector> QuadrotorProblem::sample_initial(std::uint64_t seed, int count) const {
  check_count(count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double widths[4] = {options_.rho_position_half_width, options_.rho_velocity_half_width,
                            options_.rho_angle_half_width, options_.rho_rate_half_width};
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vector x = target();
    if (options_.rho_position_center.size() == 3) x.head(3) = options_.rho_position_center;
    for (int block = 0; block < 4; ++block) {
      for (int j = 0; j < 3; ++j) x[3 * block + j] += widths[block] * unit(rng);
    }
    out.push_back(std::move(x));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bicycles

BicycleProblem::BicycleProblem() : BicycleProblem(Options{}) {}

BicycleProblem::BicycleProblem(Options options)
    : ControlProblem(options.horizon, Vector()), options_(std::move(options)) {
  const int n_bikes = options_.bikes;
  if (n_bikes < 1) throw ConfigError("bicycle: bikes must be >= 1");
  if (!(options_.wheelbase > 0.0)) throw ConfigError("bicycle: wheelbase must be positive");
  if (!(options_.cost_scale > 0.0)) throw ConfigError("bicycle: cost_scale must be positive");
  if (options_.control_weight < 0.0) throw ConfigError("bicycle: control_weight must be >= 0");
  if (options_.rho_speed_min > options_.rho_speed_max) {
    throw ConfigError("bicycle: rho speed range is empty");
  }
  if (!(options_.steering_margin > 0.0 && options_.steering_margin < std::numbers::pi / 2)) {
    throw ConfigError("bicycle: steering_margin must lie in (0, pi/2)");
  }

  const auto layout = [&](const std::vector<double>& given, double phase, const char* what) {
    Vector out(2 * n_bikes);
    if (!given.empty()) {
      if (given.size() != static_cast<std::size_t>(2 * n_bikes)) {
        throw ConfigError(std::string("bicycle: ") + what + " needs 2 * bikes entries");
      }
      for (int i = 0; i < 2 * n_bikes; ++i) out[i] = given[static_cast<std::size_t>(i)];
      return out;
    }
    for (int i = 0; i < n_bikes; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / n_bikes + phase;
      out[2 * i] = options_.layout_radius * std::cos(angle);
      out[2 * i + 1] = options_.layout_radius * std::sin(angle);
    }
    return out;
  };
  starts_ = layout(options_.starts, 0.0, "starts");
  goals_ = layout(options_.targets, std::numbers::pi / 2, "targets");
  set_target(reference(horizon()));
}

Vector BicycleProblem::reference(double t) const {
  const int n_bikes = options_.bikes;
  const double T = horizon();
  Vector ref(4 * n_bikes);
  for (int i = 0; i < n_bikes; ++i) {
    const Eigen::Vector2d s = starts_.segment<2>(2 * i);
    const Eigen::Vector2d g = goals_.segment<2>(2 * i);
    const Eigen::Vector2d d = g - s;
    ref.segment<2>(4 * i) = s + (t / T) * d;
    ref[4 * i + 2] = std::atan2(d.y(), d.x());
    ref[4 * i + 3] = d.norm() / T;
  }
  return ref;
}

std::optional<ControlBounds> BicycleProblem::control_bounds() const {
  const double limit = std::numbers::pi / 2 - options_.steering_margin;
  const double inf = std::numeric_limits<double>::infinity();
  ControlBounds b{Vector(control_dim()), Vector(control_dim())};
  for (int i = 0; i < options_.bikes; ++i) {
    b.lower[2 * i] = -limit;
    b.upper[2 * i] = limit;
    b.lower[2 * i + 1] = -inf;
    b.upper[2 * i + 1] = inf;
  }
  return b;
}

void BicycleProblem::check_steering(const Vector& u) const {
  for (int i = 0; i < options_.bikes; ++i) {
    if (!(std::abs(u[2 * i]) < std::numbers::pi / 2)) {
      throw DomainError("bicycle: steering angle " + std::to_string(u[2 * i]) +
                        " outside (-pi/2, pi/2)");
    }
  }
}

Vector BicycleProblem::dynamics(double, const Vector& z, const Vector& u) const {
  check_dims(z, u);
  check_steering(u);
  const double K = options_.wheelbase;
  Vector f(z.size());
  for (int i = 0; i < options_.bikes; ++i) {
    const double psi = z[4 * i + 2], v = z[4 * i + 3];
    f[4 * i] = v * std::cos(psi);
    f[4 * i + 1] = v * std::sin(psi);
    f[4 * i + 2] = v / K * std::tan(u[2 * i]);
    f[4 * i + 3] = u[2 * i + 1];
  }
  return f;
}

DynamicsJacobians BicycleProblem::dynamics_jacobians(double, const Vector& z, const Vector& u) const {
  check_dims(z, u);
  check_steering(u);
  const double K = options_.wheelbase;
  const int n = state_dim(), m = control_dim();
  DynamicsJacobians jac{Matrix::Zero(n, n), Matrix::Zero(n, m)};
  for (int i = 0; i < options_.bikes; ++i) {
    const int s = 4 * i, c = 2 * i;
    const double psi = z[s + 2], v = z[s + 3];
    const double tan_d = std::tan(u[c]);
    jac.A(s, s + 2) = -v * std::sin(psi);
    jac.A(s, s + 3) = std::cos(psi);
    jac.A(s + 1, s + 2) = v * std::cos(psi);
    jac.A(s + 1, s + 3) = std::sin(psi);
    jac.A(s + 2, s + 3) = tan_d / K;
    jac.B(s + 2, c) = v / K * (1.0 + tan_d * tan_d);
    jac.B(s + 3, c + 1) = 1.0;
  }
  return jac;
}

Matrix BicycleProblem::dynamics_uu_contraction(double, const Vector& z, const Vector& u,
                                               const Vector& p) const {
  check_dims(z, u);
  check_state(p);
  check_steering(u);
  const double K = options_.wheelbase;
  Matrix out = Matrix::Zero(control_dim(), control_dim());
  for (int i = 0; i < options_.bikes; ++i) {
    const double tan_d = std::tan(u[2 * i]);
    const double sec2 = 1.0 + tan_d * tan_d;
    out(2 * i, 2 * i) = p[4 * i + 2] * z[4 * i + 3] / K * 2.0 * tan_d * sec2;
  }
  return out;
}

Matrix BicycleProblem::dynamics_uz_contraction(double, const Vector& z, const Vector& u,
                                               const Vector& p) const {
  check_dims(z, u);
  check_state(p);
  check_steering(u);
  const double K = options_.wheelbase;
  Matrix out = Matrix::Zero(control_dim(), state_dim());
  for (int i = 0; i < options_.bikes; ++i) {
    const double tan_d = std::tan(u[2 * i]);
    out(2 * i, 4 * i + 3) = p[4 * i + 2] / K * (1.0 + tan_d * tan_d);
  }
  return out;
}

double BicycleProblem::running_cost(double t, const Vector& z, const Vector& u) const {
  check_dims(z, u);
  const double tracking = (z - reference(t)).squaredNorm();
  return options_.cost_scale * (tracking + 0.5 * options_.control_weight * u.squaredNorm());
}

RunningCostDerivatives BicycleProblem::running_cost_derivatives(double t, const Vector& z,
                                                                const Vector& u) const {
  check_dims(z, u);
  const double s = options_.cost_scale;
  const double r = options_.control_weight;
  const Vector e = z - reference(t);
  RunningCostDerivatives d;
  d.value = s * (e.squaredNorm() + 0.5 * r * u.squaredNorm());
  d.grad_z = 2.0 * s * e;
  d.grad_u = s * r * u;
  d.hess_uu = s * r * Matrix::Identity(control_dim(), control_dim());
  d.jac_zu = Matrix::Zero(control_dim(), state_dim());
  return d;
}

double BicycleProblem::terminal_cost(const Vector& z) const {
  check_state(z);
  return options_.cost_scale * (z - target()).squaredNorm();
}

Vector BicycleProblem::terminal_cost_grad(const Vector& z) const {
  check_state(z);
  return 2.0 * options_.cost_scale * (z - target());
}

std::vector<Vector> BicycleProblem::sample_initial(std::uint64_t seed, int count) const {
  check_count(count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-options_.rho_position_half_width,
                                             options_.rho_position_half_width);
  std::uniform_real_distribution<double> heading(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> speed(options_.rho_speed_min, options_.rho_speed_max);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Vector x(state_dim());
    for (int i = 0; i < options_.bikes; ++i) {
      x[4 * i] = starts_[2 * i] + box(rng);
      x[4 * i + 1] = starts_[2 * i + 1] + box(rng);
      x[4 * i + 2] = heading(rng);
      x[4 * i + 3] = speed(rng);
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace jfboc
