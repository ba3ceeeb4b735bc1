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
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jfboc/valuenet.hpp"

namespace jfboc {

/// Costate p; along optimal trajectories p = grad_z phi(t, z).
using AdjointVector = Vector;

struct DynamicsJacobians {
  Matrix A;  // df/dz, n x n
  Matrix B;  // df/du, n x m
};

struct RunningCostDerivatives {
  double value = 0.0;
  Vector grad_z;   // n
  Vector grad_u;   // m
  Matrix hess_uu;  // m x m
  Matrix jac_zu;   // m x n, entry (j, k) = d^2 L / du_j dz_k
};

/// Box on the controls enforced inside the fixed-point iteration.
struct ControlBounds {
  Vector lower;
  Vector upper;
};

/// Optimal control problem: z' = f(t, z, u), cost int L dt + G(z(T)), x ~ rho.
class ControlProblem {
 public:
  virtual ~ControlProblem() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  double horizon() const { return horizon_; }

  virtual Vector dynamics(double t, const Vector& z, const Vector& u) const = 0;
  virtual DynamicsJacobians dynamics_jacobians(double t, const Vector& z, const Vector& u) const = 0;
  /// sum_i p_i d^2 f_i / du^2 (m x m).
  virtual Matrix dynamics_uu_contraction(double t, const Vector& z, const Vector& u,
                                         const Vector& p) const = 0;
  /// d^2 <p, f> / du dz (m x n), p held constant.
  virtual Matrix dynamics_uz_contraction(double t, const Vector& z, const Vector& u,
                                         const Vector& p) const = 0;

  virtual double running_cost(double t, const Vector& z, const Vector& u) const = 0;
  virtual RunningCostDerivatives running_cost_derivatives(double t, const Vector& z,
                                                          const Vector& u) const = 0;
  virtual double terminal_cost(const Vector& z) const = 0;
  virtual Vector terminal_cost_grad(const Vector& z) const = 0;

  /// count i.i.d. draws from rho; deterministic per seed.
  virtual std::vector<Vector> sample_initial(std::uint64_t seed, int count) const = 0;

  /// Tracking reference z_ref(t); problems that ignore it return the target.
  virtual Vector reference(double t) const;
  const Vector& target() const { return target_; }

  virtual std::optional<ControlBounds> control_bounds() const { return std::nullopt; }

 protected:
  ControlProblem(double horizon, Vector target);
  void set_target(Vector target) { target_ = std::move(target); }

  void check_state(const Vector& z) const;
  void check_control(const Vector& u) const;
  void check_dims(const Vector& z, const Vector& u) const;
  static void check_count(int count);

 private:
  double horizon_;
  Vector target_;
};

// Generalized Hamiltonian H(t, z, p, u) = -<p, f(t, z, u)> - L(t, z, u) and its derivatives.
double hamiltonian(const ControlProblem& problem, double t, const Vector& z, const AdjointVector& p,
                   const Vector& u);
/// -B^T p - grad_u L.
Vector hamiltonian_grad_u(const ControlProblem& problem, double t, const Vector& z,
                          const AdjointVector& p, const Vector& u);
Matrix hamiltonian_hess_uu(const ControlProblem& problem, double t, const Vector& z,
                           const AdjointVector& p, const Vector& u);
/// d(grad_u H)/dz with p held fixed (m x n).
Matrix hamiltonian_grad_u_jac_z(const ControlProblem& problem, double t, const Vector& z,
                                const AdjointVector& p, const Vector& u);

/// Double integrator with L = 0.5 |u|^2 + 0.5 q |z|^2 and G = w |z - target|^2.
class DoubleIntegratorProblem final : public ControlProblem {
 public:
  struct Options {
    double horizon = 1.0;
    double state_weight = 0.0;
    double terminal_weight = 1.0;
    Vector target = Vector::Zero(2);
    double rho_half_width = 1.0;
  };

  DoubleIntegratorProblem();
  explicit DoubleIntegratorProblem(Options options);

  std::string name() const override { return "lqr"; }
  int state_dim() const override { return 2; }
  int control_dim() const override { return 1; }
  const Options& options() const { return options_; }

  Vector dynamics(double t, const Vector& z, const Vector& u) const override;
  DynamicsJacobians dynamics_jacobians(double t, const Vector& z, const Vector& u) const override;
  Matrix dynamics_uu_contraction(double t, const Vector& z, const Vector& u,
                                 const Vector& p) const override;
  Matrix dynamics_uz_contraction(double t, const Vector& z, const Vector& u,
                                 const Vector& p) const override;
  double running_cost(double t, const Vector& z, const Vector& u) const override;
  RunningCostDerivatives running_cost_derivatives(double t, const Vector& z,
                                                  const Vector& u) const override;
  double terminal_cost(const Vector& z) const override;
  Vector terminal_cost_grad(const Vector& z) const override;
  std::vector<Vector> sample_initial(std::uint64_t seed, int count) const override;

 private:
  Options options_;
};

/// 12-state rigid-body quadrotor (position, velocity, ZYX Euler angles, body rates),
/// unit mass and inertia, g = 1. Controls are deviations from hover trim:
/// u = (thrust - g, tau_x, tau_y, tau_z). L = exp(|u|^2), G = w |z - target|^2.
class QuadrotorProblem final : public ControlProblem {
 public:
  struct Options {
    double horizon = 1.0;
    double terminal_weight = 1.0;
    Vector target = Vector::Zero(12);
    /// Centre of the initial positions; empty means the target position.
    Vector rho_position_center;
    double rho_position_half_width = 0.5;
    double rho_velocity_half_width = 0.1;
    double rho_angle_half_width = 0.1;
    double rho_rate_half_width = 0.0;
  };

  /// Above this |u|^2 the exponential cost reports divergence instead of overflowing.
  static constexpr double kMaxControlNormSq = 30.0;

  QuadrotorProblem();
  explicit QuadrotorProblem(Options options);

  std::string name() const override { return "quadrotor"; }
  int state_dim() const override { return 12; }
  int control_dim() const override { return 4; }
  const Options& options() const { return options_; }

  Vector dynamics(double t, const Vector& z, const Vector& u) const override;
  DynamicsJacobians dynamics_jacobians(double t, const Vector& z, const Vector& u) const override;
  Matrix dynamics_uu_contraction(double t, const Vector& z, const Vector& u,
                                 const Vector& p) const override;
  Matrix dynamics_uz_contraction(double t, const Vector& z, const Vector& u,
                                 const Vector& p) const override;
  double running_cost(double t, const Vector& z, const Vector& u) const override;
  RunningCostDerivatives running_cost_derivatives(double t, const Vector& z,
                                                  const Vector& u) const override;
  double terminal_cost(const Vector& z) const override;
  Vector terminal_cost_grad(const Vector& z) const override;
  std::vector<Vector> sample_initial(std::uint64_t seed, int count) const override;

 private:
  Options options_;
};

/// N independent kinematic bicycles, state (x, y, heading, speed) per bike and
/// controls (steering, acceleration). Each bike tracks a straight line from a
/// nominal start to its target:
///   L = s (|z - z_ref(t)|^2 + 0.5 r |u|^2),  G = s |z - z_target|^2.
class BicycleProblem final : public ControlProblem {
 public:
  struct Options {
    int bikes = 1;
    double wheelbase = 1.0;
    double horizon = 1.0;
    double cost_scale = 1.0;
    double control_weight = 1.0;
    /// Starts on a ring of this radius, targets a quarter turn further.
    double layout_radius = 1.0;
    /// Optional explicit layouts, 2 * bikes entries each (x0, y0, x1, y1, ...).
    std::vector<double> starts;
    std::vector<double> targets;
    double rho_position_half_width = 0.5;
    double rho_speed_min = 0.5;
    double rho_speed_max = 1.5;
    /// Steering iterates are clamped to |u1| <= pi/2 - steering_margin.
    double steering_margin = 0.1;
  };

  BicycleProblem();
  explicit BicycleProblem(Options options);

  std::string name() const override { return "bicycle"; }
  int state_dim() const override { return 4 * options_.bikes; }
  int control_dim() const override { return 2 * options_.bikes; }
  const Options& options() const { return options_; }

  Vector dynamics(double t, const Vector& z, const Vector& u) const override;
  DynamicsJacobians dynamics_jacobians(double t, const Vector& z, const Vector& u) const override;
  Matrix dynamics_uu_contraction(double t, const Vector& z, const Vector& u,
                                 const Vector& p) const override;
  Matrix dynamics_uz_contraction(double t, const Vector& z, const Vector& u,
                                 const Vector& p) const override;
  double running_cost(double t, const Vector& z, const Vector& u) const override;
  RunningCostDerivatives running_cost_derivatives(double t, const Vector& z,
                                                  const Vector& u) const override;
  double terminal_cost(const Vector& z) const override;
  Vector terminal_cost_grad(const Vector& z) const override;
  std::vector<Vector> sample_initial(std::uint64_t seed, int count) const override;
  Vector reference(double t) const override;
  std::optional<ControlBounds> control_bounds() const override;

  const Vector& starts() const { return starts_; }
  const Vector& goals() const { return goals_; }

 private:
  void check_steering(const Vector& u) const;

  Options options_;
  Vector starts_;  // 2 * bikes
  Vector goals_;   // 2 * bikes
};

}  // namespace jfboc
