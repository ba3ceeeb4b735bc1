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
#include <random>
#include <string>
#include <vector>

#include "jfboc/fixedpoint.hpp"
#include "jfboc/problems.hpp"
#include "jfboc/rollout.hpp"
#include "jfboc/valuenet.hpp"

namespace jfboc {

// Numerical probes of the assumptions behind the JFB descent guarantee. Every
// quantity here is sampled evidence on finitely many points, never a certificate.

/// One point (t, z) with two controls to compare under T.
struct RegionSample {
  double t = 0.0;
  Vector z;
  Vector u1;
  Vector u2;
};

using RegionSampler = std::function<RegionSample(std::mt19937_64&)>;

/// t ~ U[0, T], z from the problem's initial distribution, controls ~ N(0, scale^2)
/// projected onto the control bounds.
RegionSampler default_region_sampler(const ControlProblem& problem, double control_scale = 1.0);

/// max ||T(u1) - T(u2)|| / ||u1 - u2|| over `pairs` samples; coincident pairs are skipped.
double estimate_contraction(const ParamVector& theta, const ControlProblem& problem, double alpha,
                            const RegionSampler& sampler, int pairs, std::uint64_t seed);

/// Dense M = dT/dtheta (m x P) at (t, z, u); row i is the JFB pullback of e_i.
Matrix jacobian_T_theta(const AscentOperator& op, const Vector& u);
Matrix jacobian_T_theta(const ParamVector& theta, const ControlProblem& problem, double t,
                        const Vector& z, const Vector& u, double alpha);

struct BoundsReport {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double lambda_minus = 0.0;  // 1 / sigma_max^2
  double lambda_plus = 0.0;   // 1 / sigma_min^2, +inf when M is rank deficient
  double beta_hat = 0.0;      // 1 / sigma_max^2
  int rank = 0;
  bool full_row_rank = false;
  bool condition_ok = false;  // lambda_minus - gamma * lambda_plus > 0
  double margin = 0.0;        // lambda_minus - gamma * lambda_plus
};

BoundsReport assumption_bounds_check(const Matrix& M, double gamma_hat);

/// Largest relative gap between the extreme eigenvalues of (M M^T)^{-1} and
/// 1 / sigma(M)^2, computed through an eigen-decomposition of M M^T.
double lambda_sigma_duality_residual(const Matrix& M);

/// Per engine call along a trajectory, in forward time order. v uses the exact
/// implicit pullback and w the JFB pullback of the same cotangent, both divided by dt.
struct IntegrandSeries {
  std::vector<double> times;
  std::vector<Vector> v;
  std::vector<Vector> w;
  std::vector<Vector> a_over_dt;
  std::vector<Vector> states;    // z at each entry (for dense M)
  std::vector<Vector> controls;  // u* at each entry
  double dt = 0.0;
  double horizon = 0.0;

  std::size_t size() const { return v.size(); }
  Vector integral_v() const;  // sum dt v
  Vector integral_w() const;  // sum dt w
};

IntegrandSeries integrand_series(const ParamVector& theta, const Vector& x,
                                 const ControlProblem& problem, const Discretization& disc,
                                 const FixedPointSettings& fp);

/// min_k ||a_over_dt[k]||.
double eta_check(const IntegrandSeries& series);

struct InnerProductBoundStep {
  double lhs = 0.0;        // <v, w>
  double rhs = 0.0;        // ||M v||^2 (lambda_minus - gamma lambda_plus) = delta^2
  double psi_norm = 0.0;   // ||M v||
  bool holds = false;      // lhs >= rhs
};

/// Per-step inner-product bound using the supplied uniform constants.
std::vector<InnerProductBoundStep> inner_product_bound_check(const IntegrandSeries& series, const std::vector<Matrix>& M,
                                     double lambda_minus, double lambda_plus, double gamma);

struct VariationReport {
  Vector C_v;
  Vector C_w;
  double max_variation_v = 0.0;  // max_k ||v[k] - C_v||
  double max_variation_w = 0.0;
  /// Filled only when per-step M and constants are supplied.
  std::vector<double> bound_v;   // ||M v[k]|| sqrt(lambda_minus - gamma lambda_plus)
  std::vector<double> bound_w;
  int satisfied_steps = 0;
  bool all_satisfied = false;
};

VariationReport variation_check(const IntegrandSeries& series);
VariationReport variation_check(const IntegrandSeries& series, const std::vector<Matrix>& M,
                                    double lambda_minus, double lambda_plus, double gamma);

/// |I1^T I2 - T (sum dt v^T w - sum dt (v - C_v)^T (w - C_w))| relative to the
/// magnitude of the terms involved.
double centered_identity_residual(const IntegrandSeries& series);

struct DescentReport {
  /// Exact gradient: mean over the batch of backward(IMPLICIT).
  Vector g_true;
  /// JFB direction sharing the exact cotangents: mean of sum dt w.
  Vector g_jfb;
  /// Output of the JFB training engine, whose state cotangent runs through T once.
  Vector g_jfb_engine;
  double inner_product = 0.0;
  double cosine = 0.0;
  double engine_inner_product = 0.0;
  double engine_cosine = 0.0;
  double centered_identity_residual = 0.0;  // max over the batch
  bool degenerate = false;                // g_true or g_jfb vanished
};

DescentReport descent_check(const ParamVector& theta, const std::vector<Vector>& batch,
                            const ControlProblem& problem, const Discretization& disc,
                            const FixedPointSettings& fp, int workers = 1);

struct TheoryCheckSettings {
  int contraction_pairs = 200;
  int samples = 4;
  std::uint64_t seed = 0;
  int workers = 1;
  /// Dense-M checks also need P <= kMaxDenseParams.
  bool dense = true;
};

struct TheoryReport {
  double gamma_hat = 0.0;
  double eta_hat = 0.0;
  bool dense_checks = false;
  std::string notice;

  // Dense-M quantities, uniform over every sampled trajectory point.
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double beta_hat = 0.0;
  bool condition_ok = false;
  double duality_residual = 0.0;
  /// gamma eta / (beta (1 + gamma)) with the sampled beta_hat.
  double c_surrogate = 0.0;

  std::vector<double> step_inner_products;
  std::vector<double> step_bounds;
  int inner_product_bound_holds = 0;
  int variation_holds = 0;
  int steps_checked = 0;

  double C_v_norm = 0.0;
  double C_w_norm = 0.0;
  double max_variation_v = 0.0;
  double max_variation_w = 0.0;

  DescentReport descent;
};

TheoryReport theory_report(const ParamVector& theta, const ControlProblem& problem,
                           const Discretization& disc, const FixedPointSettings& fp,
                           const TheoryCheckSettings& settings);

}  // namespace jfboc
