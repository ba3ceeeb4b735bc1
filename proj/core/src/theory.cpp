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

#include "jfboc/theory.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "jfboc/errors.hpp"
#include "jfboc/parallel.hpp"
#include "jfboc/training.hpp"

namespace jfboc {

RegionSampler default_region_sampler(const ControlProblem& problem, double control_scale) {
  const ControlProblem* pr = &problem;
  return [pr, control_scale](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> time(0.0, pr->horizon());
    std::normal_distribution<double> normal(0.0, control_scale);
    RegionSample s;
    s.t = time(rng);
    s.z = pr->sample_initial(rng(), 1).front();
    const Eigen::Index m = pr->control_dim();
    s.u1 = Vector(m);
    s.u2 = Vector(m);
    for (Eigen::Index i = 0; i < m; ++i) s.u1[i] = normal(rng);
    for (Eigen::Index i = 0; i < m; ++i) s.u2[i] = normal(rng);
    if (const auto b = pr->control_bounds()) {
      s.u1 = s.u1.cwiseMax(b->lower).cwiseMin(b->upper);
      s.u2 = s.u2.cwiseMax(b->lower).cwiseMin(b->upper);
    }
    return s;
  };
}

double estimate_contraction(const ParamVector& theta, const ControlProblem& problem, double alpha,
                            const RegionSampler& sampler, int pairs, std::uint64_t seed) {
  if (pairs < 1) throw ConfigError("estimate_contraction: pairs must be >= 1");
  std::mt19937_64 rng(seed);
  double gamma = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const RegionSample s = sampler(rng);
    const double gap = (s.u1 - s.u2).norm();
    if (gap == 0.0) continue;
    const AscentOperator op(theta, problem, s.t, s.z, alpha);
    gamma = std::max(gamma, (op.apply(s.u1) - op.apply(s.u2)).norm() / gap);
  }
  return gamma;
}

Matrix jacobian_T_theta(const AscentOperator& op, const Vector& u) {
  const ParamVector& theta = op.theta();
  if (theta.size() > kMaxDenseParams) {
    throw DimensionError("jacobian_T_theta: " + std::to_string(theta.size()) +
                         " parameters exceed the dense limit of " +
                         std::to_string(kMaxDenseParams));
  }
  const Eigen::Index m = u.size();
  Matrix M(m, static_cast<Eigen::Index>(theta.size()));
  WorkCounters scratch;
  for (Eigen::Index i = 0; i < m; ++i) {
    M.row(i) = jfb_vjp(op, u, Vector::Unit(m, i), scratch).g_theta.transpose();
  }
  return M;
}

Matrix jacobian_T_theta(const ParamVector& theta, const ControlProblem& problem, double t,
                        const Vector& z, const Vector& u, double alpha) {
  const AscentOperator op(theta, problem, t, z, alpha);
  return jacobian_T_theta(op, u);
}

BoundsReport assumption_bounds_check(const Matrix& M, double gamma_hat) {
  if (M.rows() == 0 || M.cols() == 0) throw DimensionError("assumption_bounds_check: empty M");
  BoundsReport r;
  const Eigen::JacobiSVD<Matrix> svd(M);
  const Vector& s = svd.singularValues();
  const Eigen::Index k = std::min(M.rows(), M.cols());
  r.sigma_max = s[0];
  // M M^T is rows x rows; with fewer columns than rows its smallest eigenvalue is zero.
  r.sigma_min = M.rows() <= M.cols() ? s[k - 1] : 0.0;
  const double tol = std::max(M.rows(), M.cols()) * std::numeric_limits<double>::epsilon() *
                     std::max(r.sigma_max, std::numeric_limits<double>::min());
  r.rank = 0;
  for (Eigen::Index i = 0; i < k; ++i) r.rank += s[i] > tol ? 1 : 0;
  r.full_row_rank = r.rank == M.rows();

  const double inf = std::numeric_limits<double>::infinity();
  r.lambda_minus = r.sigma_max > 0.0 ? 1.0 / (r.sigma_max * r.sigma_max) : inf;
  r.lambda_plus = r.full_row_rank ? 1.0 / (r.sigma_min * r.sigma_min) : inf;
  r.beta_hat = r.lambda_minus;
  r.margin = r.lambda_minus - gamma_hat * r.lambda_plus;
  if (gamma_hat == 0.0 && std::isinf(r.lambda_plus)) r.margin = r.lambda_minus;
  r.condition_ok = r.full_row_rank && std::isfinite(r.margin) && r.margin > 0.0;
  return r;
}

double lambda_sigma_duality_residual(const Matrix& M) {
  const BoundsReport b = assumption_bounds_check(M, 0.0);
  if (!b.full_row_rank) return std::numeric_limits<double>::infinity();
  const Matrix gram = M * M.transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();  // ascending
  const double inv_max = 1.0 / ev[0];
  const double inv_min = 1.0 / ev[ev.size() - 1];
  return std::max(std::abs(inv_max - b.lambda_plus) / b.lambda_plus,
                  std::abs(inv_min - b.lambda_minus) / b.lambda_minus);
}

Vector IntegrandSeries::integral_v() const {
  Vector out = Vector::Zero(v.empty() ? 0 : v.front().size());
  for (const Vector& x : v) out += dt * x;
  return out;
}

Vector IntegrandSeries::integral_w() const {
  Vector out = Vector::Zero(w.empty() ? 0 : w.front().size());
  for (const Vector& x : w) out += dt * x;
  return out;
}

namespace {

struct SeriesWithGradient {
  IntegrandSeries series;
  Vector grad_implicit;
  RolloutResult forward;
};

SeriesWithGradient build_series(const ParamVector& theta, const Vector& x,
                                const ControlProblem& problem, const Discretization& disc,
                                const FixedPointSettings& fp) {
  SeriesWithGradient out;
  out.forward = rollout(theta, x, problem, disc, fp, GradientMode::kImplicit);
  IntegrandSeries& s = out.series;
  s.dt = disc.dt;
  const double inv_dt = 1.0 / disc.dt;
  WorkCounters scratch;
  const BackwardResult br = backward(
      theta, out.forward, problem, disc, GradientMode::kImplicit, fp,
      [&](const StepSensitivity& info) {
        const OperatorCotangent jfb = jfb_vjp(*info.op, info.solve->u, info.cotangent, scratch);
        s.times.push_back(info.solve->t);
        s.v.push_back(inv_dt * info.pulled.g_theta);
        s.w.push_back(inv_dt * jfb.g_theta);
        s.a_over_dt.push_back(inv_dt * info.cotangent);
        s.states.push_back(info.solve->z);
        s.controls.push_back(info.solve->u);
      });
  // The recursion runs backwards in time.
  std::reverse(s.times.begin(), s.times.end());
  std::reverse(s.v.begin(), s.v.end());
  std::reverse(s.w.begin(), s.w.end());
  std::reverse(s.a_over_dt.begin(), s.a_over_dt.end());
  std::reverse(s.states.begin(), s.states.end());
  std::reverse(s.controls.begin(), s.controls.end());
  s.horizon = s.dt * static_cast<double>(s.size());
  out.grad_implicit = br.grad_theta;
  return out;
}

double safe_cosine(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace

IntegrandSeries integrand_series(const ParamVector& theta, const Vector& x,
                                 const ControlProblem& problem, const Discretization& disc,
                                 const FixedPointSettings& fp) {
  return build_series(theta, x, problem, disc, fp).series;
}

double eta_check(const IntegrandSeries& series) {
  if (series.size() == 0) throw ConfigError("eta_check: empty series");
  double eta = std::numeric_limits<double>::infinity();
  for (const Vector& a : series.a_over_dt) eta = std::min(eta, a.norm());
  return eta;
}

std::vector<InnerProductBoundStep> inner_product_bound_check(const IntegrandSeries& series, const std::vector<Matrix>& M,
                                     double lambda_minus, double lambda_plus, double gamma) {
  if (M.size() != series.size()) {
    throw DimensionError("inner_product_bound_check: need one M per series entry");
  }
  const double gap = lambda_minus - gamma * lambda_plus;
  std::vector<InnerProductBoundStep> out(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    InnerProductBoundStep& st = out[k];
    st.lhs = series.v[k].dot(series.w[k]);
    st.psi_norm = (M[k] * series.v[k]).norm();
    st.rhs = st.psi_norm * st.psi_norm * gap;
    if (st.psi_norm == 0.0) st.rhs = 0.0;
    st.holds = st.lhs >= st.rhs;
  }
  return out;
}

namespace {

VariationReport averages(const IntegrandSeries& series) {
  if (series.size() == 0) throw ConfigError("variation_check: empty series");
  VariationReport r;
  r.C_v = series.integral_v() / series.horizon;
  r.C_w = series.integral_w() / series.horizon;
  for (std::size_t k = 0; k < series.size(); ++k) {
    r.max_variation_v = std::max(r.max_variation_v, (series.v[k] - r.C_v).norm());
    r.max_variation_w = std::max(r.max_variation_w, (series.w[k] - r.C_w).norm());
  }
  return r;
}

}  // namespace

VariationReport variation_check(const IntegrandSeries& series) { return averages(series); }

VariationReport variation_check(const IntegrandSeries& series, const std::vector<Matrix>& M,
                                    double lambda_minus, double lambda_plus, double gamma) {
  if (M.size() != series.size()) {
    throw DimensionError("variation_check: need one M per series entry");
  }
  VariationReport r = averages(series);
  const double gap = lambda_minus - gamma * lambda_plus;
  const double root = gap > 0.0 ? std::sqrt(gap) : 0.0;
  r.bound_v.resize(series.size());
  r.bound_w.resize(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    r.bound_v[k] = (M[k] * series.v[k]).norm() * root;
    r.bound_w[k] = (M[k] * series.w[k]).norm() * root;
    const bool ok = gap > 0.0 && (series.v[k] - r.C_v).norm() < r.bound_v[k] &&
                    (series.w[k] - r.C_w).norm() < r.bound_w[k];
    r.satisfied_steps += ok ? 1 : 0;
  }
  r.all_satisfied = r.satisfied_steps == static_cast<int>(series.size());
  return r;
}

double centered_identity_residual(const IntegrandSeries& series) {
  if (series.size() == 0) throw ConfigError("centered_identity_residual: empty series");
  const Vector I1 = series.integral_v();
  const Vector I2 = series.integral_w();
  const Vector Cv = I1 / series.horizon;
  const Vector Cw = I2 / series.horizon;
  double direct = 0.0;
  double centred = 0.0;
  double scale = 1.0;
  double abs_direct = 0.0;
  double abs_centred = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double d = series.v[k].dot(series.w[k]);
    const Vector dv = series.v[k] - Cv;
    const Vector dw = series.w[k] - Cw;
    const double c = dv.dot(dw);
    direct += series.dt * d;
    centred += series.dt * c;
    abs_direct += series.dt * std::abs(d);
    abs_centred += series.dt * dv.norm() * dw.norm();
  }
  const double lhs = I1.dot(I2);
  const double rhs = series.horizon * (direct - centred);
  scale = std::max({scale, std::abs(lhs), series.horizon * abs_direct,
                    series.horizon * abs_centred});
  return std::abs(lhs - rhs) / scale;
}

DescentReport descent_check(const ParamVector& theta, const std::vector<Vector>& batch,
                            const ControlProblem& problem, const Discretization& disc,
                            const FixedPointSettings& fp, int workers) {
  if (batch.empty()) throw ConfigError("descent_check: batch must be non-empty");
  const std::size_t count = batch.size();
  std::vector<Vector> g_true(count);
  std::vector<Vector> g_jfb(count);
  std::vector<Vector> g_engine(count);
  std::vector<double> residual(count, 0.0);
  parallel_for(count, workers, [&](std::size_t i) {
    const SeriesWithGradient sg = build_series(theta, batch[i], problem, disc, fp);
    g_true[i] = sg.grad_implicit;
    g_jfb[i] = sg.series.integral_w();
    g_engine[i] = backward(theta, sg.forward, problem, disc, GradientMode::kJfb, fp).grad_theta;
    residual[i] = centered_identity_residual(sg.series);
  });

  DescentReport r;
  const auto P = static_cast<Eigen::Index>(theta.size());
  r.g_true = Vector::Zero(P);
  r.g_jfb = Vector::Zero(P);
  r.g_jfb_engine = Vector::Zero(P);
  for (std::size_t i = 0; i < count; ++i) {
    r.g_true += g_true[i];
    r.g_jfb += g_jfb[i];
    r.g_jfb_engine += g_engine[i];
    r.centered_identity_residual = std::max(r.centered_identity_residual, residual[i]);
  }
  const double inv = 1.0 / static_cast<double>(count);
  r.g_true *= inv;
  r.g_jfb *= inv;
  r.g_jfb_engine *= inv;
  r.inner_product = r.g_true.dot(r.g_jfb);
  r.cosine = safe_cosine(r.g_true, r.g_jfb);
  r.engine_inner_product = r.g_true.dot(r.g_jfb_engine);
  r.engine_cosine = safe_cosine(r.g_true, r.g_jfb_engine);
  r.degenerate = r.g_true.norm() == 0.0 || r.g_jfb.norm() == 0.0;
  return r;
}

TheoryReport theory_report(const ParamVector& theta, const ControlProblem& problem,
                           const Discretization& disc, const FixedPointSettings& fp,
                           const TheoryCheckSettings& settings) {
  if (settings.samples < 1) throw ConfigError("theory_report: samples must be >= 1");
  TheoryReport r;
  r.gamma_hat = estimate_contraction(theta, problem, fp.alpha, default_region_sampler(problem),
                                     settings.contraction_pairs, mix_seed(settings.seed, 1));
  const std::vector<Vector> batch =
      problem.sample_initial(mix_seed(settings.seed, 2), settings.samples);

  r.dense_checks = settings.dense && theta.size() <= kMaxDenseParams;
  if (!r.dense_checks) {
    r.notice = settings.dense ? "dense M checks skipped: " + std::to_string(theta.size()) +
                                    " parameters exceed " + std::to_string(kMaxDenseParams)
                              : "dense M checks disabled";
  }

  const std::size_t count = batch.size();
  std::vector<IntegrandSeries> series(count);
  std::vector<std::vector<Matrix>> Ms(count);
  parallel_for(count, settings.workers, [&](std::size_t i) {
    series[i] = integrand_series(theta, batch[i], problem, disc, fp);
    if (!r.dense_checks) return;
    const IntegrandSeries& s = series[i];
    Ms[i].reserve(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      Ms[i].push_back(
          jacobian_T_theta(theta, problem, s.times[k], s.states[k], s.controls[k], fp.alpha));
    }
  });

  r.eta_hat = std::numeric_limits<double>::infinity();
  for (const IntegrandSeries& s : series) {
    r.eta_hat = std::min(r.eta_hat, eta_check(s));
    const VariationReport a4 = variation_check(s);
    r.C_v_norm = std::max(r.C_v_norm, a4.C_v.norm());
    r.C_w_norm = std::max(r.C_w_norm, a4.C_w.norm());
    r.max_variation_v = std::max(r.max_variation_v, a4.max_variation_v);
    r.max_variation_w = std::max(r.max_variation_w, a4.max_variation_w);
  }

  if (r.dense_checks) {
    r.sigma_min = std::numeric_limits<double>::infinity();
    for (const auto& list : Ms) {
      for (const Matrix& M : list) {
        const BoundsReport b = assumption_bounds_check(M, r.gamma_hat);
        r.sigma_min = std::min(r.sigma_min, b.sigma_min);
        r.sigma_max = std::max(r.sigma_max, b.sigma_max);
        r.duality_residual = std::max(r.duality_residual, lambda_sigma_duality_residual(M));
      }
    }
    const double inf = std::numeric_limits<double>::infinity();
    r.lambda_minus = r.sigma_max > 0.0 ? 1.0 / (r.sigma_max * r.sigma_max) : inf;
    r.lambda_plus = r.sigma_min > 0.0 ? 1.0 / (r.sigma_min * r.sigma_min) : inf;
    r.beta_hat = r.lambda_minus;
    r.condition_ok = std::isfinite(r.lambda_plus) &&
                     r.lambda_minus - r.gamma_hat * r.lambda_plus > 0.0;
    r.c_surrogate = r.gamma_hat * r.eta_hat / (r.beta_hat * (1.0 + r.gamma_hat));
    for (std::size_t i = 0; i < count; ++i) {
      const auto steps =
          inner_product_bound_check(series[i], Ms[i], r.lambda_minus, r.lambda_plus, r.gamma_hat);
      for (const InnerProductBoundStep& st : steps) {
        r.step_inner_products.push_back(st.lhs);
        r.step_bounds.push_back(st.rhs);
        r.inner_product_bound_holds += st.holds ? 1 : 0;
      }
      const VariationReport a4 =
          variation_check(series[i], Ms[i], r.lambda_minus, r.lambda_plus, r.gamma_hat);
      r.variation_holds += a4.satisfied_steps;
      r.steps_checked += static_cast<int>(series[i].size());
    }
  } else {
    for (const IntegrandSeries& s : series) {
      for (std::size_t k = 0; k < s.size(); ++k) r.step_inner_products.push_back(s.v[k].dot(s.w[k]));
    }
  }

  r.descent = descent_check(theta, batch, problem, disc, fp, settings.workers);
  return r;
}

}  // namespace jfboc
