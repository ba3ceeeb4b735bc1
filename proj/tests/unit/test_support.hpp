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

#include <random>
#include <vector>

#include "jfboc/problems.hpp"
#include "jfboc/valuenet.hpp"

namespace jfboc::testing {

// z' = 0, L = 0, G = g0 + 0.5 c |z|^2: a frozen system with a configurable terminal cost.
class FrozenProblem final : public ControlProblem {
 public:
  FrozenProblem(int n, int m, double g0, double curvature)
      : ControlProblem(1.0, Vector::Zero(n)), n_(n), m_(m), g0_(g0), c_(curvature) {}

  std::string name() const override { return "frozen"; }
  int state_dim() const override { return n_; }
  int control_dim() const override { return m_; }
  Vector dynamics(double, const Vector&, const Vector&) const override { return Vector::Zero(n_); }
  DynamicsJacobians dynamics_jacobians(double, const Vector&, const Vector&) const override {
    return {Matrix::Zero(n_, n_), Matrix::Zero(n_, m_)};
  }
  Matrix dynamics_uu_contraction(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(m_, m_);
  }
  Matrix dynamics_uz_contraction(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(m_, n_);
  }
  double running_cost(double, const Vector&, const Vector&) const override { return 0.0; }
  RunningCostDerivatives running_cost_derivatives(double, const Vector&, const Vector&) const override {
    return {0.0, Vector::Zero(n_), Vector::Zero(m_), Matrix::Zero(m_, m_), Matrix::Zero(m_, n_)};
  }
  double terminal_cost(const Vector& z) const override { return g0_ + 0.5 * c_ * z.squaredNorm(); }
  Vector terminal_cost_grad(const Vector& z) const override { return c_ * z; }
  std::vector<Vector> sample_initial(std::uint64_t seed, int count) const override {
    check_count(count);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<Vector> out;
    for (int i = 0; i < count; ++i) {
      Vector z(n_);
      for (int j = 0; j < n_; ++j) z[j] = d(rng);
      out.push_back(z);
    }
    return out;
  }

 private:
  int n_;
  int m_;
  double g0_;
  double c_;
};

inline Vector random_vector(Eigen::Index n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

// Random parameters scaled up from the default init so curvature terms are not tiny.
inline ParamVector random_params(const NetArchitecture& arch, std::uint64_t seed,
                                 double scale = 1.0) {
  return ParamVector(arch, random_vector(static_cast<Eigen::Index>(arch.parameter_count()), seed,
                                         scale));
}

}  // namespace jfboc::testing
