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

#include <gtest/gtest.h>

#include "../oracles/riccati.hpp"

namespace jfboc::oracle {
namespace {

struct DoubleIntegrator {
  Eigen::MatrixXd A = (Eigen::MatrixXd(2, 2) << 0, 1, 0, 0).finished();
  Eigen::MatrixXd B = (Eigen::MatrixXd(2, 1) << 0, 1).finished();
  Eigen::MatrixXd Q = 0.3 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(1, 1);
  Eigen::MatrixXd Qf = Eigen::MatrixXd::Identity(2, 2);
  double dt = 0.1;
  int steps = 10;
};

TEST(RiccatiOracle, ValueMatchesClosedLoopSimulation) {
  const DoubleIntegrator d;
  const RiccatiSolution s = solve_discrete_riccati(d.A, d.B, d.Q, d.R, d.Qf, d.dt, d.steps);
  for (const Eigen::Vector2d z0 : {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(-0.3, 0.8)}) {
    const double v = riccati_cost(s, z0);
    EXPECT_NEAR(simulate_riccati(s, d.A, d.B, d.Q, d.R, d.Qf, d.dt, z0), v, 1e-12 * (1 + v));
  }
}

// Any perturbation of the optimal control sequence raises the cost.
TEST(RiccatiOracle, PerturbedOpenLoopControlsCostMore) {
  const DoubleIntegrator d;
  const RiccatiSolution s = solve_discrete_riccati(d.A, d.B, d.Q, d.R, d.Qf, d.dt, d.steps);
  const Eigen::Vector2d z0(0.6, -0.2);
  std::vector<double> u_opt;
  Eigen::VectorXd z = z0;
  for (int k = 0; k < d.steps; ++k) {
    const double u = -(s.K[static_cast<std::size_t>(k)] * z)(0);
    u_opt.push_back(u);
    z = z + d.dt * (d.A * z + d.B * u);
  }
  const auto cost = [&](const std::vector<double>& us) {
    Eigen::VectorXd y = z0;
    double J = 0.0;
    for (int k = 0; k < d.steps; ++k) {
      const double u = us[static_cast<std::size_t>(k)];
      J += d.dt * (0.5 * u * u + 0.5 * y.dot(d.Q * y));
      y = y + d.dt * (d.A * y + d.B * u);
    }
    return J + y.dot(d.Qf * y);
  };
  const double best = cost(u_opt);
  EXPECT_NEAR(best, riccati_cost(s, z0), 1e-12);
  for (int k = 0; k < d.steps; ++k) {
    for (const double h : {-0.05, 0.05}) {
      std::vector<double> us = u_opt;
      us[static_cast<std::size_t>(k)] += h;
      EXPECT_GT(cost(us), best);
    }
  }
}

}  // namespace
}  // namespace jfboc::oracle
