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

#include <cmath>

#include "../oracles/riccati.hpp"
#include "jfboc/errors.hpp"
#include "jfboc/training.hpp"

namespace jfboc {
namespace {

SchedulerSettings plateau() {
  SchedulerSettings s;
  s.kind = SchedulerSettings::Kind::kReduceOnPlateau;
  return s;
}

TEST(Scheduler, StrictlyDecreasingLossNeverReduces) {
  const SchedulerSettings s = plateau();
  SchedulerState st{0.1};
  double loss = 10.0;
  for (int i = 0; i < 100; ++i) {
    loss *= 0.99;
    EXPECT_EQ(scheduler_step(s, st, loss), 0.1);
  }
}

TEST(Scheduler, PlateauHalvesExactlyOnce) {
  const SchedulerSettings s = plateau();
  SchedulerState st{0.1};
  scheduler_step(s, st, 1.0);
  int reductions = 0;
  double lr = 0.1;
  for (int i = 0; i < s.patience + 1; ++i) {
    const double next = scheduler_step(s, st, 1.0);
    if (next != lr) ++reductions;
    lr = next;
  }
  EXPECT_EQ(reductions, 1);
  EXPECT_EQ(lr, 0.05);
}

TEST(Scheduler, ImprovementBelowThresholdCountsAsPlateau) {
  const SchedulerSettings s = plateau();
  SchedulerState st{0.1};
  scheduler_step(s, st, 1.0);
  for (int i = 0; i < s.patience + 1; ++i) scheduler_step(s, st, 1.0 - 1e-6 * (i + 1));
  EXPECT_EQ(st.lr, 0.05);
}

TEST(Scheduler, FloorAtMinimumRate) {
  SchedulerSettings s = plateau();
  s.patience = 0;
  SchedulerState st{2e-5};
  scheduler_step(s, st, 1.0);
  for (int i = 0; i < 5; ++i) scheduler_step(s, st, 1.0);
  EXPECT_EQ(st.lr, s.min_lr);
}

TEST(Scheduler, ConstantNeverChanges) {
  SchedulerSettings s;
  SchedulerState st{0.3};
  for (int i = 0; i < 50; ++i) EXPECT_EQ(scheduler_step(s, st, 1.0), 0.3);
  EXPECT_EQ(scheduler_kind_from_string("plateau"), SchedulerSettings::Kind::kReduceOnPlateau);
  EXPECT_THROW(scheduler_kind_from_string("cosine"), ConfigError);
}

TEST(Adam, FirstStepMovesBySignTimesRate) {
  Vector params = Vector::Zero(3);
  const Vector grad = (Vector(3) << 2.0, -0.5, 1e-3).finished();
  AdamState st;
  adam_update(params, grad, 0.01, st);
  EXPECT_NEAR(params[0], -0.01, 1e-9);
  EXPECT_NEAR(params[1], 0.01, 1e-9);
  EXPECT_NEAR(params[2], -0.01, 1e-7);
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, ZeroRateLeavesParametersUnchanged) {
  Vector params = Vector::Ones(4);
  AdamState st;
  adam_update(params, Vector::Constant(4, 3.0), 0.0, st);
  EXPECT_EQ(params, Vector::Ones(4));
}

struct LqrSetup {
  DoubleIntegratorProblem problem;
  NetArchitecture arch = NetArchitecture::tiny(3);
  Discretization disc = Discretization::uniform(1.0, 20);
  FixedPointSettings fp = [] {
    FixedPointSettings f;
    f.alpha = 0.5;
    f.tol = 1e-6;
    f.max_iter = 2000;
    return f;
  }();
  TrainSettings train = [] {
    TrainSettings t;
    t.epochs = 12;
    t.batch_size = 8;
    t.lr0 = 1e-2;
    t.seed = 5;
    return t;
  }();
};

TEST(Training, ZeroLearningRateWithFixedBatchKeepsLossConstant) {
  LqrSetup s;
  s.train.lr0 = 0.0;
  s.train.fixed_dataset = true;
  const RunResult r = train(s.problem, s.arch, s.disc, s.fp, s.train).front();
  for (const EpochMetrics& m : r.history) EXPECT_EQ(m.loss, r.history.front().loss);
  EXPECT_EQ(r.final_state.theta.values(),
            initial_train_state(s.arch, s.train, 0).theta.values());
}

TEST(Training, ZeroLearningRateWithFreshBatchesOnlyResamples) {
  LqrSetup s;
  s.train.lr0 = 0.0;
  const RunResult r = train(s.problem, s.arch, s.disc, s.fp, s.train).front();
  EXPECT_NE(r.history[0].loss, r.history[1].loss);
  EXPECT_EQ(r.final_state.theta.values(),
            initial_train_state(s.arch, s.train, 0).theta.values());
}

TEST(Training, RunsAreBitReproducible) {
  LqrSetup s;
  s.train.runs = 2;
  const auto a = train(s.problem, s.arch, s.disc, s.fp, s.train);
  const auto b = train(s.problem, s.arch, s.disc, s.fp, s.train);
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t r = 0; r < a.size(); ++r) {
    ASSERT_EQ(a[r].history.size(), b[r].history.size());
    for (std::size_t e = 0; e < a[r].history.size(); ++e) {
      EXPECT_EQ(a[r].history[e].loss, b[r].history[e].loss);
      EXPECT_EQ(a[r].history[e].cum_work_units, b[r].history[e].cum_work_units);
      EXPECT_EQ(a[r].history[e].peak_tape_bytes, b[r].history[e].peak_tape_bytes);
      EXPECT_EQ(a[r].history[e].lr, b[r].history[e].lr);
    }
    EXPECT_EQ(a[r].final_state.theta.values(), b[r].final_state.theta.values());
  }
  EXPECT_NE(a[0].history.back().loss, a[1].history.back().loss);
}

TEST(Training, CumulativeCountersAreMonotone) {
  LqrSetup s;
  const RunResult r = train(s.problem, s.arch, s.disc, s.fp, s.train).front();
  ASSERT_EQ(static_cast<int>(r.history.size()), s.train.epochs);
  for (std::size_t e = 1; e < r.history.size(); ++e) {
    EXPECT_GE(r.history[e].cum_runtime_s, r.history[e - 1].cum_runtime_s);
    EXPECT_GE(r.history[e].cum_work_units, r.history[e - 1].cum_work_units);
    EXPECT_EQ(r.history[e].epoch, r.history[e - 1].epoch + 1);
  }
  EXPECT_EQ(r.history.front().work_units, s.train.batch_size * s.disc.steps);
}

TEST(Training, ResumeMatchesUninterruptedRun) {
  LqrSetup s;
  const RunResult full = train_run(s.problem, s.disc, s.fp, s.train, 0,
                                   initial_train_state(s.arch, s.train, 0));
  TrainSettings first = s.train;
  first.epochs = 5;
  const RunResult head = train_run(s.problem, s.disc, s.fp, first, 0,
                                   initial_train_state(s.arch, s.train, 0));
  const RunResult tail = train_run(s.problem, s.disc, s.fp, s.train, 0, head.final_state);
  ASSERT_EQ(tail.history.size(), full.history.size() - 5);
  for (std::size_t e = 0; e < tail.history.size(); ++e) {
    EXPECT_EQ(tail.history[e].loss, full.history[e + 5].loss);
  }
  EXPECT_EQ(tail.final_state.theta.values(), full.final_state.theta.values());
}

TEST(Training, AbortsAfterConsecutiveFailures) {
  LqrSetup s;
  s.fp.alpha = 3.0;  // |1 - alpha| > 1: every solve diverges
  s.fp.max_iter = 20;
  s.train.epochs = 50;
  const RunResult r = train(s.problem, s.arch, s.disc, s.fp, s.train).front();
  EXPECT_TRUE(r.aborted);
  EXPECT_EQ(static_cast<int>(r.history.size()), s.train.max_failed_epochs);
  for (const EpochMetrics& m : r.history) EXPECT_TRUE(m.failed);
}

TEST(Training, SettingsValidation) {
  TrainSettings t;
  t.epochs = 0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = TrainSettings{};
  t.batch_size = 0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = TrainSettings{};
  t.lr0 = -1.0;
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(Training, TrainedLqrBeatsUntrainedAndApproachesRiccati) {
  LqrSetup s;
  s.train.epochs = 150;
  s.train.batch_size = 32;
  const RunResult r = train(s.problem, s.arch, s.disc, s.fp, s.train).front();
  const double trained = evaluate(r.final_state.theta, s.problem, s.disc, s.fp, 200, 77);
  const double zero = evaluate(ParamVector::zeros(s.arch), s.problem, s.disc, s.fp, 200, 77);
  EXPECT_LT(trained, zero);

  Matrix A = Matrix::Zero(2, 2);
  A(0, 1) = 1.0;
  Matrix B = Matrix::Zero(2, 1);
  B(1, 0) = 1.0;
  const auto ric = oracle::solve_discrete_riccati(A, B, Matrix::Zero(2, 2), Matrix::Identity(1, 1),
                                                  Matrix::Identity(2, 2), s.disc.dt, s.disc.steps);
  double optimal = 0.0;
  for (const Vector& x : s.problem.sample_initial(77, 200)) optimal += oracle::riccati_cost(ric, x);
  optimal /= 200.0;
  EXPECT_GE(trained, optimal * (1.0 - 1e-9));
  EXPECT_LT(trained, 1.1 * optimal);
}

TEST(Evaluate, SingleSampleAndDeterminism) {
  LqrSetup s;
  const ParamVector theta = init_params(s.arch, 3);
  const double a = evaluate(theta, s.problem, s.disc, s.fp, 1, 9);
  const Vector x = s.problem.sample_initial(9, 1).front();
  EXPECT_EQ(a, rollout(theta, x, s.problem, s.disc, s.fp).objective);
  EXPECT_EQ(evaluate(theta, s.problem, s.disc, s.fp, 16, 4),
            evaluate(theta, s.problem, s.disc, s.fp, 16, 4));
  EXPECT_THROW(evaluate(theta, s.problem, s.disc, s.fp, 0, 4), ConfigError);
}

TEST(LossBands, OrderedAndDegenerateForOneRun) {
  std::vector<std::vector<EpochMetrics>> runs(3);
  const double losses[3][2] = {{3.0, 1.0}, {2.0, 1.5}, {4.0, 0.5}};
  for (int r = 0; r < 3; ++r) {
    for (int e = 0; e < 2; ++e) {
      EpochMetrics m;
      m.epoch = e;
      m.loss = losses[r][e];
      runs[static_cast<std::size_t>(r)].push_back(m);
    }
  }
  const auto bands = loss_bands(runs);
  ASSERT_EQ(bands.size(), 2u);
  EXPECT_DOUBLE_EQ(bands[0].mean, 3.0);
  EXPECT_EQ(bands[0].min, 2.0);
  EXPECT_EQ(bands[0].max, 4.0);
  for (const LossBand& b : bands) {
    EXPECT_LE(b.min, b.mean);
    EXPECT_LE(b.mean, b.max);
  }
  const auto single = loss_bands({runs[0]});
  EXPECT_EQ(single[1].min, 1.0);
  EXPECT_EQ(single[1].mean, 1.0);
  EXPECT_EQ(single[1].max, 1.0);
}

TEST(Seeds, StreamsAreDistinct) {
  EXPECT_NE(run_seed(1, 0), run_seed(1, 1));
  EXPECT_NE(batch_seed(run_seed(1, 0), 0), batch_seed(run_seed(1, 0), 1));
  EXPECT_NE(init_seed(run_seed(1, 0)), batch_seed(run_seed(1, 0), 0));
  EXPECT_EQ(mix_seed(3, 4), mix_seed(3, 4));
}

}  // namespace
}  // namespace jfboc
