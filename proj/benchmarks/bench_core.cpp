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

#include <benchmark/benchmark.h>

#include <vector>

#include "jfboc/allocator.hpp"
#include "jfboc/fixedpoint.hpp"
#include "jfboc/problems.hpp"
#include "jfboc/rollout.hpp"
#include "jfboc/valuenet.hpp"

namespace {

using namespace jfboc;

BicycleProblem make_bikes(int bikes) {
  BicycleProblem::Options o;
  o.bikes = bikes;
  return BicycleProblem(o);
}

Vector first_start(const ControlProblem& problem) { return problem.sample_initial(7, 1).front(); }

void BM_Phi(benchmark::State& state) {
  const BicycleProblem bike = make_bikes(static_cast<int>(state.range(0)));
  const ParamVector theta = init_params(NetArchitecture::standard(bike.state_dim() + 1), 1);
  const Vector z = first_start(bike);
  for (auto _ : state) benchmark::DoNotOptimize(phi(theta, 0.3, z));
}
BENCHMARK(BM_Phi)->Arg(1)->Arg(20);

void BM_GradZPhi(benchmark::State& state) {
  const BicycleProblem bike = make_bikes(static_cast<int>(state.range(0)));
  const ParamVector theta = init_params(NetArchitecture::standard(bike.state_dim() + 1), 1);
  const Vector z = first_start(bike);
  for (auto _ : state) benchmark::DoNotOptimize(grad_z_phi(theta, 0.3, z));
}
BENCHMARK(BM_GradZPhi)->Arg(1)->Arg(20);

void BM_SecondOrderProducts(benchmark::State& state) {
  const BicycleProblem bike = make_bikes(static_cast<int>(state.range(0)));
  const ParamVector theta = init_params(NetArchitecture::standard(bike.state_dim() + 1), 1);
  const Vector z = first_start(bike);
  const Vector w = Vector::Ones(z.size());
  for (auto _ : state) benchmark::DoNotOptimize(second_order_products(theta, 0.3, z, w));
}
BENCHMARK(BM_SecondOrderProducts)->Arg(1)->Arg(20);

// Fixed-point solve with a fixed iteration count; range(0) is the count.
void BM_Solve(benchmark::State& state) {
  const BicycleProblem bike = make_bikes(1);
  const ParamVector theta = init_params(NetArchitecture::standard(bike.state_dim() + 1), 1);
  const Vector z = first_start(bike);
  FixedPointSettings fp;
  fp.tol = 0.0;
  fp.max_iter = static_cast<int>(state.range(0));
  const AscentOperator op(theta, bike, 0.3, z, fp.alpha);
  const Vector u0 = Vector::Zero(bike.control_dim());
  for (auto _ : state) benchmark::DoNotOptimize(solve(op, u0, fp));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Solve)->Arg(10)->Arg(100);

struct EngineFixture {
  BicycleProblem bike = make_bikes(1);
  ParamVector theta = init_params(NetArchitecture::standard(bike.state_dim() + 1), 1);
  Vector z = first_start(bike);
  FixedPointSettings fp;
  AscentOperator op{theta, bike, 0.3, z, fp.alpha};
  Vector a = Vector::Ones(bike.control_dim());

  FixedPointResult solved(int iterations) {
    FixedPointSettings s = fp;
    s.tol = 0.0;
    s.max_iter = iterations;
    return solve(op, Vector::Zero(bike.control_dim()), s, true);
  }
};

void BM_JfbVjp(benchmark::State& state) {
  EngineFixture f;
  const FixedPointResult r = f.solved(50);
  WorkCounters counters;
  for (auto _ : state) benchmark::DoNotOptimize(jfb_vjp(f.op, r.u_star, f.a, counters));
}
BENCHMARK(BM_JfbVjp);

void BM_ImplicitVjp(benchmark::State& state) {
  EngineFixture f;
  const FixedPointResult r = f.solved(50);
  WorkCounters counters;
  for (auto _ : state) benchmark::DoNotOptimize(implicit_vjp(f.op, r.u_star, f.a, counters));
}
BENCHMARK(BM_ImplicitVjp);

void BM_UnrolledVjp(benchmark::State& state) {
  EngineFixture f;
  const FixedPointResult r = f.solved(static_cast<int>(state.range(0)));
  WorkCounters counters;
  for (auto _ : state) benchmark::DoNotOptimize(unrolled_vjp(f.op, r.history, f.a, counters));
}
BENCHMARK(BM_UnrolledVjp)->Arg(10)->Arg(100);

// One training step (forward rollouts plus backward sweeps) on a small bicycle batch.
void BM_BatchLossGrad(benchmark::State& state) {
  const BicycleProblem bike = make_bikes(1);
  const ParamVector theta = init_params(NetArchitecture::tiny(bike.state_dim() + 1), 1);
  const Discretization disc = Discretization::uniform(bike.horizon(), 20);
  FixedPointSettings fp;
  fp.tol = 1e-4;
  fp.max_iter = 5000;
  const std::vector<Vector> batch = bike.sample_initial(3, 8);
  const auto mode = static_cast<GradientMode>(state.range(0));
  state.SetLabel(to_string(mode));
  for (auto _ : state) benchmark::DoNotOptimize(batch_loss_grad(theta, batch, bike, disc, fp, mode));
}
BENCHMARK(BM_BatchLossGrad)
    ->Arg(static_cast<int>(GradientMode::kJfb))
    ->Arg(static_cast<int>(GradientMode::kImplicit))
    ->Arg(static_cast<int>(GradientMode::kUnrolled))
    ->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  jfboc::tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
