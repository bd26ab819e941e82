// Copyright 2026 The gpslab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "gpslab/envs.h"
#include "gpslab/gmm.h"
#include "gpslab/lqr.h"
#include "gpslab/network.h"
#include "gpslab/trajopt.h"

namespace gpslab {
namespace {

Mat Random(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat m(rows, cols);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

struct Problem {
  QuadraticCostExpansion cost;
  LinearGaussianDynamics dynamics;
  LinearGaussianController previous;
  std::vector<Vec> lambda;
  std::vector<double> nu;
};

// Stable random dynamics with a PD quadratic cost; the previous controller is
// a noisy zero law.
Problem MakeProblem(int dx, int du, int horizon, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Problem p;
  p.cost = QuadraticCostExpansion::Zeros(horizon, dx, du);
  for (int t = 0; t < horizon; ++t) {
    const Mat r = Random(dx + du, dx + du, rng);
    p.cost.hessian[t] = r * r.transpose() + Mat::Identity(dx + du, dx + du);
    p.cost.gradient[t] = Random(dx + du, 1, rng);
  }
  for (int t = 0; t + 1 < horizon; ++t) {
    DynamicsStep s;
    s.fx = Mat::Identity(dx, dx) + Random(dx, dx, rng, 0.05);
    s.fu = Random(dx, du, rng, 0.1);
    s.fc = Vec::Zero(dx);
    s.F = 1e-3 * Mat::Identity(dx, dx);
    p.dynamics.steps.push_back(s);
  }
  p.previous = LinearGaussianController::Zeros(horizon, dx, du, 1.0);
  p.lambda.assign(horizon, Vec::Zero(du));
  p.nu.assign(horizon, 1e-2);
  return p;
}

void BM_BackwardPass(benchmark::State& state) {
  const Problem p = MakeProblem(static_cast<int>(state.range(0)), 2,
                                static_cast<int>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(BackwardPass(p.cost, p.dynamics));
}
BENCHMARK(BM_BackwardPass)->Args({4, 100})->Args({6, 100})->Args({16, 100});

void BM_KlStep(benchmark::State& state) {
  const Problem p = MakeProblem(static_cast<int>(state.range(0)), 2, 100, 2);
  KlStepProblem pr;
  pr.cost = &p.cost;
  pr.lambda = &p.lambda;
  pr.nu = &p.nu;
  pr.previous = &p.previous;
  pr.dynamics = &p.dynamics;
  pr.initial_state = {Vec::Zero(p.cost.dx), 1e-6 * Mat::Identity(p.cost.dx, p.cost.dx)};
  pr.epsilon = 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(KlStep(pr));
}
BENCHMARK(BM_KlStep)->Arg(4)->Arg(6);

void BM_FitGmm(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Mat data = Random(static_cast<int>(state.range(0)), 10, rng);
  GmmFitOptions options;
  options.max_iters = 20;
  for (auto _ : state) benchmark::DoNotOptimize(FitGmm(data, 4, 5, options));
}
BENCHMARK(BM_FitGmm)->Arg(500)->Arg(2000);

void BM_ConvForward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  ConvFrontEnd net(side, side, 1, {8, 8}, 5, true);
  std::mt19937_64 rng(4);
  net.InitRandom(rng);
  const Vec image = Random(side * side, 1, rng).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(net.Forward(image));
}
BENCHMARK(BM_ConvForward)->Arg(16)->Arg(32);

void BM_EnvStep(benchmark::State& state) {
  const Environment env(MakeTask(state.range(0) == 0 ? "point_mass_peg" : "arm_peg"));
  const Vec x = env.InitialConditions(Split::kTrain).front();
  const Vec u = Vec::Constant(2, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(env.Step(x, u));
}
BENCHMARK(BM_EnvStep)->Arg(0)->Arg(1);

}  // namespace
}  // namespace gpslab

BENCHMARK_MAIN();
