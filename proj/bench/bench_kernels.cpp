// Copyright 2026 The fctsbn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "fctsbn/audit.hpp"
#include "fctsbn/nvil.hpp"
#include "fctsbn/params.hpp"

using namespace fctsbn;

namespace {

ModelSpec make_spec(bool factored, int M, int S, int J) {
  ModelSpec s;
  s.factored = factored;
  s.dims.visible = M;
  s.dims.styles = S;
  s.dims.factors = factored ? 16 : 0;
  s.dims.layer_sizes = {J};
  return s;
}

struct Problem {
  GenerativeParams p;
  RecognitionParams q;
  std::vector<BaselineParams> baselines;
  std::vector<Segment> batch;
};

Problem problem(bool factored) {
  Rng rng(1);
  const ModelSpec spec = make_spec(factored, 20, 4, 32);
  Problem pr;
  pr.p = make_generative(spec);
  randomize(pr.p, rng, 0.1);
  pr.q = make_recognition(spec);
  randomize(pr.q, rng, 0.1);
  pr.baselines = make_baselines(spec, rng);
  for (int i = 0; i < 20; ++i) {
    Matrix V(20, 50);
    for (Index k = 0; k < V.size(); ++k) V.data()[k] = rng.normal();
    Matrix Y = Matrix::Zero(4, 50);
    Y.row(i % 4).setOnes();
    pr.batch.push_back({V, Y});
  }
  return pr;
}

void BM_Minibatch(benchmark::State& state) {
  const Problem pr = problem(state.range(1) != 0);
  NvilOptions opt;
  opt.policy = state.range(0) ? Policy::Parallel : Policy::Serial;
  std::vector<SignalStats> stats;
  Rng rng(2);
  for (auto _ : state) {
    MinibatchResult r = nvil_minibatch(pr.p, pr.q, pr.baselines, stats, pr.batch, rng, opt);
    benchmark::DoNotOptimize(r.elbo);
  }
}
BENCHMARK(BM_Minibatch)->ArgNames({"parallel", "factored"})->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Enumerate(benchmark::State& state) {
  const AuditInstance a = make_audit_instance(2, 3);
  for (auto _ : state) {
    const EnumerationSums s = state.range(0) ? enumerate_sums(a.p, a.q, a.V, a.Y)
                                             : enumerate_sums_serial(a.p, a.q, a.V, a.Y);
    benchmark::DoNotOptimize(s.log_marginal);
  }
}
BENCHMARK(BM_Enumerate)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MonteCarlo(benchmark::State& state) {
  const AuditInstance a = make_audit_instance(2, 3);
  const Policy policy = state.range(0) ? Policy::Parallel : Policy::Serial;
  for (auto _ : state) {
    const MonteCarloEstimate m = monte_carlo_elbo(a.p, a.q, a.V, a.Y, 10000, Rng(4), policy);
    benchmark::DoNotOptimize(m.mean);
  }
}
BENCHMARK(BM_MonteCarlo)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CondWeightApply(benchmark::State& state) {
  Rng rng(5);
  CondWeight w = state.range(0) ? CondWeight::factored(100, 100, 10, 50) : CondWeight::dense(100, 100, 10);
  w.fill_gaussian(rng, 0.1);
  Vector y = Vector::Constant(10, 0.1);
  Vector x = Vector::Ones(100);
  for (auto _ : state) benchmark::DoNotOptimize(w.apply(y, x));
}
BENCHMARK(BM_CondWeightApply)->ArgName("factored")->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
