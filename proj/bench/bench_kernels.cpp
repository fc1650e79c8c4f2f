// Copyright 2026 The quenchphase Authors
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

#include <benchmark/benchmark.h>

#include <random>

#include "quenchphase/ed.hpp"
#include "quenchphase/freefermion.hpp"
#include "quenchphase/momentum_quench.hpp"

using namespace qp;

namespace {

ChainParams chain(int n) {
  return {.gamma_x = 0.8, .gamma_y = 0.2, .delta = 0.2, .h = 1.1, .n = n, .boundary = Boundary::Periodic};
}

Eigen::VectorXcd random_state(int n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(Eigen::Index(1) << n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = {g(rng), g(rng)};
  return v.normalized();
}

void BM_ApplyHamiltonian(benchmark::State& st) {
  const auto p = chain(int(st.range(0)));
  const auto v = random_state(p.n);
  for (auto _ : st) benchmark::DoNotOptimize(ed::apply_hamiltonian(p, v));
  st.SetItemsProcessed(st.iterations() * v.size());
}

void BM_ApplyHamiltonianSerial(benchmark::State& st) {
  const auto p = chain(int(st.range(0)));
  const auto v = random_state(p.n);
  for (auto _ : st) benchmark::DoNotOptimize(ed::apply_hamiltonian_serial(p, v));
  st.SetItemsProcessed(st.iterations() * v.size());
}

QuenchSpec quench(int n) {
  QuenchSpec q;
  q.pre = chain(n);
  q.pre.delta = 0.0;
  q.pre.h = 0.8;
  q.post = q.pre;
  q.post.h = 1.1;
  return q;
}

std::vector<double> times(int count) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = 0.05 * i;
  return t;
}

void BM_TrajectoryMomentum(benchmark::State& st) {
  const auto q = quench(int(st.range(0)));
  const auto ts = times(20);
  for (auto _ : st) benchmark::DoNotOptimize(ff::momentum_quench_trajectory(q, q.pre.n / 2, ts));
}

void BM_TrajectoryReference(benchmark::State& st) {
  const auto q = quench(int(st.range(0)));
  const auto ts = times(20);
  for (auto _ : st) benchmark::DoNotOptimize(ff::quench_trajectory_reference(q, q.pre.n / 2, ts));
}

}  // namespace

BENCHMARK(BM_ApplyHamiltonian)->DenseRange(10, 16, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ApplyHamiltonianSerial)->DenseRange(10, 16, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TrajectoryMomentum)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrajectoryReference)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
