// umce - wideband UM-MIMO channel estimation laboratory
// Copyright (C) 2026 The umce authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <benchmark/benchmark.h>

#include "umce/dictionary.hpp"
#include "umce/estimators.hpp"
#include "umce/feedback.hpp"
#include "umce/frontend.hpp"
#include "umce/lamp.hpp"
#include "umce/rng.hpp"

namespace {

using namespace umce;

ArrayGeometry bench_geometry(int n_ap, int k) {
  ArrayGeometry g;
  g.n_ap = n_ap;
  g.carrier_freq_hz = 70e9;
  g.bandwidth_hz = 10e9;
  g.n_subcarriers = k;
  return g;
}

struct BenchProblem {
  std::vector<CMat> a;
  std::vector<CMat> dict;
  CMat y;
  BernoulliGaussianPrior prior;
};

BenchProblem make_problem(int n_ap, int k, int g, int rho, int l) {
  const ArrayGeometry geom = bench_geometry(n_ap, k);
  ScattererProfile profile;
  profile.l_far = l;
  profile.l_near = 0;
  profile.delay_bound_s = 5e-10;
  const PilotBlock pilots = gen_pilots(geom, g, 2, 1);
  BenchProblem p;
  p.dict = build_dft_wrd(geom, rho).d;
  p.a = assemble_measurements(pilots, p.dict).a;
  const ChannelRealization ch = channel_matrix(geom, sample_scatterers(geom, profile, 2));
  p.y = simulate_rx(ch.h, pilots, 10.0, 3).noisy;
  p.prior = BernoulliGaussianPrior{static_cast<double>(l) / (rho * n_ap),
                                   1.0 / (static_cast<double>(l) * n_ap)};
  return p;
}

void BM_BuildDftWrd(benchmark::State& state) {
  const ArrayGeometry g = bench_geometry(static_cast<int>(state.range(0)), 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_dft_wrd(g, 2));
  }
}
BENCHMARK(BM_BuildDftWrd)->Arg(32)->Arg(64)->Arg(128);

void BM_GmmvAmpIteration(benchmark::State& state) {
  BenchProblem p = make_problem(static_cast<int>(state.range(0)), 16, 16, 2, 2);
  GmmvAmpOptions opts;
  opts.iterations = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gmmv_amp(p.y, p.a, p.prior, opts));
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_GmmvAmpIteration)->Args({32, 10})->Args({64, 10})->Args({64, 80});

void BM_LampForward(benchmark::State& state) {
  BenchProblem p = make_problem(static_cast<int>(state.range(0)), 16, 16, 2, 2);
  const LampParams params = LampParams::initialize(p.a, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lamp_forward(p.y, p.a, params));
  }
}
BENCHMARK(BM_LampForward)->Arg(32)->Arg(64);

void BM_Somp(benchmark::State& state) {
  BenchProblem p = make_problem(static_cast<int>(state.range(0)), 16, 16, 2, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(somp(p.y, p.a, 4));
  }
}
BENCHMARK(BM_Somp)->Arg(32)->Arg(64);

void BM_ShrinkageRow(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  Rng rng(7);
  CVec row(k);
  RVec sigma2(k);
  for (int i = 0; i < k; ++i) {
    row(i) = rng.cnormal();
    sigma2(i) = 0.1 + rng.uniform();
  }
  const BernoulliGaussianPrior prior{0.1, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(shrinkage_mmse(row, prior, sigma2));
  }
}
BENCHMARK(BM_ShrinkageRow)->Arg(16)->Arg(64)->Arg(256);

void BM_QuantizeBlock(benchmark::State& state) {
  Rng rng(9);
  CMat block(4, static_cast<int>(state.range(0)));
  for (int j = 0; j < block.cols(); ++j)
    for (int i = 0; i < block.rows(); ++i) block(i, j) = rng.cnormal();
  QuantizerConfig cfg;
  cfg.bits = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantize(block, cfg));
  }
}
BENCHMARK(BM_QuantizeBlock)->Arg(64)->Arg(256);

void BM_FeedbackRoundtrip(benchmark::State& state) {
  Rng rng(11);
  FeedbackCodebook cb;
  cb.support_size = 8;
  cb.coeff_bits = 4;
  cb.v_total = static_cast<int>(state.range(0));
  cb.k_total = 16;
  CMat x = CMat::Zero(cb.v_total, cb.k_total);
  for (int r = 0; r < 8; ++r) {
    const int row = static_cast<int>(rng.next_u64() % cb.v_total);
    for (int j = 0; j < cb.k_total; ++j) x(row, j) = rng.cnormal();
  }
  for (auto _ : state) {
    const BitVector bits = encode_csi(x, cb);
    benchmark::DoNotOptimize(decode_sparse(bits, cb));
  }
}
BENCHMARK(BM_FeedbackRoundtrip)->Arg(128)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
