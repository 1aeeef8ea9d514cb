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

#include "umce/frontend.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "umce/rng.hpp"

using namespace umce;

namespace {

ArrayGeometry desk_geometry(int n_ap = 8, int k = 8) {
  ArrayGeometry g;
  g.n_ap = n_ap;
  g.carrier_freq_hz = 70e9;
  g.bandwidth_hz = 10e9;
  g.n_subcarriers = k;
  return g;
}

CMat random_block(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  CMat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.cnormal();
  return m;
}

}  // namespace

TEST(Frontend, PilotConstantModulusAndDeterminism) {
  const ArrayGeometry g = desk_geometry();
  const PilotBlock p1 = gen_pilots(g, 4, 2, 11);
  const PilotBlock p2 = gen_pilots(g, 4, 2, 11);
  const double mod = 1.0 / std::sqrt(static_cast<double>(g.n_ap));
  for (int slot = 0; slot < 4; ++slot) {
    for (int i = 0; i < g.n_ap; ++i)
      for (int l = 0; l < 2; ++l) {
        EXPECT_NEAR(std::abs(p1.f_rf[slot](i, l)), mod, 1e-12);
        EXPECT_EQ(p1.f_rf[slot](i, l), p2.f_rf[slot](i, l));
      }
  }
  // PAPR rule: symbols differ across subcarriers
  for (int slot = 0; slot < 4; ++slot) {
    for (int k1 = 0; k1 < g.n_subcarriers; ++k1)
      for (int k2 = k1 + 1; k2 < g.n_subcarriers; ++k2) {
        EXPECT_NE((p1.symbols[slot].col(k1) - p1.symbols[slot].col(k2)).norm(), 0.0);
      }
  }
}

TEST(Frontend, PilotCompositionTripleLoopOracle) {
  const ArrayGeometry g = desk_geometry(4, 4);
  const PilotBlock p = gen_pilots(g, 3, 2, 5);
  for (int k = 0; k < g.n_subcarriers; ++k) {
    for (int slot = 0; slot < 3; ++slot) {
      for (int i = 0; i < g.n_ap; ++i) {
        cxd acc(0.0, 0.0);
        for (int l = 0; l < 2; ++l) {
          acc += p.f_rf[slot](i, l) * p.symbols[slot](l, k);
        }
        EXPECT_NEAR(std::abs(p.s[k](slot, i) - acc), 0.0, 1e-12);
      }
    }
  }
}

TEST(Frontend, SimulateRxInnerProductOracle) {
  const ArrayGeometry g = desk_geometry(6, 5);
  const PilotBlock p = gen_pilots(g, 4, 2, 9);
  const CMat h = random_block(g.n_ap, g.n_subcarriers, 21);
  const RxBlocks rx = simulate_rx(h, p, std::numeric_limits<double>::infinity(), 1);
  EXPECT_EQ(rx.noise_power, 0.0);
  EXPECT_EQ((rx.noisy - rx.clean).norm(), 0.0);
  for (int k = 0; k < g.n_subcarriers; ++k) {
    for (int slot = 0; slot < 4; ++slot) {
      const cxd direct = (p.f_rf[slot] * p.symbols[slot].col(k))
                             .transpose()
                             .dot(h.col(k).conjugate());
      // direct = sum_i (F s)_i * h_i; Eigen dot conjugates the left side
      EXPECT_NEAR(std::abs(rx.clean(slot, k) - std::conj(direct)), 0.0, 1e-12);
    }
  }

  const CMat zero = CMat::Zero(g.n_ap, g.n_subcarriers);
  const RxBlocks rx0 = simulate_rx(zero, p, 10.0, 2);
  EXPECT_EQ(rx0.clean.norm(), 0.0);
}

TEST(Frontend, SimulateRxSnrCalibration) {
  const ArrayGeometry g = desk_geometry(8, 16);
  const PilotBlock p = gen_pilots(g, 16, 2, 3);
  const CMat h = random_block(g.n_ap, g.n_subcarriers, 77);
  double noise_acc = 0.0;
  const int trials = 200;
  double expected = 0.0;
  for (int t = 0; t < trials; ++t) {
    const RxBlocks rx = simulate_rx(h, p, 10.0, 100 + t);
    noise_acc += (rx.noisy - rx.clean).squaredNorm() / (16.0 * g.n_subcarriers);
    expected = rx.noise_power;
  }
  EXPECT_NEAR(noise_acc / trials, expected, 0.1 * expected);
}

TEST(Frontend, DftPairAndParseval) {
  const CMat block = random_block(3, 16, 4);
  const CMat time = freq_to_time(block);
  EXPECT_NEAR(time.norm(), block.norm(), 1e-12 * block.norm());
  const CMat back = time_to_freq(time);
  EXPECT_LT((back - block).norm(), 1e-12 * block.norm());

  // constant row -> impulse at sample 1
  CMat flat(1, 8);
  flat.setConstant(cxd(2.0, -1.0));
  const CMat imp = freq_to_time(flat);
  EXPECT_NEAR(std::abs(imp(0, 0) - cxd(2.0, -1.0) * std::sqrt(8.0)), 0.0, 1e-12);
  for (int s = 1; s < 8; ++s) EXPECT_NEAR(std::abs(imp(0, s)), 0.0, 1e-12);
}

TEST(Frontend, IqImbalanceClosedForm) {
  QuantizerConfig cfg;
  CMat one(1, 1);
  one(0, 0) = cxd(1.0, 0.0);
  EXPECT_EQ(apply_iq_imbalance(one, cfg)(0, 0), cxd(1.0, 0.0));

  cfg.iq_gain_error = 0.1;
  cfg.iq_phase_error_rad = 5.0 * kPi / 180.0;
  const double h = 2.5 * kPi / 180.0;
  const cxd expected(std::cos(h) + 0.1 * std::cos(h), 0.1 * std::sin(h) - std::sin(h));
  EXPECT_NEAR(std::abs(apply_iq_imbalance(one, cfg)(0, 0) - expected), 0.0, 1e-15);

  // zero gain error on real input collapses to a phase rotation
  QuantizerConfig phase_only;
  phase_only.iq_phase_error_rad = 0.3;
  CMat real_in(1, 3);
  real_in << cxd(1.0, 0.0), cxd(-2.0, 0.0), cxd(0.5, 0.0);
  const CMat out = apply_iq_imbalance(real_in, phase_only);
  for (int j = 0; j < 3; ++j) {
    const cxd rot = std::exp(cxd(0.0, -0.15)) * real_in(0, j);
    EXPECT_NEAR(std::abs(out(0, j) - rot), 0.0, 1e-15);
  }

  // real-linearity: additive over sample sums
  QuantizerConfig any;
  any.iq_gain_error = 0.07;
  any.iq_phase_error_rad = 0.2;
  const CMat a = random_block(2, 5, 1);
  const CMat b = random_block(2, 5, 2);
  const CMat lhs = apply_iq_imbalance(a + b, any);
  const CMat rhs = apply_iq_imbalance(a, any) + apply_iq_imbalance(b, any);
  EXPECT_LT((lhs - rhs).norm(), 1e-14);
}

TEST(Frontend, OversampleToneOracle) {
  const int kk = 8;
  for (int w : {1, 2, 4}) {
    for (int bin = 0; bin < kk; ++bin) {
      Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(kk);
      row(bin) = cxd(1.0, 0.0);
      const CMat branches = oversample(row, w);
      ASSERT_EQ(branches.rows(), w);
      ASSERT_EQ(branches.cols(), kk);
      const int nu = bin <= (kk - 1) / 2 ? bin : bin - kk;
      const int n_total = w * kk;
      const double amp = 1.0 / std::sqrt(static_cast<double>(n_total));
      for (int s = 0; s < kk; ++s) {
        for (int b = 0; b < w; ++b) {
          const double phase = 2.0 * kPi * nu * (s * w + b) / n_total;
          const cxd expected = amp * cxd(std::cos(phase), std::sin(phase));
          EXPECT_NEAR(std::abs(branches(b, s) - expected), 0.0, 1e-12);
        }
      }
    }
  }

  // W = 1 equals freq_to_time; energy preserved for random rows
  const CMat block = random_block(1, kk, 9);
  const CMat b1 = oversample(block.row(0), 1);
  EXPECT_LT((b1 - freq_to_time(block)).norm(), 1e-12);
  const CMat b4 = oversample(block.row(0), 4);
  EXPECT_NEAR(b4.norm(), block.norm(), 1e-12);
  EXPECT_THROW(oversample(block.row(0), 3), std::invalid_argument);
}

TEST(Frontend, NaiveDequantizeInvertsChain) {
  const int kk = 16;
  const CMat block = random_block(1, kk, 31);
  for (int w : {1, 2, 4}) {
    const CMat branches = oversample(block.row(0), w);
    const Eigen::RowVectorXcd rec = naive_dequantize(branches);
    EXPECT_LT((rec - block.row(0)).norm(), 1e-12 * block.norm());
  }
}

TEST(Frontend, QuantizeCodebookOracle) {
  QuantizerConfig cfg;
  cfg.bits = 2;
  // real parts {-0.9, -0.2, 0.3, 0.9}: range [-0.9, 0.9], four levels
  CMat in(1, 4);
  in << cxd(-0.9, 0.0), cxd(-0.2, 0.0), cxd(0.3, 0.0), cxd(0.9, 0.0);
  const CMat q = quantize(in, cfg);

  // exhaustive nearest-level search against the decided codebook; the range
  // covers real and imaginary components jointly, so the zero imag parts snap
  // to the nearest level too (ties away from zero)
  const double y_min = -0.9, y_max = 0.9;
  const double step = (y_max - y_min) / 3.0;
  auto nearest = [&](double c) {
    double best = y_min;
    double best_dist = std::abs(c - y_min);
    for (int lvl = 1; lvl < 4; ++lvl) {
      const double value = y_min + lvl * step;
      const double dist = std::abs(c - value);
      if (dist < best_dist || (dist == best_dist && value > best)) {
        best_dist = dist;
        best = value;
      }
    }
    return best;
  };
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(q(0, j).real(), nearest(in(0, j).real()), 1e-15);
    EXPECT_NEAR(q(0, j).imag(), nearest(0.0), 1e-15);
  }
}

TEST(Frontend, QuantizeIdempotentAndBounded) {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    QuantizerConfig cfg;
    cfg.bits = 1 + static_cast<int>(rng.next_u64() % 8);
    const CMat x = random_block(4, 8, 1000 + trial);
    const CMat q1 = quantize(x, cfg);
    const CMat q2 = quantize(q1, cfg);
    // bit-exact fixed point
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 4; ++i) EXPECT_EQ(q1(i, j), q2(i, j));

    double y_min = 1e300, y_max = -1e300;
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 4; ++i) {
        y_min = std::min({y_min, x(i, j).real(), x(i, j).imag()});
        y_max = std::max({y_max, x(i, j).real(), x(i, j).imag()});
      }
    const double half_step = (y_max - y_min) / ((1 << cfg.bits) - 1) / 2.0;
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 4; ++i) {
        EXPECT_GE(q1(i, j).real(), y_min);
        EXPECT_LE(q1(i, j).real(), y_max);
        EXPECT_GE(q1(i, j).imag(), y_min);
        EXPECT_LE(q1(i, j).imag(), y_max);
        EXPECT_LE(std::abs(q1(i, j).real() - x(i, j).real()), half_step + 1e-12);
        EXPECT_LE(std::abs(q1(i, j).imag() - x(i, j).imag()), half_step + 1e-12);
      }
  }

  // constant block: returned unchanged
  QuantizerConfig cfg;
  cfg.bits = 3;
  CMat flat(2, 2);
  flat.setConstant(cxd(0.4, 0.4));
  EXPECT_EQ((quantize(flat, cfg) - flat).norm(), 0.0);

  // infinite bits: identity
  QuantizerConfig inf_cfg;
  const CMat x = random_block(3, 3, 7);
  EXPECT_EQ((quantize(x, inf_cfg) - x).norm(), 0.0);

  EXPECT_THROW(quantize(CMat(), cfg), std::invalid_argument);
}

TEST(Frontend, PassthroughChainMatchesSimulateRx) {
  const ArrayGeometry g = desk_geometry(8, 16);
  const PilotBlock p = gen_pilots(g, 6, 2, 13);
  const CMat h = random_block(g.n_ap, g.n_subcarriers, 55);
  const RxBlocks rx = simulate_rx(h, p, 10.0, 17);

  QuantizerConfig pass;
  ASSERT_TRUE(pass.is_passthrough());
  const ReceivedBlock out = receiver_frontend(rx.noisy, pass, rx.noise_power);
  EXPECT_LT((out.freq - rx.noisy).norm(), 1e-12 * rx.noisy.norm());
}

TEST(Frontend, QuantizedChainOrderingAndOversamplingGain) {
  const ArrayGeometry g = desk_geometry(8, 16);
  const PilotBlock p = gen_pilots(g, 4, 2, 19);
  const CMat h = random_block(g.n_ap, g.n_subcarriers, 66);
  const RxBlocks rx = simulate_rx(h, p, 20.0, 23);

  QuantizerConfig q2;
  q2.bits = 2;
  const ReceivedBlock coarse = receiver_frontend(rx.noisy, q2, rx.noise_power);
  const double nmse_q2 = (coarse.freq - rx.clean).squaredNorm() / rx.clean.squaredNorm();

  QuantizerConfig qinf;
  const ReceivedBlock fine = receiver_frontend(rx.noisy, qinf, rx.noise_power);
  const double nmse_inf = (fine.freq - rx.clean).squaredNorm() / rx.clean.squaredNorm();
  EXPECT_TRUE(std::isfinite(nmse_q2));
  EXPECT_GT(nmse_q2, nmse_inf);

  // Monte-Carlo: W = 4 averaging never loses to W = 1 on the same draws
  QuantizerConfig w1;
  w1.bits = 3;
  QuantizerConfig w4 = w1;
  w4.oversampling = 4;
  double acc1 = 0.0, acc4 = 0.0;
  for (int t = 0; t < 120; ++t) {
    const RxBlocks draw = simulate_rx(h, p, 5.0, 400 + t);
    acc1 += (receiver_frontend(draw.noisy, w1).freq - draw.clean).squaredNorm();
    acc4 += (receiver_frontend(draw.noisy, w4).freq - draw.clean).squaredNorm();
  }
  EXPECT_LE(acc4, acc1);
}

TEST(Frontend, QuantizedBlobRoundtrip) {
  QuantizedBlobHeader header;
  header.n_ap = 8;
  header.k = 6;
  header.g = 3;
  header.w = 2;
  header.q_bits = 4;
  std::vector<std::vector<CMat>> samples;
  for (int s = 0; s < 2; ++s) {
    std::vector<CMat> slots;
    for (int slot = 0; slot < 3; ++slot) {
      slots.push_back(random_block(2, 6, 900 + 10 * s + slot).unaryExpr([](cxd v) {
        return cxd(static_cast<float>(v.real()), static_cast<float>(v.imag()));
      }));
    }
    samples.push_back(slots);
  }
  std::stringstream buf;
  write_quantized_blocks(buf, header, samples);
  const QuantizedBlobFile file = read_quantized_blocks(buf);
  EXPECT_EQ(file.header.n_ap, header.n_ap);
  EXPECT_EQ(file.header.q_bits, header.q_bits);
  ASSERT_EQ(file.samples.size(), samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s)
    for (std::size_t slot = 0; slot < samples[s].size(); ++slot)
      EXPECT_EQ((file.samples[s][slot] - samples[s][slot]).norm(), 0.0);
}
