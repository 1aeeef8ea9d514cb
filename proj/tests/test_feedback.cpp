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

#include "umce/feedback.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "umce/dictionary.hpp"
#include "umce/rng.hpp"

using namespace umce;

namespace {

CMat sparse_matrix(int v, int k, int nonzero_rows, std::uint64_t seed) {
  Rng rng(seed);
  CMat m = CMat::Zero(v, k);
  for (int r = 0; r < nonzero_rows; ++r) {
    const int row = static_cast<int>(rng.next_u64() % v);
    for (int j = 0; j < k; ++j) m(row, j) = rng.cnormal();
  }
  return m;
}

}  // namespace

TEST(Feedback, BitBudgetAccounting) {
  // S = 8, V = 512, K = 16, Q_f = 4 -> 8*9 + 2*8*16*4 + 64 = 1160 bits
  FeedbackCodebook cb;
  cb.support_size = 8;
  cb.coeff_bits = 4;
  cb.v_total = 512;
  cb.k_total = 16;
  EXPECT_EQ(cb.index_bits(), 9);
  EXPECT_EQ(cb.bit_budget(), 1160u);

  const CMat x = sparse_matrix(512, 16, 5, 1);
  const BitVector bits = encode_csi(x, cb);
  EXPECT_EQ(bits.n_bits, cb.bit_budget());

  // budget does not depend on content
  const BitVector bits2 = encode_csi(CMat::Zero(512, 16), cb);
  EXPECT_EQ(bits2.n_bits, cb.bit_budget());
}

TEST(Feedback, ZeroInputDecodesToZero) {
  FeedbackCodebook cb;
  cb.support_size = 4;
  cb.coeff_bits = 4;
  cb.v_total = 32;
  cb.k_total = 8;
  const BitVector bits = encode_csi(CMat::Zero(32, 8), cb);
  EXPECT_EQ(decode_sparse(bits, cb).norm(), 0.0);
}

TEST(Feedback, HighResolutionRoundtripOnSparseInput) {
  FeedbackCodebook cb;
  cb.support_size = 6;
  cb.coeff_bits = 16;
  cb.v_total = 64;
  cb.k_total = 8;
  const CMat x = sparse_matrix(64, 8, 6, 3);
  const BitVector bits = encode_csi(x, cb);
  const CMat rec = decode_sparse(bits, cb);
  const double err_db = 10.0 * std::log10((rec - x).squaredNorm() / x.squaredNorm());
  EXPECT_LT(err_db, -60.0);

  // full support, 16-bit: near lossless for any input
  FeedbackCodebook full;
  full.support_size = 16;
  full.coeff_bits = 16;
  full.v_total = 16;
  full.k_total = 8;
  Rng rng(4);
  CMat dense(16, 8);
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 16; ++i) dense(i, j) = rng.cnormal();
  const CMat rec2 = decode_sparse(encode_csi(dense, full), full);
  const double err2_db =
      10.0 * std::log10((rec2 - dense).squaredNorm() / dense.squaredNorm());
  EXPECT_LT(err2_db, -60.0);
}

TEST(Feedback, FramingRoundtripIsExact) {
  // decode(encode(x)) re-encoded reproduces the identical bit vector
  for (int trial = 0; trial < 300; ++trial) {
    Rng rng(1000 + trial);
    FeedbackCodebook cb;
    cb.support_size = 1 + static_cast<int>(rng.next_u64() % 8);
    cb.coeff_bits = 1 + static_cast<int>(rng.next_u64() % 8);
    cb.v_total = 16 + static_cast<int>(rng.next_u64() % 49);
    cb.k_total = 1 + static_cast<int>(rng.next_u64() % 8);
    const int rows = static_cast<int>(rng.next_u64() % (cb.support_size + 3));
    const CMat x = sparse_matrix(cb.v_total, cb.k_total, rows, 5000 + trial);

    const BitVector first = encode_csi(x, cb);
    const CMat decoded = decode_sparse(first, cb);
    const BitVector second = encode_csi(decoded, cb);
    ASSERT_EQ(first.n_bits, second.n_bits);
    EXPECT_EQ(first.bytes, second.bytes) << "trial " << trial;
  }
}

TEST(Feedback, ReconstructionMonotoneInBitsAndSupport) {
  // Two regimes: the Q_f trend is measured on inputs with support exactly S
  // (quantization error dominates); the S trend on inputs whose support
  // covers the largest probed S (truncation dominates, and every retained
  // row carries signal).
  const int v = 64, kk = 8;
  std::vector<CMat> sparse8, sparse20;
  for (int i = 0; i < 40; ++i) {
    sparse8.push_back(sparse_matrix(v, kk, 8, 9000 + i));
    sparse20.push_back(sparse_matrix(v, kk, 20, 7000 + i));
  }

  auto mean_nmse = [&](const std::vector<CMat>& samples, int support, int bits) {
    FeedbackCodebook cb;
    cb.support_size = support;
    cb.coeff_bits = bits;
    cb.v_total = v;
    cb.k_total = kk;
    double acc = 0.0;
    for (const CMat& x : samples) {
      const CMat rec = decode_sparse(encode_csi(x, cb), cb);
      acc += (rec - x).squaredNorm() / x.squaredNorm();
    }
    return acc / samples.size();
  };

  EXPECT_GT(mean_nmse(sparse8, 8, 2), mean_nmse(sparse8, 8, 4));
  EXPECT_GT(mean_nmse(sparse8, 8, 4), mean_nmse(sparse8, 8, 8));
  EXPECT_GT(mean_nmse(sparse20, 4, 6), mean_nmse(sparse20, 8, 6));
  EXPECT_GT(mean_nmse(sparse20, 8, 6), mean_nmse(sparse20, 16, 6));
}

TEST(Feedback, DecodeCsiProjectsThroughDictionary) {
  ArrayGeometry g;
  g.n_ap = 16;
  g.carrier_freq_hz = 70e9;
  g.bandwidth_hz = 10e9;
  g.n_subcarriers = 4;
  const DftWrd wrd = build_dft_wrd(g, 2);

  FeedbackCodebook cb;
  cb.support_size = 2;
  cb.coeff_bits = 16;
  cb.v_total = wrd.columns();
  cb.k_total = g.n_subcarriers;

  const CMat x = sparse_matrix(cb.v_total, cb.k_total, 2, 17);
  const BitVector bits = encode_csi(x, cb);
  const CMat recon = decode_csi(bits, cb, wrd.d);
  CMat expected(g.n_ap, g.n_subcarriers);
  const CMat sparse = decode_sparse(bits, cb);
  for (int k = 0; k < g.n_subcarriers; ++k) expected.col(k) = wrd.d[k] * sparse.col(k);
  EXPECT_EQ((recon - expected).norm(), 0.0);
}

TEST(Feedback, MalformedFramingReportsOffset) {
  FeedbackCodebook cb;
  cb.support_size = 2;
  cb.coeff_bits = 4;
  cb.v_total = 8;
  cb.k_total = 2;
  const CMat x = sparse_matrix(8, 2, 2, 23);
  BitVector bits = encode_csi(x, cb);

  BitVector truncated = bits;
  truncated.n_bits -= 8;
  EXPECT_THROW(decode_sparse(truncated, cb), std::runtime_error);

  // wrong codebook length
  FeedbackCodebook other = cb;
  other.support_size = 3;
  try {
    decode_sparse(bits, other);
    FAIL() << "expected framing error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
  }
}

TEST(Feedback, BlobIoRoundtrip) {
  FeedbackCodebook cb;
  cb.support_size = 3;
  cb.coeff_bits = 5;
  cb.v_total = 16;
  cb.k_total = 4;
  const BitVector bits = encode_csi(sparse_matrix(16, 4, 3, 31), cb);
  std::stringstream buf;
  write_bitvector(buf, bits);
  const BitVector back = read_bitvector(buf);
  EXPECT_EQ(back.n_bits, bits.n_bits);
  EXPECT_EQ(back.bytes, bits.bytes);
}
