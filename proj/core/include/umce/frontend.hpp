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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "umce/geometry.hpp"
#include "umce/types.hpp"

namespace umce {

inline constexpr int kInfiniteBits = -1;

// Receiver impairment settings. bits == kInfiniteBits disables quantization.
struct QuantizerConfig {
  int bits = kInfiniteBits;       // 1..16 or kInfiniteBits
  int oversampling = 1;           // W in {1, 2, 4}
  double iq_gain_error = 0.0;     // zeta_A
  double iq_phase_error_rad = 0.0;  // zeta_theta

  bool quantization_enabled() const { return bits != kInfiniteBits; }
  bool is_passthrough() const {
    return !quantization_enabled() && oversampling == 1 && iq_gain_error == 0.0 &&
           iq_phase_error_rad == 0.0;
  }
  void validate() const;
};

// Pilot broadcast for one channel-estimation frame: G slots of random-phase
// analog precoders and per-subcarrier symbols, plus the stacked per-subcarrier
// pilot matrices S[k] with row g = (F_RF[g] s[g,k])^T.
struct PilotBlock {
  std::vector<CMat> f_rf;     // G matrices, N_AP x N_RF, constant modulus
  std::vector<CMat> symbols;  // G matrices, N_RF x K; column k-1 is s[g,k]
  std::vector<CMat> s;        // K matrices, G x N_AP

  int g_count() const { return static_cast<int>(f_rf.size()); }
};

PilotBlock gen_pilots(const ArrayGeometry& geometry, int g_count, int n_rf,
                      std::uint64_t seed);

struct RxBlocks {
  CMat clean;          // G x K, noiseless
  CMat noisy;          // G x K, AWGN added
  double noise_power;  // per-component complex noise variance
};

/// y[g,k] = h[:,k]^T F_RF[g] s[g,k] + n[g,k]. The noise variance is set so
/// that mean |clean|^2 / variance equals the requested SNR; snr_db may be
/// +infinity for a noiseless block.
RxBlocks simulate_rx(const CMat& h, const PilotBlock& pilots, double snr_db,
                     std::uint64_t seed);

/// Row-wise unitary inverse DFT (frequency -> time) and its inverse.
/// Mutually inverse and norm preserving.
CMat freq_to_time(const CMat& block);
CMat time_to_freq(const CMat& block);

/// IQ gain/phase mismatch applied per sample:
///   y' = (cos(t/2) + j*a*sin(t/2)) * y + (a*cos(t/2) - j*sin(t/2)) * conj(y)
/// with a = iq_gain_error and t = iq_phase_error_rad.
CMat apply_iq_imbalance(const CMat& samples, const QuantizerConfig& config);

/// W-times oversampled time samples of one frequency row: zero-pad the
/// spectrum to length W*K (band-limited interpolation), take the unitary
/// inverse DFT and split into W polyphase branches of K samples each.
/// Branch 0 with W = 1 equals the freq_to_time output.
CMat oversample(const Eigen::RowVectorXcd& freq_row, int w);

/// Inverse of oversample for unquantized inputs: undo the per-branch phase
/// ramp, average the branches and return to the frequency domain.
Eigen::RowVectorXcd naive_dequantize(const CMat& branches);

/// Uniform 2^Q-level quantizer applied independently to the real and
/// imaginary parts. The codebook spans the block's component range
/// [Y_min, Y_max] with levels Y_min + i*step, step = (Y_max-Y_min)/(2^Q-1),
/// so the extremes are reconstruction levels and requantizing quantized data
/// is a bit-exact no-op. A zero-range (constant) block is returned unchanged.
/// Throws std::invalid_argument on an empty block.
CMat quantize(const CMat& samples, const QuantizerConfig& config);

/// Same codebook, explicit range (used when the range is shared across blocks).
CMat quantize(const CMat& samples, const QuantizerConfig& config, double y_min,
              double y_max);

struct ReceivedBlock {
  CMat freq;                         // G x K after the full chain
  std::vector<CMat> time_quantized;  // G blocks of W x K quantized samples
  double noise_power = 0.0;
};

/// Full impairment chain for a noisy frequency block: per pilot slot,
/// oversample -> IQ imbalance -> quantize, then naive de-quantization back to
/// the frequency domain. With a pass-through config the output equals the
/// input up to transform roundoff.
ReceivedBlock receiver_frontend(const CMat& freq, const QuantizerConfig& config,
                                double noise_power = 0.0);

// Binary export of quantized time-domain blocks. Layout: little-endian header
// of seven 32-bit unsigned fields (magic 'UMQD', version, N_AP, K, G, W, Q;
// Q = 0xFFFFFFFF when quantization is disabled), then for each sample and
// each pilot slot a real plane followed by an imaginary plane of W*K 32-bit
// floats in row-major order.
inline constexpr std::uint32_t kQuantizedBlobMagic = 0x44514D55u;  // "UMQD"
inline constexpr std::uint32_t kQuantizedBlobVersion = 1;

struct QuantizedBlobHeader {
  std::uint32_t n_ap = 0;
  std::uint32_t k = 0;
  std::uint32_t g = 0;
  std::uint32_t w = 0;
  std::uint32_t q_bits = 0;  // 0xFFFFFFFF: infinite resolution
};

void write_quantized_blocks(std::ostream& out, const QuantizedBlobHeader& header,
                            const std::vector<std::vector<CMat>>& samples);

struct QuantizedBlobFile {
  QuantizedBlobHeader header;
  std::vector<std::vector<CMat>> samples;  // [sample][slot] W x K
};

QuantizedBlobFile read_quantized_blocks(std::istream& in);

}  // namespace umce
