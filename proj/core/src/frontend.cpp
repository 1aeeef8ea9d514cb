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

#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "umce/rng.hpp"

namespace umce {

void QuantizerConfig::validate() const {
  if (bits != kInfiniteBits && (bits < 1 || bits > 16)) {
    throw std::invalid_argument("quantizer: bits must be in 1..16 or infinite");
  }
  if (oversampling != 1 && oversampling != 2 && oversampling != 4) {
    throw std::invalid_argument("quantizer: oversampling must be 1, 2 or 4");
  }
}

PilotBlock gen_pilots(const ArrayGeometry& geometry, int g_count, int n_rf,
                      std::uint64_t seed) {
  geometry.validate();
  if (g_count < 1) throw std::invalid_argument("gen_pilots: g_count must be >= 1");
  if (n_rf < 1) throw std::invalid_argument("gen_pilots: n_rf must be >= 1");

  const int n = geometry.n_ap;
  const int kk = geometry.n_subcarriers;
  const double mod = 1.0 / std::sqrt(static_cast<double>(n));

  Rng rng(seed);
  PilotBlock block;
  block.f_rf.reserve(g_count);
  block.symbols.reserve(g_count);
  for (int g = 0; g < g_count; ++g) {
    CMat f(n, n_rf);
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < n_rf; ++l) {
        const double xi = rng.uniform(0.0, 2.0 * kPi);
        f(i, l) = cxd(mod * std::cos(xi), mod * std::sin(xi));
      }
    }
    CMat sym(n_rf, kk);
    for (int k = 0; k < kk; ++k) {
      for (int l = 0; l < n_rf; ++l) sym(l, k) = rng.cnormal();
    }
    block.f_rf.push_back(std::move(f));
    block.symbols.push_back(std::move(sym));
  }

  block.s.reserve(kk);
  for (int k = 0; k < kk; ++k) {
    CMat s(g_count, n);
    for (int g = 0; g < g_count; ++g) {
      s.row(g) = (block.f_rf[g] * block.symbols[g].col(k)).transpose();
    }
    block.s.push_back(std::move(s));
  }
  return block;
}

RxBlocks simulate_rx(const CMat& h, const PilotBlock& pilots, double snr_db,
                     std::uint64_t seed) {
  const int kk = static_cast<int>(pilots.s.size());
  if (kk == 0 || h.cols() != kk || h.rows() != pilots.s[0].cols()) {
    throw std::invalid_argument("simulate_rx: channel/pilot shape mismatch");
  }
  const int g = pilots.g_count();

  CMat clean(g, kk);
  for (int k = 0; k < kk; ++k) {
    clean.col(k) = pilots.s[k] * h.col(k);
  }

  RxBlocks out;
  out.clean = clean;
  if (std::isinf(snr_db)) {
    out.noisy = clean;
    out.noise_power = 0.0;
    return out;
  }
  const double signal_power = clean.squaredNorm() / (static_cast<double>(g) * kk);
  const double sigma2 = signal_power / std::pow(10.0, snr_db / 10.0);
  Rng rng(seed);
  out.noisy = clean;
  const double sigma = std::sqrt(sigma2);
  for (int k = 0; k < kk; ++k) {
    for (int row = 0; row < g; ++row) {
      out.noisy(row, k) += sigma * rng.cnormal();
    }
  }
  out.noise_power = sigma2;
  return out;
}

namespace {

/// Unitary DFT matrix: F(a,b) = exp(-j*2*pi*a*b/n)/sqrt(n).
CMat dft_matrix(int n) {
  CMat f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double phase = -2.0 * kPi * static_cast<double>(a) * b / n;
      f(a, b) = cxd(scale * std::cos(phase), scale * std::sin(phase));
    }
  }
  return f;
}

/// Signed DFT bin of index b in an n-point transform (negative half mapped
/// below zero; the Nyquist bin of an even n goes to the negative side).
int signed_bin(int b, int n) { return (b <= (n - 1) / 2) ? b : b - n; }

}  // namespace

CMat freq_to_time(const CMat& block) {
  const int kk = static_cast<int>(block.cols());
  const CMat f = dft_matrix(kk);
  return block * f.conjugate();  // row-wise F^H
}

CMat time_to_freq(const CMat& block) {
  const int kk = static_cast<int>(block.cols());
  const CMat f = dft_matrix(kk);
  return block * f.transpose();
}

CMat apply_iq_imbalance(const CMat& samples, const QuantizerConfig& config) {
  const double a = config.iq_gain_error;
  const double half = config.iq_phase_error_rad / 2.0;
  const cxd mu(std::cos(half), a * std::sin(half));
  const cxd nu(a * std::cos(half), -std::sin(half));
  return mu * samples + nu * samples.conjugate();
}

CMat oversample(const Eigen::RowVectorXcd& freq_row, int w) {
  if (w != 1 && w != 2 && w != 4) {
    throw std::invalid_argument("oversample: W must be 1, 2 or 4");
  }
  const int kk = static_cast<int>(freq_row.size());
  const int n = w * kk;
  Eigen::RowVectorXcd padded = Eigen::RowVectorXcd::Zero(n);
  for (int b = 0; b < kk; ++b) {
    const int nu = signed_bin(b, kk);
    padded(nu >= 0 ? nu : n + nu) = freq_row(b);
  }
  const CMat f = dft_matrix(n);
  const Eigen::RowVectorXcd time = padded * f.conjugate();
  CMat branches(w, kk);
  for (int s = 0; s < kk; ++s) {
    for (int b = 0; b < w; ++b) {
      branches(b, s) = time(s * w + b);
    }
  }
  return branches;
}

Eigen::RowVectorXcd naive_dequantize(const CMat& branches) {
  const int w = static_cast<int>(branches.rows());
  const int kk = static_cast<int>(branches.cols());
  const int n = w * kk;
  const double gain = std::sqrt(static_cast<double>(w));
  Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(kk);
  for (int b = 0; b < w; ++b) {
    Eigen::RowVectorXcd fb = time_to_freq(branches.row(b)) * gain;
    for (int bin = 0; bin < kk; ++bin) {
      const double phase = 2.0 * kPi * signed_bin(bin, kk) * b / n;
      fb(bin) *= cxd(std::cos(phase), -std::sin(phase));  // remove branch ramp
    }
    acc += fb;
  }
  return acc / static_cast<double>(w);
}

CMat quantize(const CMat& samples, const QuantizerConfig& config, double y_min,
              double y_max) {
  config.validate();
  if (samples.size() == 0) {
    throw std::invalid_argument("quantize: empty input");
  }
  if (!config.quantization_enabled()) return samples;
  if (y_max <= y_min) return samples;  // zero-range guard

  const int levels = 1 << config.bits;
  const double step = (y_max - y_min) / (levels - 1);
  auto snap = [&](double c) {
    const double ratio = (c - y_min) / step;  // clamp before lround: inputs
    long idx;                                 // outside the range must saturate
    if (!(ratio > 0.0)) {
      idx = 0;
    } else if (ratio >= levels - 1) {
      idx = levels - 1;
    } else {
      idx = std::lround(ratio);
    }
    if (idx == 0) return y_min;
    if (idx == levels - 1) return y_max;  // keep extremes exact
    double v = y_min + static_cast<double>(idx) * step;
    if (v < y_min) v = y_min;
    if (v > y_max) v = y_max;
    return v;
  };

  CMat out(samples.rows(), samples.cols());
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      out(i, j) = cxd(snap(samples(i, j).real()), snap(samples(i, j).imag()));
    }
  }
  return out;
}

CMat quantize(const CMat& samples, const QuantizerConfig& config) {
  config.validate();
  if (samples.size() == 0) {
    throw std::invalid_argument("quantize: empty input");
  }
  if (!config.quantization_enabled()) return samples;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -y_min;
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      y_min = std::min({y_min, samples(i, j).real(), samples(i, j).imag()});
      y_max = std::max({y_max, samples(i, j).real(), samples(i, j).imag()});
    }
  }
  return quantize(samples, config, y_min, y_max);
}

ReceivedBlock receiver_frontend(const CMat& freq, const QuantizerConfig& config,
                                double noise_power) {
  config.validate();
  const int g = static_cast<int>(freq.rows());
  const int kk = static_cast<int>(freq.cols());

  ReceivedBlock out;
  out.noise_power = noise_power;
  out.time_quantized.reserve(g);
  out.freq.resize(g, kk);
  for (int row = 0; row < g; ++row) {
    CMat branches = oversample(freq.row(row), config.oversampling);
    branches = apply_iq_imbalance(branches, config);
    if (config.quantization_enabled()) {
      branches = quantize(branches, config);
    }
    out.freq.row(row) = naive_dequantize(branches);
    out.time_quantized.push_back(std::move(branches));
  }
  return out;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("quantized blob: truncated stream");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(std::istream& in) {
  const std::uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void write_quantized_blocks(std::ostream& out, const QuantizedBlobHeader& header,
                            const std::vector<std::vector<CMat>>& samples) {
  put_u32(out, kQuantizedBlobMagic);
  put_u32(out, kQuantizedBlobVersion);
  put_u32(out, header.n_ap);
  put_u32(out, header.k);
  put_u32(out, header.g);
  put_u32(out, header.w);
  put_u32(out, header.q_bits);
  for (const auto& sample : samples) {
    if (sample.size() != header.g) {
      throw std::invalid_argument("quantized blob: slot count mismatch");
    }
    for (const CMat& block : sample) {
      if (block.rows() != static_cast<int>(header.w) ||
          block.cols() != static_cast<int>(header.k)) {
        throw std::invalid_argument("quantized blob: block shape mismatch");
      }
      for (Eigen::Index i = 0; i < block.rows(); ++i)
        for (Eigen::Index j = 0; j < block.cols(); ++j)
          put_f32(out, static_cast<float>(block(i, j).real()));
      for (Eigen::Index i = 0; i < block.rows(); ++i)
        for (Eigen::Index j = 0; j < block.cols(); ++j)
          put_f32(out, static_cast<float>(block(i, j).imag()));
    }
  }
}

QuantizedBlobFile read_quantized_blocks(std::istream& in) {
  QuantizedBlobFile file;
  if (get_u32(in) != kQuantizedBlobMagic) {
    throw std::runtime_error("quantized blob: bad magic");
  }
  if (get_u32(in) != kQuantizedBlobVersion) {
    throw std::runtime_error("quantized blob: unsupported version");
  }
  file.header.n_ap = get_u32(in);
  file.header.k = get_u32(in);
  file.header.g = get_u32(in);
  file.header.w = get_u32(in);
  file.header.q_bits = get_u32(in);
  const int w = static_cast<int>(file.header.w);
  const int kk = static_cast<int>(file.header.k);
  const int g = static_cast<int>(file.header.g);
  while (true) {
    in.peek();
    if (in.eof()) break;
    std::vector<CMat> sample;
    sample.reserve(g);
    for (int slot = 0; slot < g; ++slot) {
      CMat block(w, kk);
      std::vector<float> re(static_cast<std::size_t>(w) * kk);
      std::vector<float> im(re.size());
      for (auto& v : re) v = get_f32(in);
      for (auto& v : im) v = get_f32(in);
      std::size_t idx = 0;
      for (int i = 0; i < w; ++i)
        for (int j = 0; j < kk; ++j, ++idx) block(i, j) = cxd(re[idx], im[idx]);
      sample.push_back(std::move(block));
    }
    file.samples.push_back(std::move(sample));
  }
  return file;
}

}  // namespace umce
