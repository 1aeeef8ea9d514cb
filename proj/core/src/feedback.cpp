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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace umce {

int FeedbackCodebook::index_bits() const {
  int bits = 0;
  while ((1u << bits) < static_cast<unsigned>(v_total)) ++bits;
  return bits;
}

std::size_t FeedbackCodebook::bit_budget() const {
  return static_cast<std::size_t>(support_size) * index_bits() +
         2u * static_cast<std::size_t>(support_size) * k_total * coeff_bits + 64u;
}

void FeedbackCodebook::validate() const {
  if (support_size < 1 || support_size > v_total) {
    throw std::invalid_argument("feedback: support size must lie in 1..V");
  }
  if (coeff_bits < 1 || coeff_bits > 16) {
    throw std::invalid_argument("feedback: coefficient bits must lie in 1..16");
  }
  if (k_total < 1) throw std::invalid_argument("feedback: K must be >= 1");
}

namespace {

class BitWriter {
 public:
  void put(std::uint64_t value, int bits) {
    for (int i = 0; i < bits; ++i) {
      const std::size_t pos = n_bits_++;
      if (pos / 8 >= bytes_.size()) bytes_.push_back(0);
      if ((value >> i) & 1u) bytes_[pos / 8] |= static_cast<std::uint8_t>(1u << (pos % 8));
    }
  }
  void put_f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put(bits, 32);
  }
  BitVector finish() { return BitVector{std::move(bytes_), n_bits_}; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t n_bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const BitVector& bv) : bv_(bv) {}

  std::uint64_t get(int bits) {
    std::uint64_t value = 0;
    for (int i = 0; i < bits; ++i) {
      if (pos_ >= bv_.n_bits) {
        throw std::runtime_error("feedback decode: truncated stream at byte offset " +
                                 std::to_string(pos_ / 8));
      }
      if ((bv_.bytes[pos_ / 8] >> (pos_ % 8)) & 1u) value |= std::uint64_t{1} << i;
      ++pos_;
    }
    return value;
  }
  float get_f32() {
    const std::uint32_t bits = static_cast<std::uint32_t>(get(32));
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::size_t byte_offset() const { return pos_ / 8; }

 private:
  const BitVector& bv_;
  std::size_t pos_ = 0;
};

// Symmetric midrise grid over [-scale, scale]: level(i) spans the endpoints,
// no level sits at zero, and re-encoding decoded levels reproduces the codes
// exactly.
int coeff_index(double c, double scale, int bits) {
  if (scale <= 0.0) return 0;
  const double m = static_cast<double>((1 << bits) - 1);
  long idx = std::lround((c / scale + 1.0) * m / 2.0);
  if (idx < 0) idx = 0;
  if (idx > (1 << bits) - 1) idx = (1 << bits) - 1;
  return static_cast<int>(idx);
}

double coeff_level(int idx, double scale, int bits) {
  if (scale <= 0.0) return 0.0;
  const double m = static_cast<double>((1 << bits) - 1);
  return scale * (2.0 * idx - m) / m;
}

}  // namespace

BitVector encode_csi(const CMat& h_sparse, const FeedbackCodebook& codebook) {
  codebook.validate();
  if (h_sparse.rows() != codebook.v_total || h_sparse.cols() != codebook.k_total) {
    throw std::invalid_argument("encode_csi: matrix shape does not match codebook");
  }
  const int v_total = codebook.v_total;
  const int kk = codebook.k_total;
  const int s_count = codebook.support_size;

  std::vector<int> order(v_total);
  std::iota(order.begin(), order.end(), 0);
  RVec energy(v_total);
  for (int v = 0; v < v_total; ++v) energy(v) = h_sparse.row(v).squaredNorm();
  std::stable_sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    if (energy(lhs) != energy(rhs)) return energy(lhs) > energy(rhs);
    return lhs < rhs;
  });
  std::vector<int> support(order.begin(), order.begin() + s_count);
  std::sort(support.begin(), support.end());

  double max_re = 0.0;
  double max_im = 0.0;
  for (int v : support) {
    for (int k = 0; k < kk; ++k) {
      max_re = std::max(max_re, std::abs(h_sparse(v, k).real()));
      max_im = std::max(max_im, std::abs(h_sparse(v, k).imag()));
    }
  }
  const float scale_re = static_cast<float>(max_re);
  const float scale_im = static_cast<float>(max_im);

  BitWriter writer;
  for (int v : support) writer.put(static_cast<std::uint64_t>(v), codebook.index_bits());
  writer.put_f32(scale_re);
  writer.put_f32(scale_im);
  for (int v : support) {
    for (int k = 0; k < kk; ++k) {
      writer.put(coeff_index(h_sparse(v, k).real(), scale_re, codebook.coeff_bits),
                 codebook.coeff_bits);
      writer.put(coeff_index(h_sparse(v, k).imag(), scale_im, codebook.coeff_bits),
                 codebook.coeff_bits);
    }
  }
  BitVector out = writer.finish();
  // Fixed-budget framing: the layout above always fills the exact budget.
  if (out.n_bits != codebook.bit_budget()) {
    throw std::logic_error("encode_csi: framing does not match the bit budget");
  }
  return out;
}

CMat decode_sparse(const BitVector& bits, const FeedbackCodebook& codebook) {
  codebook.validate();
  if (bits.n_bits != codebook.bit_budget()) {
    throw std::runtime_error("feedback decode: expected " +
                             std::to_string(codebook.bit_budget()) + " bits, got " +
                             std::to_string(bits.n_bits) + " (byte offset 0)");
  }
  BitReader reader(bits);
  std::vector<int> support(codebook.support_size);
  for (int& v : support) {
    v = static_cast<int>(reader.get(codebook.index_bits()));
    if (v >= codebook.v_total) {
      throw std::runtime_error("feedback decode: support index " + std::to_string(v) +
                               " out of range at byte offset " +
                               std::to_string(reader.byte_offset()));
    }
  }
  const double scale_re = reader.get_f32();
  const double scale_im = reader.get_f32();

  CMat h = CMat::Zero(codebook.v_total, codebook.k_total);
  for (int v : support) {
    for (int k = 0; k < codebook.k_total; ++k) {
      const int re_idx = static_cast<int>(reader.get(codebook.coeff_bits));
      const int im_idx = static_cast<int>(reader.get(codebook.coeff_bits));
      h(v, k) = cxd(coeff_level(re_idx, scale_re, codebook.coeff_bits),
                    coeff_level(im_idx, scale_im, codebook.coeff_bits));
    }
  }
  return h;
}

CMat decode_csi(const BitVector& bits, const FeedbackCodebook& codebook,
                const std::vector<CMat>& dictionary) {
  if (static_cast<int>(dictionary.size()) != codebook.k_total ||
      dictionary.empty() || dictionary[0].cols() != codebook.v_total) {
    throw std::invalid_argument("decode_csi: dictionary does not match codebook");
  }
  const CMat sparse = decode_sparse(bits, codebook);
  CMat out(dictionary[0].rows(), codebook.k_total);
  for (int k = 0; k < codebook.k_total; ++k) {
    out.col(k) = dictionary[k] * sparse.col(k);
  }
  return out;
}

void write_bitvector(std::ostream& out, const BitVector& bits) {
  std::uint64_t n = bits.n_bits;
  unsigned char hdr[8];
  for (int i = 0; i < 8; ++i) hdr[i] = static_cast<unsigned char>((n >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(hdr), 8);
  out.write(reinterpret_cast<const char*>(bits.bytes.data()),
            static_cast<std::streamsize>(bits.bytes.size()));
}

BitVector read_bitvector(std::istream& in) {
  unsigned char hdr[8];
  in.read(reinterpret_cast<char*>(hdr), 8);
  if (!in) throw std::runtime_error("bitvector: truncated length prefix");
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(hdr[i]) << (8 * i);
  BitVector bits;
  bits.n_bits = n;
  bits.bytes.resize((n + 7) / 8);
  in.read(reinterpret_cast<char*>(bits.bytes.data()),
          static_cast<std::streamsize>(bits.bytes.size()));
  if (!in) throw std::runtime_error("bitvector: truncated payload");
  return bits;
}

}  // namespace umce
