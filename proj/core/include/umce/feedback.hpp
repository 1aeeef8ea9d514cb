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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "umce/types.hpp"

namespace umce {

// Fixed-budget framing of the sparse CSI estimate: the S strongest rows are
// kept and sent as index + uniformly quantized coefficients. The budget
//   N_f = S*ceil(log2 V) + 2*S*K*Q_f + 2*32
// counts the support indices, the coefficient codes, and the two 32-bit
// scale factors, so overhead comparisons are self-contained.
struct FeedbackCodebook {
  int support_size = 8;  // S
  int coeff_bits = 4;    // Q_f per real component
  int v_total = 512;     // dictionary columns
  int k_total = 64;      // subcarriers

  int index_bits() const;
  std::size_t bit_budget() const;
  void validate() const;
};

struct BitVector {
  std::vector<std::uint8_t> bytes;  // bit i = (bytes[i/8] >> (i%8)) & 1
  std::size_t n_bits = 0;
};

/// Encode the V x K sparse matrix: select the S rows of largest aggregate
/// energy (ties to the lowest index), write their indices in ascending
/// order, two float32 scales (max |Re| and max |Im| over the retained
/// coefficients), then the midrise codes of every retained component.
/// Deterministic; always emits exactly bit_budget() bits.
BitVector encode_csi(const CMat& h_sparse, const FeedbackCodebook& codebook);

/// Rebuild the V x K sparse matrix from the bit vector. Throws
/// std::runtime_error with the offending byte offset on malformed framing.
CMat decode_sparse(const BitVector& bits, const FeedbackCodebook& codebook);

/// decode_sparse followed by the per-subcarrier dictionary projection
/// H'[:,k] = D[k] * h_sparse[:,k].
CMat decode_csi(const BitVector& bits, const FeedbackCodebook& codebook,
                const std::vector<CMat>& dictionary);

/// Length-prefixed blob: 64-bit little-endian bit count, then the packed
/// bytes.
void write_bitvector(std::ostream& out, const BitVector& bits);
BitVector read_bitvector(std::istream& in);

}  // namespace umce
