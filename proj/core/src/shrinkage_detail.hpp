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

#include <cmath>

#include "umce/estimators.hpp"
#include "umce/types.hpp"

// Shared pieces of the Bernoulli-Gaussian MMSE shrinkage. The AMP reference
// implementation and the unrolled network must evaluate phi through the same
// code path so their iterates agree to roundoff.
namespace umce::detail {

inline RVec floor_noise(const RVec& sigma2) { return sigma2.cwiseMax(kNoiseFloor); }

/// log((1-gamma)/gamma) + sum_k log(1 + eps/sigma2[k]), the constant part of
/// phi's exponent; kept in the log domain so the product never overflows.
inline double log_ratio_const(double gamma, double epsilon, const RVec& s2) {
  double lc = std::log1p(-gamma) - std::log(gamma);
  for (Eigen::Index k = 0; k < s2.size(); ++k) {
    lc += std::log1p(epsilon / s2(k));
  }
  return lc;
}

inline double phi_from_evidence(double evidence, double lc) {
  double z = lc - evidence;
  if (z > kPhiExpClamp) z = kPhiExpClamp;
  if (z < -kPhiExpClamp) z = -kPhiExpClamp;
  return 1.0 / (1.0 + std::exp(z));
}

}  // namespace umce::detail
