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
#include <vector>

#include "umce/types.hpp"

namespace umce {

// Row prior for the sparse representation: a row is zero with probability
// 1-gamma, otherwise CN(0, epsilon*I) across subcarriers (common support).
struct BernoulliGaussianPrior {
  double gamma = 0.1;    // activity probability, in [0, 1]
  double epsilon = 1.0;  // active variance, > 0

  void validate() const;
};

// Noise variances are floored here before any division; the appendix
// formulas are singular at sigma^2 = 0.
inline constexpr double kNoiseFloor = 1e-12;
// Clamp for the exponent of phi; beyond this the limits are exactly 0 or 1.
inline constexpr double kPhiExpClamp = 700.0;

struct ShrinkageResult {
  CVec h;      // denoised row, length K
  double phi;  // row activity weight, in [0, 1]
};

/// MMSE denoiser for one dictionary row observed across K subcarriers with
/// per-subcarrier noise power sigma2:
///   out = phi(h) * diag(eps/(eps+sigma2[k])) * h,
///   phi(h) = 1 / (1 + (1-gamma)/gamma * exp(-h^H P h) * prod_k (1+eps/sigma2[k])),
///   P = diag(eps / (sigma2[k]*(sigma2[k]+eps))).
/// gamma = 0 and gamma = 1 are handled as exact limits (phi = 0 resp. 1).
ShrinkageResult shrinkage_mmse(const CVec& h_row, const BernoulliGaussianPrior& prior,
                               const RVec& sigma2);

/// Partial derivative of component k of the denoiser with respect to its own
/// input, holding phi constant (large-dimension approximation):
///   d_k = eps * phi(h) / (eps + sigma2[k]).
RVec shrinkage_derivative(const CVec& h_row, const BernoulliGaussianPrior& prior,
                          const RVec& sigma2);

// Per-iteration state of the AMP recursions.
struct AmpState {
  CMat estimate;  // V x K sparse estimate
  CMat residual;  // G x K
  RVec noise;     // sigma_t^2 per subcarrier
  int iteration = 0;
};

/// Single measurement vector AMP with the Bernoulli-Gaussian MMSE shrinkage:
/// matched filter, noise estimate ||v||^2/G, component-wise shrinkage and the
/// Onsager-corrected residual, starting from h = 0, v = y.
CVec smv_amp(const CVec& y, const CMat& a, const BernoulliGaussianPrior& prior,
             int iterations);

struct GmmvAmpOptions {
  int iterations = 80;
  // Fraction of the previous residual retained per iteration:
  //   v <- (1-damping)*v_new + damping*v_old.
  // 0 disables damping; the structured (steering-vector) dictionaries need
  // heavy damping to keep the recursion from diverging.
  double damping = 0.9;
  bool record_iterates = false;
};

struct GmmvAmpResult {
  CMat h_sparse;  // V x K
  std::vector<AmpState> iterates;  // filled when record_iterates is set
};

/// GMMV-AMP: per-subcarrier matched filtering with measurement matrices A[k]
/// and the row-wise shrinkage coupling subcarriers through the common
/// support. Undamped (damping = 1) this is the initialization point of the
/// unrolled network.
GmmvAmpResult gmmv_amp(const CMat& y, const std::vector<CMat>& a,
                       const BernoulliGaussianPrior& prior,
                       const GmmvAmpOptions& options);

/// Simultaneous OMP: per iteration pick the column maximizing the aggregate
/// correlation sum_k |A[k]^H r[k]| (ties to the lowest index), re-fit least
/// squares per subcarrier on the selected support, update residuals. Runs
/// exactly `sparsity` iterations. Throws std::runtime_error naming the
/// iteration if the selected columns become rank deficient.
CMat somp(const CMat& y, const std::vector<CMat>& a, int sparsity);

/// The AMP recursions assume measurement columns of roughly unit norm.
/// Pilot-composed matrices A[k] = S[k] D[k] have column energy G*N_RF in
/// expectation (unit-modulus dictionary entries, 1/sqrt(N_AP)-modulus
/// precoder phases, CN(0,1) symbols), so estimation problems built from them
/// are divided by this factor on both sides; the sparse estimate is
/// invariant to the common scaling.
inline double measurement_column_scale(int g_count, int n_rf) {
  return std::sqrt(static_cast<double>(g_count) * n_rf);
}

/// Companion scaling that brings the active sparse coefficients to unit
/// variance: on-grid path coefficients carry the channel normalization
/// 1/sqrt(L*N_AP), so multiplying the observations by this factor makes the
/// prior's epsilon = 1 the matched choice. The reconstruction D*h must be
/// divided by the same factor before comparing against the channel.
inline double coefficient_unit_scale(int l_total, int n_ap) {
  return std::sqrt(static_cast<double>(l_total) * n_ap);
}

}  // namespace umce
