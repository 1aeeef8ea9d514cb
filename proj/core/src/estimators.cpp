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

#include "umce/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "shrinkage_detail.hpp"

namespace umce {

using detail::floor_noise;
using detail::log_ratio_const;
using detail::phi_from_evidence;

void BernoulliGaussianPrior::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("prior: gamma must lie in [0, 1]");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("prior: epsilon must be positive");
  }
}

ShrinkageResult shrinkage_mmse(const CVec& h_row, const BernoulliGaussianPrior& prior,
                               const RVec& sigma2) {
  prior.validate();
  if (h_row.size() != sigma2.size()) {
    throw std::invalid_argument("shrinkage_mmse: length mismatch");
  }
  ShrinkageResult out;
  if (prior.gamma == 0.0) {
    out.h = CVec::Zero(h_row.size());
    out.phi = 0.0;
    return out;
  }
  const RVec s2 = floor_noise(sigma2);
  const RVec wiener = (s2.array() + prior.epsilon).inverse() * prior.epsilon;
  if (prior.gamma == 1.0) {
    out.phi = 1.0;
  } else {
    double evidence = 0.0;
    for (Eigen::Index k = 0; k < s2.size(); ++k) {
      const double p = prior.epsilon / (s2(k) * (s2(k) + prior.epsilon));
      evidence += p * std::norm(h_row(k));
    }
    out.phi = phi_from_evidence(evidence, log_ratio_const(prior.gamma, prior.epsilon, s2));
  }
  out.h = out.phi * (wiener.array() * h_row.array()).matrix();
  return out;
}

RVec shrinkage_derivative(const CVec& h_row, const BernoulliGaussianPrior& prior,
                          const RVec& sigma2) {
  const ShrinkageResult r = shrinkage_mmse(h_row, prior, sigma2);
  const RVec s2 = floor_noise(sigma2);
  return r.phi * prior.epsilon * (s2.array() + prior.epsilon).inverse();
}

CVec smv_amp(const CVec& y, const CMat& a, const BernoulliGaussianPrior& prior,
             int iterations) {
  prior.validate();
  if (a.rows() != y.size()) {
    throw std::invalid_argument("smv_amp: dimension mismatch");
  }
  if (iterations < 1) {
    throw std::invalid_argument("smv_amp: iterations must be >= 1");
  }
  const int g = static_cast<int>(a.rows());
  const int v_total = static_cast<int>(a.cols());

  CVec h = CVec::Zero(v_total);
  CVec v = y;
  RVec s2_vec(1);
  for (int t = 0; t < iterations; ++t) {
    const CVec htil = h + a.adjoint() * v;
    s2_vec(0) = v.squaredNorm() / g;
    double deriv_sum = 0.0;
    CVec row(1);
    for (int j = 0; j < v_total; ++j) {
      row(0) = htil(j);
      const ShrinkageResult r = shrinkage_mmse(row, prior, s2_vec);
      h(j) = r.h(0);
      deriv_sum += r.phi * prior.epsilon /
                   (std::max(s2_vec(0), kNoiseFloor) + prior.epsilon);
    }
    const double b = deriv_sum / g;
    v = y - a * h + b * v;
  }
  return h;
}

GmmvAmpResult gmmv_amp(const CMat& y, const std::vector<CMat>& a,
                       const BernoulliGaussianPrior& prior,
                       const GmmvAmpOptions& options) {
  prior.validate();
  const int kk = static_cast<int>(a.size());
  if (kk == 0 || y.cols() != kk || y.rows() != a[0].rows()) {
    throw std::invalid_argument("gmmv_amp: dimension mismatch");
  }
  if (!(options.damping >= 0.0 && options.damping < 1.0)) {
    throw std::invalid_argument("gmmv_amp: damping must lie in [0, 1)");
  }
  if (options.iterations < 1) {
    throw std::invalid_argument("gmmv_amp: iterations must be >= 1");
  }
  const int g = static_cast<int>(y.rows());
  const int v_total = static_cast<int>(a[0].cols());
  const double alpha = options.damping;

  GmmvAmpResult out;
  CMat h = CMat::Zero(v_total, kk);
  CMat v = y;
  CMat htil(v_total, kk);
  RVec s2(kk);
  for (int t = 0; t < options.iterations; ++t) {
    for (int k = 0; k < kk; ++k) {
      htil.col(k) = h.col(k) + a[k].adjoint() * v.col(k);
      s2(k) = std::max(v.col(k).squaredNorm() / g, kNoiseFloor);
    }
    const RVec wiener = (s2.array() + prior.epsilon).inverse() * prior.epsilon;
    const RVec p = prior.epsilon * (s2.array() * (s2.array() + prior.epsilon)).inverse();

    double phi_sum = 0.0;
    if (prior.gamma == 0.0) {
      h.setZero();
    } else if (prior.gamma == 1.0) {
      phi_sum = v_total;
      for (int row = 0; row < v_total; ++row) {
        h.row(row) = (wiener.transpose().array() * htil.row(row).array()).matrix();
      }
    } else {
      const double lc = log_ratio_const(prior.gamma, prior.epsilon, s2);
      for (int row = 0; row < v_total; ++row) {
        double evidence = 0.0;
        for (int k = 0; k < kk; ++k) evidence += p(k) * std::norm(htil(row, k));
        const double phi = phi_from_evidence(evidence, lc);
        phi_sum += phi;
        h.row(row) = phi * (wiener.transpose().array() * htil.row(row).array()).matrix();
      }
    }

    for (int k = 0; k < kk; ++k) {
      const double b = wiener(k) * (phi_sum / g);
      CVec v_new = y.col(k) - a[k] * h.col(k) + b * v.col(k);
      if (alpha == 0.0) {
        v.col(k) = v_new;
      } else {
        v.col(k) = (1.0 - alpha) * v_new + alpha * v.col(k);
      }
    }
    if (options.record_iterates) {
      AmpState state;
      state.estimate = h;
      state.residual = v;
      state.noise = s2;
      state.iteration = t + 1;
      out.iterates.push_back(std::move(state));
    }
  }
  out.h_sparse = std::move(h);
  return out;
}

CMat somp(const CMat& y, const std::vector<CMat>& a, int sparsity) {
  const int kk = static_cast<int>(a.size());
  if (kk == 0 || y.cols() != kk || y.rows() != a[0].rows()) {
    throw std::invalid_argument("somp: dimension mismatch");
  }
  const int g = static_cast<int>(y.rows());
  const int v_total = static_cast<int>(a[0].cols());
  if (sparsity < 1 || sparsity > std::min(g, v_total)) {
    throw std::invalid_argument("somp: sparsity must lie in 1..min(G, V)");
  }

  CMat residual = y;
  std::vector<int> support;
  CMat coeff;  // |support| x K after each refit
  for (int it = 0; it < sparsity; ++it) {
    RVec score = RVec::Zero(v_total);
    for (int k = 0; k < kk; ++k) {
      score += (a[k].adjoint() * residual.col(k)).cwiseAbs();
    }
    for (int s : support) score(s) = -1.0;  // never reselect
    int best = 0;
    for (int v = 1; v < v_total; ++v) {
      if (score(v) > score(best)) best = v;  // strict: ties keep lowest index
    }
    support.push_back(best);

    const int m = static_cast<int>(support.size());
    coeff.resize(m, kk);
    for (int k = 0; k < kk; ++k) {
      CMat sub(g, m);
      for (int j = 0; j < m; ++j) sub.col(j) = a[k].col(support[j]);
      Eigen::ColPivHouseholderQR<CMat> qr(sub);
      if (qr.rank() < m) {
        throw std::runtime_error("somp: rank-deficient support at iteration " +
                                 std::to_string(it + 1));
      }
      coeff.col(k) = qr.solve(y.col(k));
      residual.col(k) = y.col(k) - sub * coeff.col(k);
    }
  }

  CMat h = CMat::Zero(v_total, kk);
  for (std::size_t j = 0; j < support.size(); ++j) {
    h.row(support[j]) = coeff.row(static_cast<int>(j));
  }
  return h;
}

}  // namespace umce
