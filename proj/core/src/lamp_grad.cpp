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
//
// Reverse-mode differentiation of the unrolled forward pass. Complex
// intermediates carry the Wirtinger cotangent dL/d(conj z); real-valued
// intermediates carry plain dL/dx. The factor two between the two
// conventions is applied exactly once at each complex-to-real boundary, and
// the complex parameter gradients are scaled to dL/dRe + j*dL/dIm at the end
// so they compare directly against central finite differences.

#include <cmath>
#include <stdexcept>

#include "lamp_internal.hpp"
#include "umce/dictionary.hpp"
#include "umce/lamp.hpp"

namespace umce {

namespace {

/// Pull the dictionary cotangents back onto the AoD-distance grid. Column v
/// of D[k] has entries exp(-j*theta_i) with theta_i the relative-distance
/// phase of the grid point (d_v, phi_v); element 0 is identically 1.
void accumulate_grid_grads(const ArrayGeometry& geometry, const RVec& distances,
                           const RVec& angles, const std::vector<CMat>& dict,
                           const std::vector<CMat>& dict_adj, RVec& grad_d,
                           RVec& grad_phi) {
  const int n = geometry.n_ap;
  const int kk = static_cast<int>(dict.size());
  const int v_total = static_cast<int>(distances.size());
  for (int v = 0; v < v_total; ++v) {
    const double d = distances(v);
    const double phi = angles(v);
    const double x = d * std::cos(phi);
    const double y = d * std::sin(phi);
    const double dy0 = y - geometry.antenna_y_m(1);
    const double dist0 = std::sqrt(x * x + dy0 * dy0);
    double gx = 0.0;
    double gy = 0.0;
    for (int k = 0; k < kk; ++k) {
      const double two_pi_over_lambda =
          2.0 * kPi / subcarrier_wavelength(geometry, k + 1);
      for (int i = 1; i < n; ++i) {
        const double dyi = y - geometry.antenna_y_m(i + 1);
        const double disti = std::sqrt(x * x + dyi * dyi);
        // a = exp(-j*theta): dL/dtheta = -2 Im(adj * conj(a))
        const double gtheta =
            -2.0 * (dict_adj[k](i, v) * std::conj(dict[k](i, v))).imag();
        gx += gtheta * two_pi_over_lambda * (x / disti - x / dist0);
        gy += gtheta * two_pi_over_lambda * (dyi / disti - dy0 / dist0);
      }
    }
    grad_d(v) += gx * std::cos(phi) + gy * std::sin(phi);
    grad_phi(v) += -gx * d * std::sin(phi) + gy * d * std::cos(phi);
  }
}

}  // namespace

double lamp_loss_and_grad(const std::vector<const CMat*>& y_batch,
                          const std::vector<const CMat*>& h_true_batch,
                          const LampModelContext& context, const LampParams& params,
                          const LampGradOptions& options, LampGrads* grads) {
  params.validate();
  if (y_batch.size() != h_true_batch.size() || y_batch.empty()) {
    throw std::invalid_argument("lamp_loss_and_grad: empty or mismatched batch");
  }
  const int layers = options.layers < 0 ? params.layers : options.layers;
  const bool dict_grads =
      grads != nullptr && options.dict_gradients && params.learnable_dictionary;

  const std::vector<CMat> dict = context.dictionary(params);
  if (context.s.size() != dict.size()) {
    throw std::invalid_argument("lamp_loss_and_grad: pilot/dictionary mismatch");
  }
  std::vector<CMat> a;
  a.reserve(dict.size());
  for (std::size_t k = 0; k < dict.size(); ++k) a.push_back(context.s[k] * dict[k]);

  const int g = params.g;
  const int v_total = params.v;
  const int kk = params.k;
  const double batch = static_cast<double>(y_batch.size());
  const double gamma = params.gamma();
  const double epsilon = params.epsilon();

  if (grads != nullptr) *grads = LampGrads::zeros_like(params);
  std::vector<CMat> a_adj;
  std::vector<CMat> dict_adj;
  if (dict_grads) {
    a_adj.assign(kk, CMat::Zero(g, v_total));
    dict_adj.assign(kk, CMat::Zero(dict[0].rows(), v_total));
  }

  double gamma_grad = 0.0;
  double epsilon_grad = 0.0;
  double loss_sum = 0.0;

  for (std::size_t sample = 0; sample < y_batch.size(); ++sample) {
    const CMat& y = *y_batch[sample];
    const CMat& h_true = *h_true_batch[sample];
    const detail::LampForwardCache cache =
        detail::lamp_forward_cached(y, a, params, layers);

    CMat recon(h_true.rows(), kk);
    for (int k = 0; k < kk; ++k) recon.col(k) = dict[k] * cache.h_final.col(k);
    const double denom = h_true.squaredNorm();
    if (denom == 0.0) {
      throw std::domain_error("lamp_loss_and_grad: zero-norm reference channel");
    }
    const CMat delta = recon - h_true;
    loss_sum += delta.squaredNorm() / denom;
    if (grads == nullptr) continue;

    const CMat recon_adj = delta / (batch * denom);
    CMat hhat_adj(v_total, kk);
    for (int k = 0; k < kk; ++k) {
      hhat_adj.col(k) = dict[k].adjoint() * recon_adj.col(k);
      if (dict_grads) {
        dict_adj[k] += recon_adj.col(k) * cache.h_final.col(k).adjoint();
      }
    }
    CMat v_adj = CMat::Zero(g, kk);

    for (int t = layers - 1; t >= 0; --t) {
      const detail::LampLayerCache& L = cache.layers[t];

      // V_t = vbar + V_{t-1} * F_t
      const CMat& vbar_adj = v_adj;
      grads->f_maps[t] += L.v_prev.adjoint() * v_adj;
      CMat v_prev_adj = v_adj * params.f_maps[t].adjoint();

      // vbar[:,k] = y[:,k] - A[k] hhat[:,k] + b_k v_prev[:,k]
      CVec b_adj(kk);
      for (int k = 0; k < kk; ++k) {
        hhat_adj.col(k) -= a[k].adjoint() * vbar_adj.col(k);
        if (dict_grads) a_adj[k] -= vbar_adj.col(k) * L.hhat.col(k).adjoint();
        b_adj(k) = L.v_prev.col(k).dot(vbar_adj.col(k));
        v_prev_adj.col(k) += std::conj(L.b_vec(k)) * vbar_adj.col(k);
      }

      // b = G_t * bbar (bbar real)
      grads->g_maps[t] += b_adj * L.bbar.transpose().cast<cxd>();
      const RVec bbar_grad = 2.0 * (params.g_maps[t].adjoint() * b_adj).real();

      // bbar[k] = wiener[k] * phi_sum / G
      RVec gw = bbar_grad * (L.phi_sum / g);
      const double dphi_sum =
          (bbar_grad.array() * L.wiener.array()).sum() / g;
      RVec phi_grad = RVec::Constant(v_total, dphi_sum);

      // hhat[v,k] = phi_v * wiener[k] * htil[v,k]
      CMat htil_adj(v_total, kk);
      for (int k = 0; k < kk; ++k) {
        const double w = L.wiener(k);
        double gw_k = 0.0;
        for (int v = 0; v < v_total; ++v) {
          const cxd ha = hhat_adj(v, k);
          const cxd ht = L.htil(v, k);
          htil_adj(v, k) = L.phi(v) * w * ha;
          const double cross = 2.0 * (ha * std::conj(ht)).real();
          phi_grad(v) += w * cross;
          gw_k += L.phi(v) * cross;
        }
        gw(k) += gw_k;
      }

      // phi_v = sigmoid(e_v - lc), e_v = sum_k p[k] |htil[v,k]|^2
      double glc = 0.0;
      RVec gp = RVec::Zero(kk);
      for (int v = 0; v < v_total; ++v) {
        const double slope = L.phi(v) * (1.0 - L.phi(v));
        const double ge = phi_grad(v) * slope;
        glc -= ge;
        for (int k = 0; k < kk; ++k) {
          htil_adj(v, k) += ge * L.p(k) * L.htil(v, k);
          gp(k) += ge * std::norm(L.htil(v, k));
        }
      }

      // wiener, p, lc as functions of (gamma, epsilon, s2)
      RVec gs2(kk);
      for (int k = 0; k < kk; ++k) {
        const double s2 = L.s2(k);
        const double se = s2 + epsilon;
        gs2(k) = gw(k) * (-epsilon / (se * se)) +
                 gp(k) * (-epsilon * (2.0 * s2 + epsilon) / (s2 * s2 * se * se)) +
                 glc * (1.0 / se - 1.0 / s2);
        epsilon_grad += gw(k) * s2 / (se * se) + gp(k) / (se * se) + glc / se;
      }
      gamma_grad += glc * (-1.0 / (1.0 - gamma) - 1.0 / gamma);

      // s2_raw[k] = ||v_prev[:,k]||^2 / G (dead branch when floored)
      for (int k = 0; k < kk; ++k) {
        if (L.s2_raw(k) > kNoiseFloor) {
          v_prev_adj.col(k) += (gs2(k) / g) * L.v_prev.col(k);
        }
      }

      // htil[:,k] = hprev[:,k] + B_t[k]^H v_prev[:,k]
      for (int k = 0; k < kk; ++k) {
        grads->b[t][k] += L.v_prev.col(k) * htil_adj.col(k).adjoint();
        v_prev_adj.col(k) += params.b[t][k] * htil_adj.col(k);
      }

      // hand off to layer t-1: its hhat is this layer's hprev
      hhat_adj = htil_adj;
      v_adj = v_prev_adj;
    }
  }

  if (grads != nullptr) {
    for (int t = 0; t < layers; ++t) {
      for (int k = 0; k < kk; ++k) grads->b[t][k] *= 2.0;
      grads->g_maps[t] *= 2.0;
      grads->f_maps[t] *= 2.0;
    }
    grads->gamma_logit = gamma_grad * gamma * (1.0 - gamma);
    grads->epsilon_log = epsilon_grad * epsilon;
    if (dict_grads) {
      for (int k = 0; k < kk; ++k) {
        dict_adj[k] += context.s[k].adjoint() * a_adj[k];
      }
      accumulate_grid_grads(context.geometry, params.grid_distances,
                            params.grid_angles, dict, dict_adj,
                            grads->grid_distances, grads->grid_angles);
    }
  }
  return loss_sum / batch;
}

}  // namespace umce
