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

#include "umce/lamp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "lamp_internal.hpp"
#include "shrinkage_detail.hpp"
#include "umce/dictionary.hpp"

namespace umce {

double LampParams::gamma() const { return 1.0 / (1.0 + std::exp(-gamma_logit)); }

double LampParams::epsilon() const { return std::exp(epsilon_log); }

void LampParams::set_gamma(double g_val) {
  if (!(g_val > 0.0 && g_val < 1.0)) {
    throw std::invalid_argument("LampParams: gamma must lie strictly in (0, 1)");
  }
  gamma_logit = std::log(g_val / (1.0 - g_val));
}

void LampParams::set_epsilon(double e_val) {
  if (!(e_val > 0.0)) {
    throw std::invalid_argument("LampParams: epsilon must be positive");
  }
  epsilon_log = std::log(e_val);
}

LampParams LampParams::initialize(const std::vector<CMat>& a, int layers,
                                  double gamma0, double epsilon0) {
  if (a.empty()) throw std::invalid_argument("LampParams: empty measurement set");
  if (layers < 0) throw std::invalid_argument("LampParams: negative layer count");

  LampParams params;
  params.layers = layers;
  params.g = static_cast<int>(a[0].rows());
  params.v = static_cast<int>(a[0].cols());
  params.k = static_cast<int>(a.size());
  params.b.assign(layers, a);  // B_t[k] = A[k] for all layers
  params.g_maps.assign(layers, CMat::Identity(params.k, params.k));
  params.f_maps.assign(layers, CMat::Zero(params.k, params.k));
  params.set_gamma(gamma0);
  params.set_epsilon(epsilon0);
  return params;
}

void LampParams::validate() const {
  if (static_cast<int>(b.size()) != layers ||
      static_cast<int>(g_maps.size()) != layers ||
      static_cast<int>(f_maps.size()) != layers) {
    throw std::invalid_argument("LampParams: layer count mismatch");
  }
  for (const auto& layer : b) {
    if (static_cast<int>(layer.size()) != k) {
      throw std::invalid_argument("LampParams: subcarrier count mismatch");
    }
    for (const CMat& m : layer) {
      if (m.rows() != g || m.cols() != v) {
        throw std::invalid_argument("LampParams: B shape mismatch");
      }
    }
  }
  if (learnable_dictionary &&
      (grid_distances.size() != v || grid_angles.size() != v)) {
    throw std::invalid_argument("LampParams: grid length mismatch");
  }
}

namespace detail {

LampForwardCache lamp_forward_cached(const CMat& y, const std::vector<CMat>& a,
                                     const LampParams& params, int layers) {
  const int kk = static_cast<int>(a.size());
  if (kk != params.k || y.cols() != kk || y.rows() != params.g ||
      (kk > 0 && a[0].cols() != params.v)) {
    throw std::invalid_argument("lamp_forward: dimension mismatch");
  }
  if (layers < 0) layers = params.layers;
  if (layers > params.layers) {
    throw std::invalid_argument("lamp_forward: more layers requested than available");
  }
  const int g = params.g;
  const int v_total = params.v;
  const double gamma = params.gamma();
  const double epsilon = params.epsilon();

  LampForwardCache cache;
  cache.layers.reserve(layers);
  CMat h = CMat::Zero(v_total, kk);
  CMat v_res = y;
  for (int t = 0; t < layers; ++t) {
    LampLayerCache layer;
    layer.v_prev = v_res;
    layer.htil.resize(v_total, kk);
    layer.s2_raw.resize(kk);
    for (int k = 0; k < kk; ++k) {
      layer.htil.col(k) = h.col(k) + params.b[t][k].adjoint() * v_res.col(k);
      layer.s2_raw(k) = v_res.col(k).squaredNorm() / g;
    }
    layer.s2 = floor_noise(layer.s2_raw);
    layer.wiener = (layer.s2.array() + epsilon).inverse() * epsilon;
    layer.p = epsilon * (layer.s2.array() * (layer.s2.array() + epsilon)).inverse();
    layer.lc = log_ratio_const(gamma, epsilon, layer.s2);

    layer.phi.resize(v_total);
    layer.hhat.resize(v_total, kk);
    double phi_sum = 0.0;
    for (int row = 0; row < v_total; ++row) {
      double evidence = 0.0;
      for (int k = 0; k < kk; ++k) evidence += layer.p(k) * std::norm(layer.htil(row, k));
      const double phi = phi_from_evidence(evidence, layer.lc);
      layer.phi(row) = phi;
      phi_sum += phi;
      layer.hhat.row(row) =
          phi * (layer.wiener.transpose().array() * layer.htil.row(row).array()).matrix();
    }
    layer.phi_sum = phi_sum;
    layer.bbar = layer.wiener * (phi_sum / g);
    layer.b_vec = params.g_maps[t] * layer.bbar.cast<cxd>();

    CMat vbar(g, kk);
    for (int k = 0; k < kk; ++k) {
      vbar.col(k) = y.col(k) - a[k] * layer.hhat.col(k) + layer.b_vec(k) * v_res.col(k);
    }
    v_res = vbar + layer.v_prev * params.f_maps[t];
    h = layer.hhat;
    cache.layers.push_back(std::move(layer));
  }
  cache.h_final = std::move(h);
  return cache;
}

}  // namespace detail

LampForwardResult lamp_forward(const CMat& y, const std::vector<CMat>& a,
                               const LampParams& params,
                               const LampForwardOptions& options) {
  const int layers = options.layers < 0 ? params.layers : options.layers;
  detail::LampForwardCache cache = detail::lamp_forward_cached(y, a, params, layers);
  LampForwardResult out;
  out.h_sparse = cache.h_final;
  if (options.record_iterates) {
    out.iterates.reserve(cache.layers.size());
    for (std::size_t t = 0; t < cache.layers.size(); ++t) {
      AmpState state;
      state.estimate = cache.layers[t].hhat;
      state.residual = (t + 1 < cache.layers.size()) ? cache.layers[t + 1].v_prev
                                                     : CMat();
      state.noise = cache.layers[t].s2;
      state.iteration = static_cast<int>(t) + 1;
      out.iterates.push_back(std::move(state));
    }
    // Residual leaving the last layer is not retained by the cache chain;
    // recompute it so iterate comparisons can cover every layer.
    if (!cache.layers.empty()) {
      const auto& last = cache.layers.back();
      const int t = static_cast<int>(cache.layers.size()) - 1;
      CMat vbar(params.g, params.k);
      for (int k = 0; k < params.k; ++k) {
        vbar.col(k) = y.col(k) - a[k] * last.hhat.col(k) + last.b_vec(k) * last.v_prev.col(k);
      }
      out.iterates.back().residual = vbar + last.v_prev * params.f_maps[t];
    }
  }
  return out;
}

RVec lamp_layer_nmse_trace(const std::vector<CMat>& y_batch,
                           const std::vector<CMat>& h_true_batch,
                           const std::vector<CMat>& a, const std::vector<CMat>& d,
                           const LampParams& params) {
  if (y_batch.size() != h_true_batch.size() || y_batch.empty()) {
    throw std::invalid_argument("lamp_layer_nmse_trace: batch mismatch");
  }
  RVec acc = RVec::Zero(params.layers);
  for (std::size_t i = 0; i < y_batch.size(); ++i) {
    LampForwardOptions opts;
    opts.record_iterates = true;
    const LampForwardResult res = lamp_forward(y_batch[i], a, params, opts);
    for (int t = 0; t < params.layers; ++t) {
      CMat recon(d[0].rows(), params.k);
      for (int k = 0; k < params.k; ++k) {
        recon.col(k) = d[k] * res.iterates[t].estimate.col(k);
      }
      acc(t) += nmse(recon, h_true_batch[i]);
    }
  }
  return acc / static_cast<double>(y_batch.size());
}

double loss_nmse(const CMat& estimate, const CMat& truth) { return nmse(estimate, truth); }

std::vector<CMat> LampModelContext::dictionary(const LampParams& params) const {
  if (!learnable_dictionary) return d;
  return build_learnable_wrd(geometry, params.grid_distances, params.grid_angles).d;
}

std::vector<CMat> LampModelContext::measurements(const LampParams& params) const {
  const std::vector<CMat> dict = dictionary(params);
  if (s.size() != dict.size()) {
    throw std::invalid_argument("LampModelContext: pilot/dictionary subcarrier mismatch");
  }
  std::vector<CMat> a;
  a.reserve(dict.size());
  for (std::size_t k = 0; k < dict.size(); ++k) a.push_back(s[k] * dict[k]);
  return a;
}

LampGrads LampGrads::zeros_like(const LampParams& params) {
  LampGrads g;
  g.b.assign(params.b.size(),
             std::vector<CMat>(params.k, CMat::Zero(params.g, params.v)));
  g.g_maps.assign(params.g_maps.size(), CMat::Zero(params.k, params.k));
  g.f_maps.assign(params.f_maps.size(), CMat::Zero(params.k, params.k));
  if (params.learnable_dictionary) {
    g.grid_distances = RVec::Zero(params.grid_distances.size());
    g.grid_angles = RVec::Zero(params.grid_angles.size());
  }
  return g;
}

namespace {

constexpr std::uint32_t kCheckpointMagic = 0x504C4D55u;  // "UMLP"
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ofstream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(std::ifstream& in) {
  const std::uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void put_cmat(std::ofstream& out, const CMat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      put_f32(out, static_cast<float>(m(i, j).real()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      put_f32(out, static_cast<float>(m(i, j).imag()));
}

CMat get_cmat(std::ifstream& in, int rows, int cols) {
  CMat m(rows, cols);
  std::vector<float> re(static_cast<std::size_t>(rows) * cols);
  std::vector<float> im(re.size());
  for (auto& v : re) v = get_f32(in);
  for (auto& v : im) v = get_f32(in);
  std::size_t idx = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j, ++idx) m(i, j) = cxd(re[idx], im[idx]);
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const LampParams& params) {
  params.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
  put_u32(out, kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(params.layers));
  put_u32(out, static_cast<std::uint32_t>(params.g));
  put_u32(out, static_cast<std::uint32_t>(params.v));
  put_u32(out, static_cast<std::uint32_t>(params.k));
  put_u32(out, params.learnable_dictionary ? 1u : 0u);
  put_f32(out, static_cast<float>(params.gamma_logit));
  put_f32(out, static_cast<float>(params.epsilon_log));
  for (const auto& layer : params.b)
    for (const CMat& m : layer) put_cmat(out, m);
  for (const CMat& m : params.g_maps) put_cmat(out, m);
  for (const CMat& m : params.f_maps) put_cmat(out, m);
  if (params.learnable_dictionary) {
    for (Eigen::Index i = 0; i < params.grid_distances.size(); ++i)
      put_f32(out, static_cast<float>(params.grid_distances(i)));
    for (Eigen::Index i = 0; i < params.grid_angles.size(); ++i)
      put_f32(out, static_cast<float>(params.grid_angles(i)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

LampParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  if (get_u32(in) != kCheckpointMagic) throw std::runtime_error("checkpoint: bad magic");
  if (get_u32(in) != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version");
  }
  LampParams params;
  params.layers = static_cast<int>(get_u32(in));
  params.g = static_cast<int>(get_u32(in));
  params.v = static_cast<int>(get_u32(in));
  params.k = static_cast<int>(get_u32(in));
  params.learnable_dictionary = get_u32(in) != 0;
  params.gamma_logit = get_f32(in);
  params.epsilon_log = get_f32(in);
  params.b.assign(params.layers, std::vector<CMat>());
  for (auto& layer : params.b) {
    layer.reserve(params.k);
    for (int k = 0; k < params.k; ++k) layer.push_back(get_cmat(in, params.g, params.v));
  }
  for (int t = 0; t < params.layers; ++t)
    params.g_maps.push_back(get_cmat(in, params.k, params.k));
  for (int t = 0; t < params.layers; ++t)
    params.f_maps.push_back(get_cmat(in, params.k, params.k));
  if (params.learnable_dictionary) {
    params.grid_distances.resize(params.v);
    params.grid_angles.resize(params.v);
    for (int i = 0; i < params.v; ++i) params.grid_distances(i) = get_f32(in);
    for (int i = 0; i < params.v; ++i) params.grid_angles(i) = get_f32(in);
  }
  params.validate();
  return params;
}

}  // namespace umce
