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
#include <string>
#include <vector>

#include "umce/estimators.hpp"
#include "umce/geometry.hpp"
#include "umce/types.hpp"

namespace umce {

// Trainable state of the unrolled GMMV-LAMP network. At initialization the
// per-layer matrices equal the measurement matrices, the Onsager refinement
// is the identity, the momentum map is zero and the global prior starts at
// (gamma_0, 1), so the untrained network reproduces undamped GMMV-AMP
// iterate for iterate.
struct LampParams {
  int layers = 0;
  int g = 0;
  int v = 0;
  int k = 0;

  std::vector<std::vector<CMat>> b;  // [layer][subcarrier], G x V
  std::vector<CMat> g_maps;          // [layer], K x K, refines the Onsager row
  std::vector<CMat> f_maps;          // [layer], K x K, momentum on the residual

  // Global prior, reparameterized so any parameter value is valid:
  // gamma = sigmoid(gamma_logit), epsilon = exp(epsilon_log).
  double gamma_logit = 0.0;
  double epsilon_log = 0.0;

  bool learnable_dictionary = false;
  RVec grid_distances;  // c_d, length V
  RVec grid_angles;     // c_phi, length V

  double gamma() const;
  double epsilon() const;
  void set_gamma(double gamma);
  void set_epsilon(double epsilon);
  BernoulliGaussianPrior prior() const { return {gamma(), epsilon()}; }

  // gamma_0 = 0 would zero every phi and kill all gradients, so the
  // activity probability starts at a small positive floor instead.
  static constexpr double kGamma0 = 1e-3;
  static constexpr double kEpsilon0 = 1.0;

  static LampParams initialize(const std::vector<CMat>& a, int layers,
                               double gamma0 = kGamma0, double epsilon0 = kEpsilon0);

  void validate() const;
};

struct LampForwardOptions {
  int layers = -1;  // -1: run all params.layers layers
  bool record_iterates = false;
};

struct LampForwardResult {
  CMat h_sparse;                   // V x K after the last layer
  std::vector<AmpState> iterates;  // when record_iterates is set
};

/// Unrolled forward pass: per layer, matched filter through B_t[k], residual
/// energy as the per-subcarrier noise estimate, row-wise MMSE shrinkage,
/// Onsager row refined by g_t, residual through A[k] plus the momentum term
/// f_t(V_{t-1}). Zero layers returns the zero estimate.
LampForwardResult lamp_forward(const CMat& y, const std::vector<CMat>& a,
                               const LampParams& params,
                               const LampForwardOptions& options = {});

/// Per-layer NMSE of the spatial-frequency reconstruction D[k]*h_t[k] against
/// h_true, averaged over the batch; entry t-1 corresponds to layer t.
RVec lamp_layer_nmse_trace(const std::vector<CMat>& y_batch,
                           const std::vector<CMat>& h_true_batch,
                           const std::vector<CMat>& a, const std::vector<CMat>& d,
                           const LampParams& params);

/// NMSE cost ||est - truth||_F^2 / ||truth||_F^2 (throws on zero-norm truth).
double loss_nmse(const CMat& estimate, const CMat& truth);

// Measurement model shared by training and evaluation. The dictionary is
// either fixed or regenerated from the trainable grid each evaluation.
struct LampModelContext {
  std::vector<CMat> s;  // K pilot matrices, G x N_AP
  std::vector<CMat> d;  // K dictionary matrices, N_AP x V (fixed-dict mode)
  bool learnable_dictionary = false;
  ArrayGeometry geometry;      // used to rebuild steering vectors when learnable
  RVec init_grid_distances;    // starting grid when learnable
  RVec init_grid_angles;

  std::vector<CMat> dictionary(const LampParams& params) const;
  std::vector<CMat> measurements(const LampParams& params) const;
};

// Gradients in the same layout as the parameters. Complex entries follow the
// finite-difference convention g = dL/dRe + j*dL/dIm.
struct LampGrads {
  std::vector<std::vector<CMat>> b;
  std::vector<CMat> g_maps;
  std::vector<CMat> f_maps;
  double gamma_logit = 0.0;
  double epsilon_log = 0.0;
  RVec grid_distances;
  RVec grid_angles;

  static LampGrads zeros_like(const LampParams& params);
};

struct LampGradOptions {
  int layers = -1;          // truncate the network to this many layers
  bool dict_gradients = false;  // propagate into (c_d, c_phi)
};

/// Batch-mean NMSE of the spatial-frequency reconstruction and, when `grads`
/// is non-null, the gradient with respect to every trainable parameter,
/// obtained by hand-derived reverse-mode differentiation of the forward pass.
double lamp_loss_and_grad(const std::vector<const CMat*>& y_batch,
                          const std::vector<const CMat*>& h_true_batch,
                          const LampModelContext& context, const LampParams& params,
                          const LampGradOptions& options, LampGrads* grads);

struct TrainSchedule {
  int steps_per_stage = 200;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int dict_last_stage = 2;  // grids train only during stages 1..dict_last_stage
  int eval_every = 20;      // checkpoint cadence, in steps

  void validate() const;
};

struct LampDataset {
  std::vector<CMat> y;       // G x K received blocks
  std::vector<CMat> h_true;  // N_AP x K spatial-frequency channels

  std::size_t size() const { return y.size(); }
};

struct StageRecord {
  int stage = 0;
  double loss_begin = 0.0;
  double loss_end = 0.0;
  int steps = 0;
};

struct TrainResult {
  LampParams params;
  std::vector<StageRecord> history;
  double initial_validation_nmse = 0.0;
  double final_validation_nmse = 0.0;
};

/// Layer-wise training: stage t fits the t-layer truncated network by plain
/// gradient descent over the parameters of layers 1..t plus the globals;
/// dictionary grids are active only in the first two stages. The best
/// parameters seen at evaluation points within a stage are kept, so the
/// training loss at stage boundaries never increases. Throws
/// std::runtime_error naming the stage and step if the loss becomes
/// non-finite.
TrainResult train_lamp(const LampDataset& train, const LampDataset& validation,
                       const LampModelContext& context, const TrainSchedule& schedule,
                       int layers, std::uint64_t seed);

// Checkpoint: binary header (magic, version, T, G, V, K, grid flag as 32-bit
// unsigned) followed by parameter planes as 32-bit floats.
void save_checkpoint(const std::string& path, const LampParams& params);
LampParams load_checkpoint(const std::string& path);

}  // namespace umce
