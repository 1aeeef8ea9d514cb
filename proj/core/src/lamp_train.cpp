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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "umce/lamp.hpp"
#include "umce/rng.hpp"

namespace umce {

void TrainSchedule::validate() const {
  if (steps_per_stage < 0) throw std::invalid_argument("schedule: negative step count");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("schedule: learning rate must be positive");
  if (batch_size < 1) throw std::invalid_argument("schedule: batch size must be >= 1");
  if (eval_every < 1) throw std::invalid_argument("schedule: eval_every must be >= 1");
}

namespace {

// Grid projection bounds: distances stay positive and angles keep the grid
// point in the x > 0 half plane required by the steering model.
constexpr double kMinGridDistance = 0.05;
constexpr double kMaxGridAngle = kPi / 2.0 - 1e-3;

void apply_step(LampParams& params, const LampGrads& grads, int active_layers,
                bool dict_active, double lr) {
  for (int t = 0; t < active_layers; ++t) {
    for (int k = 0; k < params.k; ++k) params.b[t][k] -= lr * grads.b[t][k];
    params.g_maps[t] -= lr * grads.g_maps[t];
    params.f_maps[t] -= lr * grads.f_maps[t];
  }
  params.gamma_logit -= lr * grads.gamma_logit;
  params.epsilon_log -= lr * grads.epsilon_log;
  if (dict_active) {
    params.grid_distances -= lr * grads.grid_distances;
    params.grid_angles -= lr * grads.grid_angles;
    for (Eigen::Index i = 0; i < params.grid_distances.size(); ++i) {
      params.grid_distances(i) = std::max(params.grid_distances(i), kMinGridDistance);
      params.grid_angles(i) =
          std::clamp(params.grid_angles(i), -kMaxGridAngle, kMaxGridAngle);
    }
  }
}

double evaluate(const LampDataset& data, const LampModelContext& context,
                const LampParams& params, int layers) {
  std::vector<const CMat*> ys(data.size());
  std::vector<const CMat*> hs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    ys[i] = &data.y[i];
    hs[i] = &data.h_true[i];
  }
  LampGradOptions opts;
  opts.layers = layers;
  return lamp_loss_and_grad(ys, hs, context, params, opts, nullptr);
}

}  // namespace

TrainResult train_lamp(const LampDataset& train, const LampDataset& validation,
                       const LampModelContext& context, const TrainSchedule& schedule,
                       int layers, std::uint64_t seed) {
  schedule.validate();
  if (train.size() == 0 || train.y.size() != train.h_true.size()) {
    throw std::invalid_argument("train_lamp: empty or inconsistent training set");
  }
  if (layers < 1) throw std::invalid_argument("train_lamp: layers must be >= 1");

  // Initialization point: B_t[k] = A[k], identity/zero correction maps,
  // (gamma_0, epsilon_0) prior; equals truncated undamped GMMV-AMP.
  LampParams init;
  if (context.learnable_dictionary) {
    init.learnable_dictionary = true;
    init.grid_distances = context.init_grid_distances;
    init.grid_angles = context.init_grid_angles;
    LampParams probe = init;  // grids only; measurements() needs them
    const std::vector<CMat> a0 = context.measurements(probe);
    const RVec gd = init.grid_distances;
    const RVec ga = init.grid_angles;
    init = LampParams::initialize(a0, layers);
    init.learnable_dictionary = true;
    init.grid_distances = gd;
    init.grid_angles = ga;
  } else {
    init = LampParams::initialize(context.measurements(LampParams{}), layers);
  }

  const LampDataset& val = validation.size() > 0 ? validation : train;

  TrainResult result;
  result.params = init;
  result.initial_validation_nmse = evaluate(val, context, init, layers);

  LampParams params = init;
  const int batch =
      std::min<int>(schedule.batch_size, static_cast<int>(train.size()));
  std::vector<std::size_t> deck(train.size());
  std::iota(deck.begin(), deck.end(), 0);

  for (int stage = 1; stage <= layers; ++stage) {
    const bool dict_active =
        context.learnable_dictionary && stage <= schedule.dict_last_stage;

    StageRecord record;
    record.stage = stage;
    record.loss_begin = evaluate(train, context, params, stage);
    record.steps = schedule.steps_per_stage;

    LampParams best = params;
    double best_loss = record.loss_begin;

    Rng rng(derive_seed(seed, 0x7261696E, static_cast<std::uint64_t>(stage)));
    std::size_t cursor = deck.size();  // force an initial shuffle
    LampGrads grads;
    LampGradOptions opts;
    opts.layers = stage;
    opts.dict_gradients = dict_active;

    for (int step = 1; step <= schedule.steps_per_stage; ++step) {
      std::vector<const CMat*> ys(batch);
      std::vector<const CMat*> hs(batch);
      for (int i = 0; i < batch; ++i) {
        if (cursor >= deck.size()) {
          for (std::size_t j = deck.size(); j > 1; --j) {
            std::swap(deck[j - 1], deck[rng.next_u64() % j]);
          }
          cursor = 0;
        }
        const std::size_t idx = deck[cursor++];
        ys[i] = &train.y[idx];
        hs[i] = &train.h_true[idx];
      }

      const double loss = lamp_loss_and_grad(ys, hs, context, params, opts, &grads);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train_lamp: non-finite loss at stage " +
                                 std::to_string(stage) + " step " +
                                 std::to_string(step));
      }
      apply_step(params, grads, stage, dict_active, schedule.learning_rate);

      if (step % schedule.eval_every == 0 || step == schedule.steps_per_stage) {
        const double full = evaluate(train, context, params, stage);
        if (!std::isfinite(full)) {
          throw std::runtime_error("train_lamp: non-finite loss at stage " +
                                   std::to_string(stage) + " step " +
                                   std::to_string(step));
        }
        if (full < best_loss) {
          best_loss = full;
          best = params;
        }
      }
    }

    params = best;  // stage-boundary loss never increases
    record.loss_end = best_loss;
    result.history.push_back(record);
  }

  result.params = params;
  result.final_validation_nmse = evaluate(val, context, params, layers);
  return result;
}

}  // namespace umce
