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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <functional>

#include "testing_util.hpp"
#include "umce/estimators.hpp"
#include "umce/rng.hpp"

using namespace umce;
using umce::testing::DeskPipeline;
using umce::testing::DeskPipelineSpec;

namespace {

// Central finite difference of the loss along one real coordinate.
double central_fd(const std::function<double(double)>& loss_at, double x0,
                  double step) {
  return (loss_at(x0 + step) - loss_at(x0 - step)) / (2.0 * step);
}

void expect_grad_close(double analytic, double fd, const char* what) {
  const double scale = std::max(std::abs(analytic), std::abs(fd));
  EXPECT_LE(std::abs(analytic - fd), 1e-4 * scale + 1e-9)
      << what << ": analytic " << analytic << " vs fd " << fd;
}

struct Probe {
  DeskPipeline pipe;
  LampDataset data;
  LampModelContext ctx;
  LampParams params;
  std::vector<const CMat*> ys;
  std::vector<const CMat*> hs;
};

// G = 4, V = 8, K = 2, T = 2, two samples.
Probe make_probe(bool learnable, bool perturb) {
  Probe p;
  DeskPipelineSpec spec;
  spec.n_ap = learnable ? 6 : 8;
  spec.n_subcarriers = 2;
  spec.g = 4;
  spec.rho = 1;
  spec.l_far = 1;
  p.pipe = umce::testing::make_far_pipeline(spec);
  p.ctx = umce::testing::context_for(p.pipe);

  if (learnable) {
    p.ctx.learnable_dictionary = true;
    p.ctx.d.clear();
    std::tie(p.ctx.init_grid_distances, p.ctx.init_grid_angles) =
        init_learnable_grid(p.pipe.geometry, 8, 321, 0.01);
    LampParams grid_only;
    grid_only.learnable_dictionary = true;
    grid_only.grid_distances = p.ctx.init_grid_distances;
    grid_only.grid_angles = p.ctx.init_grid_angles;
    p.params = LampParams::initialize(p.ctx.measurements(grid_only), 2);
    p.params.learnable_dictionary = true;
    p.params.grid_distances = p.ctx.init_grid_distances;
    p.params.grid_angles = p.ctx.init_grid_angles;
  } else {
    p.params = LampParams::initialize(p.pipe.a, 2);
  }

  p.data = umce::testing::draw_dataset(p.pipe, 2, 10.0, 99);
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    p.ys.push_back(&p.data.y[i]);
    p.hs.push_back(&p.data.h_true[i]);
  }

  if (perturb) {
    p.params.set_gamma(0.2);
    p.params.set_epsilon(0.6);
    Rng rng(4242);
    for (auto& layer : p.params.b)
      for (CMat& m : layer)
        for (int j = 0; j < m.cols(); ++j)
          for (int i = 0; i < m.rows(); ++i) m(i, j) += 0.05 * rng.cnormal();
    for (CMat& m : p.params.g_maps)
      for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) m(i, j) += 0.05 * rng.cnormal();
    for (CMat& m : p.params.f_maps)
      for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) m(i, j) += 0.05 * rng.cnormal();
  }
  return p;
}

double probe_loss(const Probe& p, const LampParams& params, bool dict_grads) {
  LampGradOptions opts;
  opts.dict_gradients = dict_grads;
  return lamp_loss_and_grad(p.ys, p.hs, p.ctx, params, opts, nullptr);
}

}  // namespace

TEST(Lamp, InitializationMatchesUndampedGmmvAmp) {
  DeskPipelineSpec spec;
  spec.n_ap = 16;
  spec.n_subcarriers = 4;
  spec.g = 8;
  spec.rho = 1;
  DeskPipeline pipe = umce::testing::make_far_pipeline(spec);
  const LampDataset data = umce::testing::draw_dataset(pipe, 3, 5.0, 7);

  const int layers = 5;
  const LampParams params = LampParams::initialize(pipe.a, layers);
  BernoulliGaussianPrior prior{params.gamma(), params.epsilon()};

  for (const CMat& y : data.y) {
    LampForwardOptions fopts;
    fopts.record_iterates = true;
    const LampForwardResult lamp = lamp_forward(y, pipe.a, params, fopts);

    GmmvAmpOptions aopts;
    aopts.iterations = layers;
    aopts.damping = 0.0;
    aopts.record_iterates = true;
    const GmmvAmpResult amp = gmmv_amp(y, pipe.a, prior, aopts);

    ASSERT_EQ(lamp.iterates.size(), amp.iterates.size());
    for (std::size_t t = 0; t < lamp.iterates.size(); ++t) {
      const double h_scale = amp.iterates[t].estimate.norm() + 1.0;
      const double v_scale = amp.iterates[t].residual.norm() + 1.0;
      EXPECT_LT((lamp.iterates[t].estimate - amp.iterates[t].estimate).norm(),
                1e-10 * h_scale);
      EXPECT_LT((lamp.iterates[t].residual - amp.iterates[t].residual).norm(),
                1e-10 * v_scale);
    }
    EXPECT_LT((lamp.h_sparse - amp.h_sparse).norm(), 1e-10 * (amp.h_sparse.norm() + 1.0));
  }
}

TEST(Lamp, ZeroLayersReturnsZeroEstimate) {
  DeskPipelineSpec spec;
  spec.n_ap = 8;
  spec.n_subcarriers = 2;
  spec.g = 4;
  spec.rho = 1;
  DeskPipeline pipe = umce::testing::make_far_pipeline(spec);
  const LampDataset data = umce::testing::draw_dataset(pipe, 1, 10.0, 3);
  const LampParams params = LampParams::initialize(pipe.a, 0);
  const LampForwardResult res = lamp_forward(data.y[0], pipe.a, params);
  EXPECT_EQ(res.h_sparse.norm(), 0.0);
}

TEST(Lamp, LossNmseBasics) {
  Rng rng(5);
  CMat h(4, 3);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 4; ++i) h(i, j) = rng.cnormal();
  EXPECT_DOUBLE_EQ(loss_nmse(h, h), 0.0);
  EXPECT_DOUBLE_EQ(loss_nmse(CMat::Zero(4, 3), h), 1.0);
  EXPECT_DOUBLE_EQ(loss_nmse(2.0 * h, h), 1.0);
  EXPECT_THROW(loss_nmse(h, CMat::Zero(4, 3)), std::domain_error);
}

TEST(LampGrad, FiniteDifferenceFixedDictionary) {
  for (bool perturb : {false, true}) {
    Probe p = make_probe(false, perturb);
    LampGrads grads;
    LampGradOptions opts;
    lamp_loss_and_grad(p.ys, p.hs, p.ctx, p.params, opts, &grads);

    const double step = 1e-5;

    // every coordinate of B_1[1]
    for (int i = 0; i < p.params.g; ++i) {
      for (int j = 0; j < p.params.v; ++j) {
        for (int part = 0; part < 2; ++part) {
          auto loss_at = [&](double x) {
            LampParams q = p.params;
            cxd& entry = q.b[0][0](i, j);
            entry = part == 0 ? cxd(x, entry.imag()) : cxd(entry.real(), x);
            return probe_loss(p, q, false);
          };
          const double x0 = part == 0 ? p.params.b[0][0](i, j).real()
                                      : p.params.b[0][0](i, j).imag();
          const double fd = central_fd(loss_at, x0, step);
          const double analytic =
              part == 0 ? grads.b[0][0](i, j).real() : grads.b[0][0](i, j).imag();
          expect_grad_close(analytic, fd, "B_1[1]");
        }
      }
    }

    // gamma and epsilon through their reparameterizations
    {
      auto loss_at = [&](double x) {
        LampParams q = p.params;
        q.gamma_logit = x;
        return probe_loss(p, q, false);
      };
      expect_grad_close(grads.gamma_logit,
                        central_fd(loss_at, p.params.gamma_logit, step), "gamma");
    }
    {
      auto loss_at = [&](double x) {
        LampParams q = p.params;
        q.epsilon_log = x;
        return probe_loss(p, q, false);
      };
      expect_grad_close(grads.epsilon_log,
                        central_fd(loss_at, p.params.epsilon_log, step), "epsilon");
    }

    // every coordinate of the correction maps of both layers
    for (int t = 0; t < 2; ++t) {
      for (int i = 0; i < p.params.k; ++i) {
        for (int j = 0; j < p.params.k; ++j) {
          for (int part = 0; part < 2; ++part) {
            auto loss_g = [&](double x) {
              LampParams q = p.params;
              cxd& entry = q.g_maps[t](i, j);
              entry = part == 0 ? cxd(x, entry.imag()) : cxd(entry.real(), x);
              return probe_loss(p, q, false);
            };
            const double g0 = part == 0 ? p.params.g_maps[t](i, j).real()
                                        : p.params.g_maps[t](i, j).imag();
            const double fd_g = central_fd(loss_g, g0, step);
            const double an_g = part == 0 ? grads.g_maps[t](i, j).real()
                                          : grads.g_maps[t](i, j).imag();
            expect_grad_close(an_g, fd_g, "G_t");

            auto loss_f = [&](double x) {
              LampParams q = p.params;
              cxd& entry = q.f_maps[t](i, j);
              entry = part == 0 ? cxd(x, entry.imag()) : cxd(entry.real(), x);
              return probe_loss(p, q, false);
            };
            const double f0 = part == 0 ? p.params.f_maps[t](i, j).real()
                                        : p.params.f_maps[t](i, j).imag();
            const double fd_f = central_fd(loss_f, f0, step);
            const double an_f = part == 0 ? grads.f_maps[t](i, j).real()
                                          : grads.f_maps[t](i, j).imag();
            expect_grad_close(an_f, fd_f, "F_t");
          }
        }
      }
    }
  }
}

TEST(LampGrad, FiniteDifferenceLearnableGrid) {
  Probe p = make_probe(true, true);
  LampGrads grads;
  LampGradOptions opts;
  opts.dict_gradients = true;
  lamp_loss_and_grad(p.ys, p.hs, p.ctx, p.params, opts, &grads);

  const double step = 1e-6;
  for (int v = 0; v < p.params.v; ++v) {
    auto loss_d = [&](double x) {
      LampParams q = p.params;
      q.grid_distances(v) = x;
      return probe_loss(p, q, true);
    };
    expect_grad_close(grads.grid_distances(v),
                      central_fd(loss_d, p.params.grid_distances(v),
                                 step * std::max(1.0, p.params.grid_distances(v))),
                      "c_d");

    auto loss_phi = [&](double x) {
      LampParams q = p.params;
      q.grid_angles(v) = x;
      return probe_loss(p, q, true);
    };
    expect_grad_close(grads.grid_angles(v),
                      central_fd(loss_phi, p.params.grid_angles(v), step), "c_phi");
  }
}

TEST(LampTrain, SmallRunImprovesAndIsDeterministic) {
  DeskPipelineSpec spec;
  spec.n_ap = 16;
  spec.n_subcarriers = 4;
  spec.g = 8;
  spec.rho = 1;
  spec.l_far = 2;
  DeskPipeline pipe = umce::testing::make_far_pipeline(spec);
  LampModelContext ctx = umce::testing::context_for(pipe);
  const LampDataset train = umce::testing::draw_dataset(pipe, 200, 10.0, 11);
  const LampDataset val = umce::testing::draw_dataset(pipe, 60, 10.0, 12);

  TrainSchedule schedule;
  schedule.steps_per_stage = 60;
  schedule.learning_rate = 0.05;
  schedule.batch_size = 32;
  schedule.eval_every = 15;

  const TrainResult result = train_lamp(train, val, ctx, schedule, 2, 5);
  ASSERT_EQ(result.history.size(), 2u);
  for (const StageRecord& rec : result.history) {
    EXPECT_LE(rec.loss_end, rec.loss_begin + 1e-12);
  }
  EXPECT_LE(result.final_validation_nmse, result.initial_validation_nmse);
  EXPECT_GT(result.params.gamma(), 0.0);
  EXPECT_LT(result.params.gamma(), 1.0);
  EXPECT_GT(result.params.epsilon(), 0.0);

  const TrainResult again = train_lamp(train, val, ctx, schedule, 2, 5);
  EXPECT_EQ(result.final_validation_nmse, again.final_validation_nmse);

  // zero steps: parameters stay at the initialization
  TrainSchedule noop = schedule;
  noop.steps_per_stage = 0;
  const TrainResult frozen = train_lamp(train, val, ctx, noop, 2, 5);
  const LampParams init = LampParams::initialize(pipe.a, 2);
  EXPECT_EQ(frozen.params.gamma_logit, init.gamma_logit);
  for (int t = 0; t < 2; ++t)
    for (int k = 0; k < init.k; ++k)
      EXPECT_EQ((frozen.params.b[t][k] - init.b[t][k]).norm(), 0.0);
}

TEST(LampTrain, NonFiniteLossAborts) {
  DeskPipelineSpec spec;
  spec.n_ap = 8;
  spec.n_subcarriers = 2;
  spec.g = 4;
  spec.rho = 1;
  spec.l_far = 1;
  DeskPipeline pipe = umce::testing::make_far_pipeline(spec);
  LampModelContext ctx = umce::testing::context_for(pipe);
  LampDataset train = umce::testing::draw_dataset(pipe, 8, 10.0, 13);
  train.y[0](0, 0) = cxd(std::nan(""), 0.0);

  TrainSchedule schedule;
  schedule.steps_per_stage = 5;
  schedule.batch_size = 8;
  try {
    train_lamp(train, train, ctx, schedule, 1, 1);
    FAIL() << "expected a non-finite loss abort";
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("stage"), std::string::npos);
    EXPECT_NE(msg.find("step"), std::string::npos);
  }
}

TEST(LampTrain, DictionaryGridsGatedToEarlyStages) {
  // grids move during stages 1-2 and stay frozen afterwards
  Probe p = make_probe(true, false);
  LampModelContext ctx = p.ctx;
  LampDataset data;
  for (const CMat& y : p.data.y) data.y.push_back(y);
  for (const CMat& h : p.data.h_true) data.h_true.push_back(h);

  TrainSchedule schedule;
  schedule.steps_per_stage = 5;
  schedule.learning_rate = 0.05;
  schedule.batch_size = 2;
  schedule.eval_every = 5;

  schedule.dict_last_stage = 0;  // grids never active
  const TrainResult frozen = train_lamp(data, data, ctx, schedule, 2, 3);
  EXPECT_EQ((frozen.params.grid_distances - ctx.init_grid_distances).norm(), 0.0);
  EXPECT_EQ((frozen.params.grid_angles - ctx.init_grid_angles).norm(), 0.0);

  schedule.dict_last_stage = 2;  // default gating
  const TrainResult moved = train_lamp(data, data, ctx, schedule, 2, 3);
  EXPECT_GT((moved.params.grid_distances - ctx.init_grid_distances).norm() +
                (moved.params.grid_angles - ctx.init_grid_angles).norm(),
            0.0);
}

TEST(Lamp, CheckpointRoundtrip) {
  Probe p = make_probe(true, true);
  const std::string path = ::testing::TempDir() + "/lamp.ckpt";
  save_checkpoint(path, p.params);
  const LampParams loaded = load_checkpoint(path);
  EXPECT_EQ(loaded.layers, p.params.layers);
  EXPECT_EQ(loaded.g, p.params.g);
  EXPECT_EQ(loaded.v, p.params.v);
  EXPECT_EQ(loaded.k, p.params.k);
  EXPECT_TRUE(loaded.learnable_dictionary);
  EXPECT_NEAR(loaded.gamma(), p.params.gamma(), 1e-6);
  for (int t = 0; t < 2; ++t)
    for (int k = 0; k < p.params.k; ++k) {
      EXPECT_LT((loaded.b[t][k] - p.params.b[t][k]).norm(),
                1e-6 * (p.params.b[t][k].norm() + 1.0));
    }
  EXPECT_LT((loaded.grid_distances - p.params.grid_distances).norm(),
            1e-5 * (p.params.grid_distances.norm() + 1.0));
  std::remove(path.c_str());
}

TEST(Lamp, LayerTraceShape) {
  DeskPipelineSpec spec;
  spec.n_ap = 16;
  spec.n_subcarriers = 4;
  spec.g = 8;
  spec.rho = 1;
  DeskPipeline pipe = umce::testing::make_far_pipeline(spec);
  const LampDataset data = umce::testing::draw_dataset(pipe, 10, 10.0, 21);
  const LampParams params = LampParams::initialize(pipe.a, 3);
  const RVec trace = lamp_layer_nmse_trace(data.y, data.h_true, pipe.a, pipe.dict, params);
  ASSERT_EQ(trace.size(), 3);
  for (int t = 0; t < 3; ++t) EXPECT_TRUE(std::isfinite(trace(t)));
}
