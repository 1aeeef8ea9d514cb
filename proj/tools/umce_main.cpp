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

#include <cinttypes>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "umce/dictionary.hpp"
#include "umce/estimators.hpp"
#include "umce/feedback.hpp"
#include "umce/harness/complexity.hpp"
#include "umce/harness/dataset.hpp"
#include "umce/harness/sweep.hpp"
#include "umce/lamp.hpp"
#include "umce/rng.hpp"

namespace {

using namespace umce;

ExperimentConfig load(const std::string& path) {
  ExperimentConfig config = load_config(path);
  apply_env_overrides(config);
  return config;
}

std::vector<CMat> dictionary_for(const ExperimentConfig& config,
                                 const DictionaryConfig& spec) {
  switch (spec.type) {
    case DictionaryType::kDft:
      return build_dft_wrd(config.geometry, spec.rho).d;
    case DictionaryType::kFlat:
      return frequency_flat(build_dft_wrd(config.geometry, spec.rho).d);
    case DictionaryType::kLearnable: {
      RVec distances, angles;
      if (!spec.grid_file.empty()) {
        std::ifstream in(spec.grid_file);
        if (!in) throw std::runtime_error("cannot open grid file " + spec.grid_file);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::tie(distances, angles) = grid_from_json(buf.str());
      } else {
        std::tie(distances, angles) =
            init_learnable_grid(config.geometry, spec.v,
                                derive_seed(config.seed, 0x47524944, 0),
                                config.scatterers.d_min_m);
      }
      return build_learnable_wrd(config.geometry, distances, angles).d;
    }
  }
  throw std::logic_error("unknown dictionary type");
}

int cmd_gen_dataset(const std::string& config_path, int count, std::uint64_t seed,
                    const std::string& out_dir) {
  ExperimentConfig config = load(config_path);
  if (seed != 0) config.seed = seed;
  const Dataset dataset = generate_dataset(config, count, config.seed);
  const std::string hash = write_dataset(out_dir, config, dataset, count, config.seed);
  std::cout << "wrote " << count << " samples to " << out_dir
            << " (content hash " << hash << ")\n";
  return 0;
}

int cmd_estimate(const std::string& config_path, double snr_db, std::uint64_t seed) {
  ExperimentConfig config = load(config_path);
  config.snr_grid_db = {snr_db};
  config.trials = 1;
  if (seed != 0) config.seed = seed;
  const std::vector<MetricsRecord> records = run_sweep(config);
  for (const MetricsRecord& r : records) {
    std::cout << r.estimator << " + " << r.dictionary << " @ " << r.snr_db
              << " dB: NMSE " << r.nmse_db << " dB\n";
  }
  return records.empty() ? 1 : 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override) {
  ExperimentConfig config = load(config_path);
  if (!out_override.empty()) config.output = out_override;
  const std::vector<MetricsRecord> records = run_sweep(config);
  write_metrics_csv(config.output, records);
  std::cout << "wrote " << records.size() << " rows to " << config.output << "\n";
  return 0;
}

int cmd_train_lamp(const std::string& config_path, int count, int val_count,
                   int layers, int steps, double lr, int batch,
                   const std::string& out_path) {
  ExperimentConfig config = load(config_path);

  // One dataset, one pilot block: the trained matrices are tied to the
  // pilot realization, so train and validation must share it.
  Dataset raw = generate_dataset(config, count + val_count, config.seed);
  const PilotBlock pilots = gen_pilots(config.geometry, config.pilots.g,
                                       config.pilots.n_rf, raw.pilot_seed);

  LampModelContext ctx;
  ctx.s = pilots.s;
  const double c_meas = measurement_column_scale(config.pilots.g, config.pilots.n_rf);
  const double q_coeff =
      coefficient_unit_scale(config.scatterers.total(), config.geometry.n_ap);
  for (CMat& s : ctx.s) s /= c_meas;
  ctx.geometry = config.geometry;
  const DictionaryConfig& dict_spec = config.dictionaries.front();
  if (dict_spec.type == DictionaryType::kLearnable) {
    ctx.learnable_dictionary = true;
    std::tie(ctx.init_grid_distances, ctx.init_grid_angles) =
        init_learnable_grid(config.geometry, dict_spec.v,
                            derive_seed(config.seed, 0x47524944, 0),
                            config.scatterers.d_min_m);
  } else {
    ctx.d = dictionary_for(config, dict_spec);
  }

  auto to_set = [c_meas, q_coeff](Dataset& raw) {
    LampDataset set;
    set.y.reserve(raw.samples.size());
    set.h_true.reserve(raw.samples.size());
    for (DatasetSample& s : raw.samples) {
      set.y.push_back(s.y_impaired * (q_coeff / c_meas));
      set.h_true.push_back(q_coeff * s.h);
    }
    return set;
  };
  LampDataset all = to_set(raw);
  LampDataset train_set, val_set;
  for (int i = 0; i < count; ++i) {
    train_set.y.push_back(std::move(all.y[i]));
    train_set.h_true.push_back(std::move(all.h_true[i]));
  }
  for (int i = count; i < count + val_count; ++i) {
    val_set.y.push_back(std::move(all.y[i]));
    val_set.h_true.push_back(std::move(all.h_true[i]));
  }

  TrainSchedule schedule;
  schedule.steps_per_stage = steps;
  schedule.learning_rate = lr;
  schedule.batch_size = batch;

  const TrainResult result =
      train_lamp(train_set, val_set, ctx, schedule, layers, config.seed);
  save_checkpoint(out_path, result.params);
  for (const StageRecord& rec : result.history) {
    std::cout << "stage " << rec.stage << ": train NMSE " << to_db(rec.loss_begin)
              << " dB -> " << to_db(rec.loss_end) << " dB (" << rec.steps
              << " steps)\n";
  }

  nlohmann::json manifest;
  manifest["gamma"] = result.params.gamma();
  manifest["epsilon"] = result.params.epsilon();
  manifest["layers"] = layers;
  manifest["schedule"] = {{"steps_per_stage", steps},
                          {"learning_rate", lr},
                          {"batch_size", batch}};
  manifest["seed"] = config.seed;
  manifest["pilot_seed"] = raw.pilot_seed;
  manifest["train_count"] = count;
  manifest["dataset_hash"] = fnv1a64(config_to_json(config) + std::to_string(config.seed) +
                                     std::to_string(count));
  manifest["initial_validation_nmse"] = result.initial_validation_nmse;
  manifest["final_validation_nmse"] = result.final_validation_nmse;
  std::ofstream mf(out_path + ".json");
  mf << manifest.dump(2) << "\n";

  std::cout << "trained " << layers << " layers: validation NMSE "
            << to_db(result.initial_validation_nmse) << " dB -> "
            << to_db(result.final_validation_nmse) << " dB\n"
            << "checkpoint written to " << out_path << "\n";
  return 0;
}

int cmd_feedback(const std::string& config_path, int support, int coeff_bits,
                 std::uint64_t seed, const std::string& out_path) {
  ExperimentConfig config = load(config_path);
  if (seed != 0) config.seed = seed;

  const std::vector<CMat> dict = dictionary_for(config, config.dictionaries.front());
  const ScattererSet scatterers =
      sample_scatterers(config.geometry, config.scatterers,
                        derive_seed(config.seed, 1, 0));
  const ChannelRealization channel = channel_matrix(config.geometry, scatterers);
  const PilotBlock pilots =
      gen_pilots(config.geometry, config.pilots.g, config.pilots.n_rf,
                 derive_seed(config.seed, 2, 0));
  const RxBlocks rx = simulate_rx(channel.h, pilots, config.dataset_snr_db,
                                  derive_seed(config.seed, 3, 0));
  MeasurementSet meas = assemble_measurements(pilots, dict);
  const double c_meas = measurement_column_scale(config.pilots.g, config.pilots.n_rf);
  const double q_coeff =
      coefficient_unit_scale(config.scatterers.total(), config.geometry.n_ap);
  const CMat y_obs = rx.noisy * (q_coeff / c_meas);
  for (CMat& a : meas.a) a /= c_meas;

  BernoulliGaussianPrior prior;
  prior.gamma = static_cast<double>(config.scatterers.total()) / meas.v;
  prior.epsilon = 1.0;
  GmmvAmpOptions opts;
  const CMat h_sparse = gmmv_amp(y_obs, meas.a, prior, opts).h_sparse;

  FeedbackCodebook codebook;
  codebook.support_size = support;
  codebook.coeff_bits = coeff_bits;
  codebook.v_total = meas.v;
  codebook.k_total = config.geometry.n_subcarriers;

  const BitVector bits = encode_csi(h_sparse, codebook);
  const CMat recon = decode_csi(bits, codebook, dict) / q_coeff;

  CMat estimate(config.geometry.n_ap, config.geometry.n_subcarriers);
  for (int k = 0; k < config.geometry.n_subcarriers; ++k) {
    estimate.col(k) = dict[k] * h_sparse.col(k) / q_coeff;
  }

  std::cout << "feedback budget " << bits.n_bits << " bits (S=" << support
            << ", Qf=" << coeff_bits << ")\n";
  std::cout << "reconstruction vs channel:  " << to_db(nmse(recon, channel.h)) << " dB\n";
  std::cout << "reconstruction vs estimate: " << to_db(nmse(recon, estimate)) << " dB\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    write_bitvector(out, bits);
    std::cout << "bit vector written to " << out_path << "\n";
  }
  return 0;
}

int cmd_complexity(const std::string& config_path) {
  const ExperimentConfig config = load(config_path);
  print_complexity(std::cout, complexity_report(dims_from_config(config)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wideband UM-MIMO channel estimation laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int count = 1000;

  auto* gen = app.add_subcommand("gen-dataset", "generate and persist a dataset");
  gen->add_option("--config", config_path, "experiment config JSON")->required();
  gen->add_option("--count", count, "number of samples");
  gen->add_option("--seed", seed, "seed override");
  gen->add_option("--out", out_path, "output directory")->required();

  double snr_db = 10.0;
  auto* est = app.add_subcommand("estimate", "run one estimation trial per cell");
  est->add_option("--config", config_path, "experiment config JSON")->required();
  est->add_option("--snr", snr_db, "SNR in dB");
  est->add_option("--seed", seed, "seed override");

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep to CSV");
  sweep->add_option("--config", config_path, "experiment config JSON")->required();
  sweep->add_option("--out", out_path, "CSV path override");

  int layers = 3;
  int steps = 200;
  double lr = 0.02;
  int batch = 32;
  int val_count = 200;
  auto* train = app.add_subcommand("train-lamp", "train the unrolled network");
  train->add_option("--config", config_path, "experiment config JSON")->required();
  train->add_option("--count", count, "training samples");
  train->add_option("--val", val_count, "validation samples");
  train->add_option("--layers", layers, "network depth T");
  train->add_option("--steps", steps, "gradient steps per stage");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--batch", batch, "batch size");
  train->add_option("--out", out_path, "checkpoint path")->required();

  int support = 8;
  int coeff_bits = 4;
  auto* fb = app.add_subcommand("feedback", "encode/decode one CSI estimate");
  fb->add_option("--config", config_path, "experiment config JSON")->required();
  fb->add_option("--support", support, "retained rows S");
  fb->add_option("--bits", coeff_bits, "coefficient bits Qf");
  fb->add_option("--seed", seed, "seed override");
  fb->add_option("--out", out_path, "bit-vector blob path");

  auto* cx = app.add_subcommand("complexity", "closed-form operation counts");
  cx->add_option("--config", config_path, "experiment config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_dataset(config_path, count, seed, out_path);
    if (est->parsed()) return cmd_estimate(config_path, snr_db, seed);
    if (sweep->parsed()) return cmd_sweep(config_path, out_path);
    if (train->parsed()) {
      return cmd_train_lamp(config_path, count, val_count, layers, steps, lr, batch,
                            out_path);
    }
    if (fb->parsed()) return cmd_feedback(config_path, support, coeff_bits, seed, out_path);
    if (cx->parsed()) return cmd_complexity(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
