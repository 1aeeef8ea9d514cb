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

#include "umce/harness/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "umce/dictionary.hpp"
#include "umce/estimators.hpp"
#include "umce/harness/dataset.hpp"
#include "umce/lamp.hpp"
#include "umce/rng.hpp"

namespace umce {

namespace {

constexpr std::uint64_t kStreamScatter = 1;
constexpr std::uint64_t kStreamPilot = 2;
constexpr std::uint64_t kStreamNoise = 3;
constexpr std::uint64_t kStreamGrid = 0x47524944;

std::vector<CMat> build_dictionary(const ExperimentConfig& config,
                                   const DictionaryConfig& spec,
                                   std::size_t dict_index) {
  switch (spec.type) {
    case DictionaryType::kDft:
      return build_dft_wrd(config.geometry, spec.rho).d;
    case DictionaryType::kFlat:
      return frequency_flat(build_dft_wrd(config.geometry, spec.rho).d);
    case DictionaryType::kLearnable: {
      RVec distances, angles;
      if (!spec.grid_file.empty()) {
        std::ifstream in(spec.grid_file);
        if (!in) throw std::runtime_error("sweep: cannot open grid " + spec.grid_file);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::tie(distances, angles) = grid_from_json(buf.str());
      } else {
        std::tie(distances, angles) = init_learnable_grid(
            config.geometry, spec.v, derive_seed(config.seed, kStreamGrid, dict_index),
            config.scatterers.d_min_m);
      }
      return build_learnable_wrd(config.geometry, distances, angles).d;
    }
  }
  throw std::logic_error("sweep: unknown dictionary type");
}

struct LampCell {
  bool loaded = false;
  LampParams params;
  std::uint64_t pilot_seed = 0;
  bool has_pilot_seed = false;
};

LampCell prepare_lamp(const EstimatorConfig& est) {
  LampCell cell;
  if (est.checkpoint.empty()) return cell;
  cell.params = load_checkpoint(est.checkpoint);
  cell.loaded = true;
  std::ifstream manifest(est.checkpoint + ".json");
  if (manifest) {
    std::ostringstream buf;
    buf << manifest.rdbuf();
    const auto doc = nlohmann::json::parse(buf.str());
    if (doc.contains("pilot_seed")) {
      cell.pilot_seed = doc.at("pilot_seed").get<std::uint64_t>();
      cell.has_pilot_seed = true;
    }
  }
  return cell;
}

double run_trial(const ExperimentConfig& config, const std::vector<CMat>& dict,
                 const EstimatorConfig& est, const LampCell& lamp_cell,
                 double snr_db, std::uint64_t trial_seed) {
  const ArrayGeometry& geom = config.geometry;
  const ScattererSet scatterers = sample_scatterers(
      geom, config.scatterers, derive_seed(trial_seed, kStreamScatter, 0));
  const ChannelRealization channel = channel_matrix(geom, scatterers);

  const std::uint64_t pilot_seed = lamp_cell.has_pilot_seed
                                       ? lamp_cell.pilot_seed
                                       : derive_seed(trial_seed, kStreamPilot, 0);
  const PilotBlock pilots = gen_pilots(geom, config.pilots.g, config.pilots.n_rf,
                                       pilot_seed);
  const RxBlocks rx = simulate_rx(channel.h, pilots, snr_db,
                                  derive_seed(trial_seed, kStreamNoise, 0));
  CMat y = rx.noisy;
  if (config.rx_chain == "impaired") {
    y = receiver_frontend(rx.noisy, config.quantizer, rx.noise_power).freq;
  }
  MeasurementSet meas = assemble_measurements(pilots, dict);
  // Condition the problem: unit-norm measurement columns, unit-variance
  // active coefficients. The recovered CSI is rescaled back below.
  const int l_total = config.scatterers.total();
  const double c_meas = measurement_column_scale(config.pilots.g, config.pilots.n_rf);
  const double q_coeff = coefficient_unit_scale(l_total, geom.n_ap);
  y *= q_coeff / c_meas;
  for (CMat& a : meas.a) a /= c_meas;

  CMat h_sparse;
  switch (est.type) {
    case EstimatorType::kSomp: {
      const int sparsity = est.sparsity > 0 ? est.sparsity : l_total;
      h_sparse = somp(y, meas.a, sparsity);
      break;
    }
    case EstimatorType::kGmmvAmp: {
      BernoulliGaussianPrior prior;
      prior.gamma = est.gamma > 0 ? est.gamma
                                  : static_cast<double>(l_total) / meas.v;
      prior.epsilon = est.epsilon > 0 ? est.epsilon : 1.0;
      GmmvAmpOptions opts;
      opts.iterations = est.iterations;
      opts.damping = est.damping;
      h_sparse = gmmv_amp(y, meas.a, prior, opts).h_sparse;
      break;
    }
    case EstimatorType::kGmmvLamp: {
      if (lamp_cell.loaded) {
        h_sparse = lamp_forward(y, meas.a, lamp_cell.params).h_sparse;
      } else {
        // Untrained network: the initialization point, i.e. undamped
        // GMMV-AMP truncated to `layers` iterations.
        LampParams params = LampParams::initialize(meas.a, est.layers);
        if (est.gamma > 0) params.set_gamma(est.gamma);
        if (est.epsilon > 0) params.set_epsilon(est.epsilon);
        h_sparse = lamp_forward(y, meas.a, params).h_sparse;
      }
      break;
    }
  }

  CMat recon(geom.n_ap, geom.n_subcarriers);
  for (int k = 0; k < geom.n_subcarriers; ++k) {
    recon.col(k) = dict[k] * h_sparse.col(k) / q_coeff;
  }
  return nmse(recon, channel.h);
}

}  // namespace

std::vector<MetricsRecord> run_sweep(const ExperimentConfig& config) {
  config.validate();
  const int n_threads = config.threads > 0
                            ? config.threads
                            : static_cast<int>(std::thread::hardware_concurrency());

  std::vector<MetricsRecord> records;
  std::size_t cell_index = 0;
  for (std::size_t di = 0; di < config.dictionaries.size(); ++di) {
    std::vector<CMat> dict;
    try {
      dict = build_dictionary(config, config.dictionaries[di], di);
    } catch (const std::exception& e) {
      std::cerr << "sweep: dictionary " << config.dictionaries[di].label()
                << " failed: " << e.what() << "\n";
      cell_index += config.estimators.size() * config.snr_grid_db.size();
      continue;
    }
    for (std::size_t ei = 0; ei < config.estimators.size(); ++ei) {
      LampCell lamp_cell;
      bool lamp_ok = true;
      if (config.estimators[ei].type == EstimatorType::kGmmvLamp) {
        try {
          lamp_cell = prepare_lamp(config.estimators[ei]);
        } catch (const std::exception& e) {
          std::cerr << "sweep: estimator " << config.estimators[ei].label()
                    << " failed: " << e.what() << "\n";
          lamp_ok = false;
        }
      }
      for (double snr_db : config.snr_grid_db) {
        const std::uint64_t cell_id = cell_index++;
        if (!lamp_ok) continue;

        const auto start = std::chrono::steady_clock::now();
        std::vector<double> trial_nmse(config.trials, 0.0);
        std::vector<std::string> trial_error(config.trials);
        std::atomic<int> next{0};
        auto worker = [&]() {
          while (true) {
            const int t = next.fetch_add(1);
            if (t >= config.trials) break;
            try {
              trial_nmse[t] = run_trial(config, dict, config.estimators[ei],
                                        lamp_cell, snr_db,
                                        derive_seed(config.seed, cell_id,
                                                    static_cast<std::uint64_t>(t)));
            } catch (const std::exception& e) {
              trial_error[t] = e.what();
            }
          }
        };
        std::vector<std::thread> pool;
        const int workers = std::max(1, std::min(n_threads, config.trials));
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();

        bool failed = false;
        for (int t = 0; t < config.trials; ++t) {
          if (!trial_error[t].empty()) {
            std::cerr << "sweep: cell (" << config.dictionaries[di].label() << ", "
                      << config.estimators[ei].label() << ", " << snr_db
                      << " dB) trial " << t << " failed: " << trial_error[t] << "\n";
            failed = true;
            break;
          }
        }
        if (failed) continue;

        // Fixed-order reduction keeps the aggregate independent of the
        // thread count.
        double acc = 0.0;
        for (int t = 0; t < config.trials; ++t) acc += trial_nmse[t];
        const double mean_nmse = acc / config.trials;
        const auto elapsed = std::chrono::steady_clock::now() - start;

        MetricsRecord rec;
        rec.estimator = config.estimators[ei].label();
        rec.dictionary = config.dictionaries[di].label();
        rec.snr_db = snr_db;
        rec.bandwidth_hz = config.geometry.bandwidth_hz;
        rec.n_ap = config.geometry.n_ap;
        rec.g = config.pilots.g;
        rec.nmse_db = to_db(mean_nmse);
        rec.trials = config.trials;
        rec.wall_time_s =
            config.record_wall_time
                ? std::chrono::duration<double>(elapsed).count()
                : 0.0;
        rec.seed = config.seed;
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << kMetricsCsvHeader << "\n";
  char line[512];
  for (const MetricsRecord& r : records) {
    std::snprintf(line, sizeof(line),
                  "%s,%s,%.6g,%.10g,%d,%d,%.6f,%d,%.3f,%" PRIu64,
                  r.estimator.c_str(), r.dictionary.c_str(), r.snr_db,
                  r.bandwidth_hz, r.n_ap, r.g, r.nmse_db, r.trials, r.wall_time_s,
                  static_cast<std::uint64_t>(r.seed));
    out << line << "\n";
  }
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRecord>& records) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::runtime_error("sweep: cannot write " + path);
  write_metrics_csv(out, records);
}

}  // namespace umce
