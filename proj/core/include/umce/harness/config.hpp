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
#include <optional>
#include <string>
#include <vector>

#include "umce/frontend.hpp"
#include "umce/geometry.hpp"

namespace umce {

struct PilotConfig {
  int g = 32;
  int n_rf = 2;
};

enum class DictionaryType { kDft, kFlat, kLearnable };

struct DictionaryConfig {
  DictionaryType type = DictionaryType::kDft;
  int rho = 4;            // dft / flat
  int v = 1280;           // learnable
  std::string grid_file;  // optional serialized (c_d, c_phi)

  std::string label() const;
};

enum class EstimatorType { kSomp, kGmmvAmp, kGmmvLamp };

struct EstimatorConfig {
  EstimatorType type = EstimatorType::kGmmvAmp;
  int iterations = 80;      // gmmv_amp
  double damping = 0.9;     // gmmv_amp
  int layers = 5;           // gmmv_lamp
  int sparsity = 0;         // somp; 0: use the scatterer count
  double gamma = 0.0;       // 0: L / V
  double epsilon = 0.0;     // 0: 1 / (L * N_AP)
  std::string checkpoint;   // gmmv_lamp; empty: untrained initialization

  std::string label() const;
};

// One experiment description: system geometry, channel statistics, pilots,
// receiver impairments, the dictionary/estimator grid to sweep, SNR points
// and bookkeeping. Defaults follow the reference wideband setup (70 GHz
// carrier, 10 GHz bandwidth, 64 subcarriers, 128 antennas, 32 pilot slots,
// 6 scatterers, rho = 4, 5 layers, IQ errors 0.1 and 5 degrees).
struct ExperimentConfig {
  ArrayGeometry geometry;
  ScattererProfile scatterers;
  PilotConfig pilots;
  // Impairment model used when exporting quantized datasets and when
  // rx_chain == "impaired".
  QuantizerConfig quantizer{2, 4, 0.1, 5.0 * kPi / 180.0};
  // Estimation runs default to the unimpaired path; the impaired numbers
  // depend on a de-quantizer that is out of scope here.
  std::string rx_chain = "passthrough";  // or "impaired"

  std::vector<DictionaryConfig> dictionaries{DictionaryConfig{}};
  std::vector<EstimatorConfig> estimators{EstimatorConfig{}};
  std::vector<double> snr_grid_db{-10, -5, 0, 5, 10};
  double dataset_snr_db = 10.0;  // gen-dataset noise level
  int trials = 100;
  std::uint64_t seed = 1;
  std::string output = "metrics.csv";
  int threads = 0;  // 0: hardware concurrency
  bool record_wall_time = false;

  void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

/// UMCE_OUT_DIR and UMCE_THREADS are the only supported environment
/// overrides; they rewrite the output path and thread count in place.
void apply_env_overrides(ExperimentConfig& config);

}  // namespace umce
