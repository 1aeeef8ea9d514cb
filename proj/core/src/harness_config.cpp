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

#include "umce/harness/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace umce {

namespace {

using nlohmann::json;

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

int parse_bits(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "infinite") return kInfiniteBits;
    throw std::invalid_argument("config: quantizer bits must be a number or \"inf\"");
  }
  return j.get<int>();
}

DictionaryType dict_type_from_string(const std::string& s) {
  if (s == "dft") return DictionaryType::kDft;
  if (s == "flat") return DictionaryType::kFlat;
  if (s == "learnable") return DictionaryType::kLearnable;
  throw std::invalid_argument("config: unknown dictionary type " + s);
}

std::string dict_type_to_string(DictionaryType t) {
  switch (t) {
    case DictionaryType::kDft: return "dft";
    case DictionaryType::kFlat: return "flat";
    case DictionaryType::kLearnable: return "learnable";
  }
  return "dft";
}

EstimatorType est_type_from_string(const std::string& s) {
  if (s == "somp") return EstimatorType::kSomp;
  if (s == "gmmv_amp") return EstimatorType::kGmmvAmp;
  if (s == "gmmv_lamp") return EstimatorType::kGmmvLamp;
  throw std::invalid_argument("config: unknown estimator type " + s);
}

std::string est_type_to_string(EstimatorType t) {
  switch (t) {
    case EstimatorType::kSomp: return "somp";
    case EstimatorType::kGmmvAmp: return "gmmv_amp";
    case EstimatorType::kGmmvLamp: return "gmmv_lamp";
  }
  return "gmmv_amp";
}

}  // namespace

std::string DictionaryConfig::label() const {
  switch (type) {
    case DictionaryType::kDft: return "dft(rho=" + std::to_string(rho) + ")";
    case DictionaryType::kFlat: return "flat(rho=" + std::to_string(rho) + ")";
    case DictionaryType::kLearnable: return "learnable(V=" + std::to_string(v) + ")";
  }
  return "dft";
}

std::string EstimatorConfig::label() const {
  switch (type) {
    case EstimatorType::kSomp: return "somp";
    case EstimatorType::kGmmvAmp: return "gmmv_amp";
    case EstimatorType::kGmmvLamp: return "gmmv_lamp";
  }
  return "gmmv_amp";
}

void ExperimentConfig::validate() const {
  geometry.validate();
  quantizer.validate();
  if (pilots.g < 1 || pilots.n_rf < 1) {
    throw std::invalid_argument("config: pilot counts must be positive");
  }
  if (rx_chain != "passthrough" && rx_chain != "impaired") {
    throw std::invalid_argument("config: rx_chain must be passthrough or impaired");
  }
  if (dictionaries.empty() || estimators.empty() || snr_grid_db.empty()) {
    throw std::invalid_argument("config: dictionaries, estimators and snr grid must be nonempty");
  }
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  for (const auto& d : dictionaries) {
    if ((d.type == DictionaryType::kDft || d.type == DictionaryType::kFlat) && d.rho < 1) {
      throw std::invalid_argument("config: rho must be >= 1");
    }
    if (d.type == DictionaryType::kLearnable && d.v < 1) {
      throw std::invalid_argument("config: learnable V must be >= 1");
    }
  }
  for (const auto& e : estimators) {
    if (e.type == EstimatorType::kGmmvAmp && e.iterations < 1) {
      throw std::invalid_argument("config: gmmv_amp iterations must be >= 1");
    }
    if (e.type == EstimatorType::kGmmvLamp && e.layers < 0) {
      throw std::invalid_argument("config: gmmv_lamp layers must be >= 0");
    }
  }
}

ExperimentConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig c;
  if (j.contains("geometry")) {
    const json& g = j.at("geometry");
    maybe(g, "n_ap", c.geometry.n_ap);
    maybe(g, "carrier_freq_hz", c.geometry.carrier_freq_hz);
    maybe(g, "bandwidth_hz", c.geometry.bandwidth_hz);
    maybe(g, "n_subcarriers", c.geometry.n_subcarriers);
  }
  if (j.contains("scatterers")) {
    const json& s = j.at("scatterers");
    maybe(s, "l_far", c.scatterers.l_far);
    maybe(s, "l_near", c.scatterers.l_near);
    maybe(s, "delay_bound_s", c.scatterers.delay_bound_s);
    maybe(s, "aod_bound_rad", c.scatterers.aod_bound_rad);
    maybe(s, "d_min_m", c.scatterers.d_min_m);
    maybe(s, "max_distance_m", c.scatterers.max_distance_m);
  }
  if (j.contains("pilots")) {
    maybe(j.at("pilots"), "g", c.pilots.g);
    maybe(j.at("pilots"), "n_rf", c.pilots.n_rf);
  }
  if (j.contains("quantizer")) {
    const json& q = j.at("quantizer");
    if (q.contains("bits")) c.quantizer.bits = parse_bits(q.at("bits"));
    maybe(q, "oversampling", c.quantizer.oversampling);
    maybe(q, "iq_gain_error", c.quantizer.iq_gain_error);
    maybe(q, "iq_phase_error_rad", c.quantizer.iq_phase_error_rad);
  }
  maybe(j, "rx_chain", c.rx_chain);
  if (j.contains("dictionaries")) {
    c.dictionaries.clear();
    for (const json& d : j.at("dictionaries")) {
      DictionaryConfig dc;
      dc.type = dict_type_from_string(d.at("type").get<std::string>());
      maybe(d, "rho", dc.rho);
      maybe(d, "v", dc.v);
      maybe(d, "grid_file", dc.grid_file);
      c.dictionaries.push_back(dc);
    }
  }
  if (j.contains("estimators")) {
    c.estimators.clear();
    for (const json& e : j.at("estimators")) {
      EstimatorConfig ec;
      ec.type = est_type_from_string(e.at("type").get<std::string>());
      maybe(e, "iterations", ec.iterations);
      maybe(e, "damping", ec.damping);
      maybe(e, "layers", ec.layers);
      maybe(e, "sparsity", ec.sparsity);
      maybe(e, "gamma", ec.gamma);
      maybe(e, "epsilon", ec.epsilon);
      maybe(e, "checkpoint", ec.checkpoint);
      c.estimators.push_back(ec);
    }
  }
  maybe(j, "snr_grid_db", c.snr_grid_db);
  maybe(j, "dataset_snr_db", c.dataset_snr_db);
  maybe(j, "trials", c.trials);
  maybe(j, "seed", c.seed);
  maybe(j, "output", c.output);
  maybe(j, "threads", c.threads);
  maybe(j, "record_wall_time", c.record_wall_time);
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["geometry"] = {{"n_ap", c.geometry.n_ap},
                   {"carrier_freq_hz", c.geometry.carrier_freq_hz},
                   {"bandwidth_hz", c.geometry.bandwidth_hz},
                   {"n_subcarriers", c.geometry.n_subcarriers}};
  j["scatterers"] = {{"l_far", c.scatterers.l_far},
                     {"l_near", c.scatterers.l_near},
                     {"delay_bound_s", c.scatterers.delay_bound_s},
                     {"aod_bound_rad", c.scatterers.aod_bound_rad},
                     {"d_min_m", c.scatterers.d_min_m},
                     {"max_distance_m", c.scatterers.max_distance_m}};
  j["pilots"] = {{"g", c.pilots.g}, {"n_rf", c.pilots.n_rf}};
  json q;
  if (c.quantizer.bits == kInfiniteBits) {
    q["bits"] = "inf";
  } else {
    q["bits"] = c.quantizer.bits;
  }
  q["oversampling"] = c.quantizer.oversampling;
  q["iq_gain_error"] = c.quantizer.iq_gain_error;
  q["iq_phase_error_rad"] = c.quantizer.iq_phase_error_rad;
  j["quantizer"] = q;
  j["rx_chain"] = c.rx_chain;
  j["dictionaries"] = json::array();
  for (const auto& d : c.dictionaries) {
    json dj;
    dj["type"] = dict_type_to_string(d.type);
    dj["rho"] = d.rho;
    dj["v"] = d.v;
    if (!d.grid_file.empty()) dj["grid_file"] = d.grid_file;
    j["dictionaries"].push_back(dj);
  }
  j["estimators"] = json::array();
  for (const auto& e : c.estimators) {
    json ej;
    ej["type"] = est_type_to_string(e.type);
    ej["iterations"] = e.iterations;
    ej["damping"] = e.damping;
    ej["layers"] = e.layers;
    ej["sparsity"] = e.sparsity;
    ej["gamma"] = e.gamma;
    ej["epsilon"] = e.epsilon;
    if (!e.checkpoint.empty()) ej["checkpoint"] = e.checkpoint;
    j["estimators"].push_back(ej);
  }
  j["snr_grid_db"] = c.snr_grid_db;
  j["dataset_snr_db"] = c.dataset_snr_db;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["threads"] = c.threads;
  j["record_wall_time"] = c.record_wall_time;
  return j.dump(2);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

void apply_env_overrides(ExperimentConfig& config) {
  if (const char* dir = std::getenv("UMCE_OUT_DIR")) {
    config.output = (std::filesystem::path(dir) /
                     std::filesystem::path(config.output).filename())
                        .string();
  }
  if (const char* threads = std::getenv("UMCE_THREADS")) {
    config.threads = std::atoi(threads);
  }
}

}  // namespace umce
