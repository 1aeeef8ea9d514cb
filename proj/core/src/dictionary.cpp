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

#include "umce/dictionary.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "umce/rng.hpp"

namespace umce {

double DftWrd::grid_sin(int v) const {
  if (v < 0 || v >= columns()) {
    throw std::out_of_range("DftWrd: column index out of range");
  }
  double u = 2.0 * static_cast<double>(v) / columns();
  if (u >= 1.0) u -= 2.0;  // wrap [0,2) onto [-1,1)
  return u;
}

DftWrd build_dft_wrd(const ArrayGeometry& geometry, int rho) {
  geometry.validate();
  if (rho < 1) throw std::invalid_argument("build_dft_wrd: rho must be >= 1");

  DftWrd wrd;
  wrd.rho = rho;
  wrd.n_ap = geometry.n_ap;
  const int cols = wrd.columns();
  wrd.d.reserve(geometry.n_subcarriers);
  for (int k = 1; k <= geometry.n_subcarriers; ++k) {
    CMat dk(geometry.n_ap, cols);
    for (int v = 0; v < cols; ++v) {
      dk.col(v) = far_steering_from_sin(geometry, wrd.grid_sin(v), k);
    }
    wrd.d.push_back(std::move(dk));
  }
  return wrd;
}

LearnableWrd build_learnable_wrd(const ArrayGeometry& geometry,
                                 const RVec& distances, const RVec& angles) {
  geometry.validate();
  if (distances.size() != angles.size() || distances.size() < 1) {
    throw std::invalid_argument("build_learnable_wrd: grid length mismatch");
  }
  const int v_total = static_cast<int>(distances.size());
  for (int v = 0; v < v_total; ++v) {
    if (!(distances(v) > 0.0)) {
      throw std::domain_error("build_learnable_wrd: non-positive distance at " +
                              std::to_string(v));
    }
  }

  LearnableWrd wrd;
  wrd.distances = distances;
  wrd.angles = angles;
  wrd.d.reserve(geometry.n_subcarriers);
  for (int k = 1; k <= geometry.n_subcarriers; ++k) {
    CMat dk(geometry.n_ap, v_total);
    for (int v = 0; v < v_total; ++v) {
      const double x = distances(v) * std::cos(angles(v));
      const double y = distances(v) * std::sin(angles(v));
      dk.col(v) = near_steering(geometry, x, y, k);
    }
    wrd.d.push_back(std::move(dk));
  }
  return wrd;
}

std::pair<RVec, RVec> init_learnable_grid(const ArrayGeometry& geometry, int v,
                                          std::uint64_t seed, double d_min) {
  geometry.validate();
  if (v < 1) throw std::invalid_argument("init_learnable_grid: V must be >= 1");
  if (!(d_min > 0.0)) throw std::invalid_argument("init_learnable_grid: d_min must be positive");
  const double d_max = 2.0 * rayleigh_distance(geometry);
  if (d_min >= d_max) {
    throw std::invalid_argument("init_learnable_grid: d_min above the distance span");
  }

  Rng rng(seed);
  RVec distances(v);
  RVec angles(v);
  const double log_lo = std::log(d_min);
  const double log_hi = std::log(d_max);
  for (int i = 0; i < v; ++i) {
    angles(i) = rng.uniform(-kPi / 2.0, kPi / 2.0);
    distances(i) = std::exp(rng.uniform(log_lo, log_hi));
  }
  return {distances, angles};
}

int center_subcarrier_index(int n_subcarriers) {
  if (n_subcarriers < 1) throw std::invalid_argument("center_subcarrier_index: empty grid");
  return n_subcarriers / 2;  // exact center for odd K, upper-middle for even
}

std::vector<CMat> frequency_flat(const std::vector<CMat>& d) {
  if (d.empty()) throw std::invalid_argument("frequency_flat: empty dictionary");
  const CMat& center = d[center_subcarrier_index(static_cast<int>(d.size()))];
  return std::vector<CMat>(d.size(), center);
}

MeasurementSet assemble_measurements(const PilotBlock& pilots,
                                     const std::vector<CMat>& dictionary) {
  if (pilots.s.size() != dictionary.size() || dictionary.empty()) {
    throw std::invalid_argument("assemble_measurements: subcarrier count mismatch");
  }
  if (pilots.s[0].cols() != dictionary[0].rows()) {
    throw std::invalid_argument("assemble_measurements: N_AP mismatch");
  }
  MeasurementSet set;
  set.g = static_cast<int>(pilots.s[0].rows());
  set.v = static_cast<int>(dictionary[0].cols());
  set.a.reserve(dictionary.size());
  for (std::size_t k = 0; k < dictionary.size(); ++k) {
    set.a.push_back(pilots.s[k] * dictionary[k]);
  }
  return set;
}

std::string grid_to_json(const RVec& distances, const RVec& angles) {
  if (distances.size() != angles.size()) {
    throw std::invalid_argument("grid_to_json: length mismatch");
  }
  nlohmann::json doc;
  doc["version"] = 1;
  doc["V"] = distances.size();
  doc["distances"] = std::vector<double>(distances.data(), distances.data() + distances.size());
  doc["angles_rad"] = std::vector<double>(angles.data(), angles.data() + angles.size());
  return doc.dump(2);
}

std::pair<RVec, RVec> grid_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (doc.at("version").get<int>() != 1) {
    throw std::runtime_error("grid_from_json: unsupported version");
  }
  const auto dv = doc.at("distances").get<std::vector<double>>();
  const auto av = doc.at("angles_rad").get<std::vector<double>>();
  if (dv.size() != av.size() || dv.size() != doc.at("V").get<std::size_t>()) {
    throw std::runtime_error("grid_from_json: inconsistent lengths");
  }
  RVec distances = Eigen::Map<const RVec>(dv.data(), static_cast<Eigen::Index>(dv.size()));
  RVec angles = Eigen::Map<const RVec>(av.data(), static_cast<Eigen::Index>(av.size()));
  return {distances, angles};
}

}  // namespace umce
