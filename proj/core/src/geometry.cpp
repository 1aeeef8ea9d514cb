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

#include "umce/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "umce/rng.hpp"

namespace umce {

double nmse(const CMat& estimate, const CMat& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw std::invalid_argument("nmse: shape mismatch");
  }
  const double denom = truth.squaredNorm();
  if (denom == 0.0) {
    throw std::domain_error("nmse: zero-norm reference");
  }
  return (estimate - truth).squaredNorm() / denom;
}

double to_db(double linear) {
  if (linear <= 0.0) {
    throw std::domain_error("to_db: non-positive argument");
  }
  return 10.0 * std::log10(linear);
}

void ArrayGeometry::validate() const {
  if (n_ap < 2) throw std::invalid_argument("geometry: n_ap must be >= 2");
  if (carrier_freq_hz <= 0) throw std::invalid_argument("geometry: carrier_freq_hz must be positive");
  if (bandwidth_hz < 0) throw std::invalid_argument("geometry: bandwidth_hz must be nonnegative");
  if (n_subcarriers < 1) throw std::invalid_argument("geometry: n_subcarriers must be >= 1");
  if (bandwidth_hz >= 2.0 * carrier_freq_hz) {
    throw std::invalid_argument("geometry: bandwidth must be below twice the carrier");
  }
}

double Scatterer::distance_m() const {
  return std::sqrt(x_m * x_m + y_m * y_m);
}

namespace {

void check_subcarrier(const ArrayGeometry& geometry, int k) {
  if (k < 1 || k > geometry.n_subcarriers) {
    throw std::out_of_range("subcarrier index out of range: " + std::to_string(k));
  }
}

}  // namespace

double subcarrier_frequency(const ArrayGeometry& geometry, int k) {
  check_subcarrier(geometry, k);
  const double kk = static_cast<double>(k);
  const double kc = (geometry.n_subcarriers + 1) / 2.0;
  return geometry.carrier_freq_hz +
         (kk - kc) * geometry.bandwidth_hz / geometry.n_subcarriers;
}

double subcarrier_wavelength(const ArrayGeometry& geometry, int k) {
  return kSpeedOfLight / subcarrier_frequency(geometry, k);
}

CVec near_steering(const ArrayGeometry& geometry, double x_m, double y_m, int k) {
  check_subcarrier(geometry, k);
  if (x_m <= 0.0) {
    throw std::domain_error("near_steering: source must have x > 0");
  }
  const double lambda_k = subcarrier_wavelength(geometry, k);
  CVec a(geometry.n_ap);
  const double dy1 = y_m - geometry.antenna_y_m(1);
  const double d1 = std::sqrt(x_m * x_m + dy1 * dy1);
  for (int i = 1; i <= geometry.n_ap; ++i) {
    const double dy = y_m - geometry.antenna_y_m(i);
    const double di = std::sqrt(x_m * x_m + dy * dy);
    if (di == 0.0) {
      throw std::domain_error("near_steering: source coincides with antenna " +
                              std::to_string(i));
    }
    const double phase = -2.0 * kPi * (di - d1) / lambda_k;
    a(i - 1) = cxd(std::cos(phase), std::sin(phase));
  }
  a(0) = cxd(1.0, 0.0);  // D_1 = 0 by definition; avoid roundoff in d1 - d1
  return a;
}

CVec far_steering_from_sin(const ArrayGeometry& geometry, double sin_aod, int k) {
  check_subcarrier(geometry, k);
  const double lambda_c = geometry.carrier_wavelength_m();
  const double lambda_k = subcarrier_wavelength(geometry, k);
  // Element n is exp(-j*(n-1)*pi*lambda_c*sin(-aod)/lambda_k): with antennas
  // ascending in y, the spherical-wave phase D_i = d_i - d_1 tends to
  // -(i-1)*d*sin(aod), so this sign is the one the near-field model
  // converges to.
  const double step = kPi * lambda_c * sin_aod / lambda_k;
  CVec a(geometry.n_ap);
  for (int n = 0; n < geometry.n_ap; ++n) {
    const double phase = step * n;
    a(n) = cxd(std::cos(phase), std::sin(phase));
  }
  return a;
}

CVec far_steering(const ArrayGeometry& geometry, double aod_rad, int k) {
  if (!(aod_rad > -kPi / 2.0 && aod_rad < kPi / 2.0)) {
    throw std::domain_error("far_steering: AoD must lie in (-pi/2, pi/2)");
  }
  return far_steering_from_sin(geometry, std::sin(aod_rad), k);
}

ChannelRealization channel_matrix(const ArrayGeometry& geometry,
                                  const ScattererSet& scatterers) {
  geometry.validate();
  if (scatterers.empty()) {
    throw std::domain_error("channel_matrix: empty scatterer set");
  }
  const int n = geometry.n_ap;
  const int kk = geometry.n_subcarriers;
  const double scale = std::sqrt(1.0 / (static_cast<double>(scatterers.size()) * n));

  CMat h = CMat::Zero(n, kk);
  for (const Scatterer& s : scatterers) {
    for (int k = 1; k <= kk; ++k) {
      const double delay_phase =
          -2.0 * kPi * k * geometry.bandwidth_hz * s.delay_s / kk;
      const cxd rot = s.gain * cxd(std::cos(delay_phase), std::sin(delay_phase));
      const CVec a = (s.kind == ScattererKind::kNear)
                         ? near_steering(geometry, s.x_m, s.y_m, k)
                         : far_steering(geometry, s.aod_rad, k);
      h.col(k - 1) += (scale * rot) * a;
    }
  }
  return ChannelRealization{std::move(h), scatterers};
}

double rayleigh_distance(const ArrayGeometry& geometry) {
  const double aperture = (geometry.n_ap - 1) * geometry.antenna_spacing_m();
  return 2.0 * aperture * aperture / geometry.carrier_wavelength_m();
}

double effective_rayleigh_distance(const ArrayGeometry& geometry) {
  return rayleigh_distance(geometry) / 4.0;
}

ScattererSet sample_scatterers(const ArrayGeometry& geometry,
                               const ScattererProfile& profile,
                               std::uint64_t seed) {
  geometry.validate();
  if (profile.total() < 1) {
    throw std::domain_error("sample_scatterers: at least one scatterer required");
  }
  if (profile.delay_bound_s < 0) {
    throw std::domain_error("sample_scatterers: negative delay bound");
  }
  // Delay taps must fit within the pilot subcarrier count.
  if (profile.delay_bound_s * geometry.bandwidth_hz > geometry.n_subcarriers) {
    throw std::domain_error(
        "sample_scatterers: delay bound exceeds K/f_s; shorten it or add subcarriers");
  }
  const double d_max = profile.max_distance_m > 0 ? profile.max_distance_m
                                                  : rayleigh_distance(geometry);
  if (profile.l_near > 0 && profile.d_min_m >= d_max) {
    throw std::domain_error("sample_scatterers: d_min must be below the distance bound");
  }

  Rng rng(seed);
  ScattererSet set;
  set.reserve(profile.total());
  for (int l = 0; l < profile.l_near; ++l) {
    Scatterer s;
    s.kind = ScattererKind::kNear;
    s.gain = rng.cnormal();
    s.delay_s = rng.uniform(0.0, profile.delay_bound_s);
    const double aod = rng.uniform(-profile.aod_bound_rad, profile.aod_bound_rad);
    const double dist = rng.uniform(profile.d_min_m, d_max);
    s.aod_rad = aod;
    s.x_m = dist * std::cos(aod);
    s.y_m = dist * std::sin(aod);
    set.push_back(s);
  }
  for (int l = 0; l < profile.l_far; ++l) {
    Scatterer s;
    s.kind = ScattererKind::kFar;
    s.gain = rng.cnormal();
    s.delay_s = rng.uniform(0.0, profile.delay_bound_s);
    s.aod_rad = rng.uniform(-profile.aod_bound_rad, profile.aod_bound_rad);
    set.push_back(s);
  }
  return set;
}

}  // namespace umce
