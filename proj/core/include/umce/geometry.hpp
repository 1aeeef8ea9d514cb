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

#include "umce/types.hpp"

namespace umce {

// Uniform linear array on the y axis, centered at the origin. Antenna i
// (1-based) sits at (0, -lambda_c/4 + (i - N_AP/2) * lambda_c/2), so the
// aperture is symmetric about y = 0 and the spacing is exactly half the
// carrier wavelength.
struct ArrayGeometry {
  int n_ap = 128;               // antenna count, >= 2
  double carrier_freq_hz = 70e9;
  double bandwidth_hz = 10e9;
  int n_subcarriers = 64;

  double carrier_wavelength_m() const { return kSpeedOfLight / carrier_freq_hz; }
  double antenna_spacing_m() const { return carrier_wavelength_m() / 2.0; }

  /// y coordinate of antenna i, 1-based. The x coordinate is always 0.
  double antenna_y_m(int i) const {
    const double lc = carrier_wavelength_m();
    return -lc / 4.0 + (static_cast<double>(i) - n_ap / 2.0) * lc / 2.0;
  }

  /// Throws std::invalid_argument if any field is out of range.
  void validate() const;
};

enum class ScattererKind { kFar, kNear };

struct Scatterer {
  cxd gain;            // beta_l
  double delay_s = 0;  // tau_l >= 0
  ScattererKind kind = ScattererKind::kFar;
  double aod_rad = 0;  // far field only
  double x_m = 0;      // near field only, x > 0
  double y_m = 0;

  double distance_m() const;  // near field: distance from the array center
};

using ScattererSet = std::vector<Scatterer>;

struct ChannelRealization {
  CMat h;  // N_AP x K frequency-domain downlink channel
  ScattererSet scatterers;
};

// Sampling policy for random channel realizations (section-IV style
// datasets). Counts select purely far, purely near, or hybrid draws.
struct ScattererProfile {
  int l_far = 3;
  int l_near = 3;
  double delay_bound_s = 6.4e-9;
  double aod_bound_rad = kPi / 3.0;
  double d_min_m = 1.0;       // Fresnel-region floor for near scatterers
  double max_distance_m = 0;  // 0: use rayleigh_distance(geometry)

  int total() const { return l_far + l_near; }
};

/// Subcarrier frequency f_k = f_c + (k - (K+1)/2) * f_s / K for k = 1..K.
/// The grid is centered on the carrier so the middle subcarrier of an odd-K
/// system is squint-free. Throws std::out_of_range for invalid k.
double subcarrier_frequency(const ArrayGeometry& geometry, int k);

/// c / f_k. Strictly decreasing in k for nonzero bandwidth.
double subcarrier_wavelength(const ArrayGeometry& geometry, int k);

/// Spherical-wave steering vector for a source at (x, y), subcarrier k.
/// Element i is exp(-j*2*pi*(d_i - d_1)/lambda_k) with d_i the distance to
/// antenna i; the first element is exactly 1. Throws std::domain_error if
/// the position coincides with an antenna or x <= 0.
CVec near_steering(const ArrayGeometry& geometry, double x_m, double y_m, int k);

/// Planar-wave steering vector for departure angle aod (|aod| < pi/2),
/// subcarrier k. Element n is exp(-j*(n-1)*pi*lambda_c*sin(aod)/lambda_k).
CVec far_steering(const ArrayGeometry& geometry, double aod_rad, int k);

/// Same as far_steering but parameterized directly by sin(aod); used by the
/// dictionary grids, where the virtual angle can reach +-1.
CVec far_steering_from_sin(const ArrayGeometry& geometry, double sin_aod, int k);

/// Frequency-domain channel over all subcarriers:
///   h[:,k] = sqrt(1/(L*N_AP)) * sum_l beta_l * exp(-j*2*pi*k*f_s*tau_l/K) * a_l[k]
/// with a_l[k] the near or far steering vector of scatterer l and k 1-based.
/// Throws std::domain_error on an empty scatterer set.
ChannelRealization channel_matrix(const ArrayGeometry& geometry,
                                  const ScattererSet& scatterers);

/// Classical far-field boundary 2*D^2/lambda_c with D = (N_AP-1)*d the full
/// array aperture.
double rayleigh_distance(const ArrayGeometry& geometry);

/// Boundary computed with the half aperture D/2, i.e. a quarter of the
/// classical value. Matches the distances quoted for the 128/256-element
/// setups (about 8.6 m and 35 m at 70 GHz).
double effective_rayleigh_distance(const ArrayGeometry& geometry);

/// Draw a scatterer set: far paths with AoD ~ U(-bound, bound) and
/// delay ~ U(0, delay_bound); near paths additionally draw a distance
/// ~ U(d_min, max_distance) and convert to Cartesian. Deterministic per seed.
ScattererSet sample_scatterers(const ArrayGeometry& geometry,
                               const ScattererProfile& profile,
                               std::uint64_t seed);

}  // namespace umce
