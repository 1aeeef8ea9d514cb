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
#include <utility>
#include <vector>

#include "umce/frontend.hpp"
#include "umce/geometry.hpp"
#include "umce/types.hpp"

namespace umce {

// Frequency-dependent DFT-based redundant dictionary. Column v (0-based) of
// D[k] is the far-field steering vector at virtual angle
//   sin(aod) = wrap(2*v / (rho*N_AP))  in [-1, 1),
// evaluated with the wavelength of subcarrier k, so the same physical angle
// indexes the same column on every subcarrier. With rho = 1 at the center
// subcarrier the columns form the unitary DFT basis (scaled by sqrt(N_AP)).
struct DftWrd {
  int rho = 1;
  int n_ap = 0;
  std::vector<CMat> d;  // K matrices, N_AP x rho*N_AP

  int columns() const { return rho * n_ap; }
  /// Virtual angle (sin of the AoD) of column v, 0-based.
  double grid_sin(int v) const;
};

DftWrd build_dft_wrd(const ArrayGeometry& geometry, int rho);

// Dictionary whose columns are near-field steering vectors at trainable
// AoD-distance pairs (d_v, phi_v); column v at subcarrier k is the steering
// vector of the point (d_v*cos(phi_v), d_v*sin(phi_v)). Every entry is a
// smooth function of the grid, which is what the LAMP trainer differentiates.
struct LearnableWrd {
  RVec distances;  // c_d, length V, positive
  RVec angles;     // c_phi, length V, in (-pi/2, pi/2)
  std::vector<CMat> d;  // K matrices, N_AP x V

  int columns() const { return static_cast<int>(distances.size()); }
};

LearnableWrd build_learnable_wrd(const ArrayGeometry& geometry,
                                 const RVec& distances, const RVec& angles);

/// Random initial grid: angles ~ U(-pi/2, pi/2), distances log-uniform in
/// [d_min, 2 * rayleigh_distance]. Deterministic per seed.
std::pair<RVec, RVec> init_learnable_grid(const ArrayGeometry& geometry, int v,
                                          std::uint64_t seed, double d_min = 1.0);

/// 0-based index of the center subcarrier used by the frequency-flat mode.
int center_subcarrier_index(int n_subcarriers);

/// Frequency-flat baseline: every subcarrier reuses the center-subcarrier
/// dictionary (the conventional frequency-independent codebook).
std::vector<CMat> frequency_flat(const std::vector<CMat>& d);

// Per-subcarrier measurement matrices A[k] = S[k] * D[k].
struct MeasurementSet {
  std::vector<CMat> a;  // K matrices, G x V
  int g = 0;
  int v = 0;
};

MeasurementSet assemble_measurements(const PilotBlock& pilots,
                                     const std::vector<CMat>& dictionary);

/// JSON document {version, V, distances[], angles_rad[]} for grid reuse.
std::string grid_to_json(const RVec& distances, const RVec& angles);
std::pair<RVec, RVec> grid_from_json(const std::string& text);

}  // namespace umce
