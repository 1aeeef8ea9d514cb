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

#include <vector>

#include "umce/lamp.hpp"
#include "umce/types.hpp"

namespace umce::detail {

// Everything the reverse pass needs from one unrolled layer.
struct LampLayerCache {
  CMat v_prev;   // residual entering the layer, G x K
  CMat htil;     // matched-filter output, V x K
  CMat hhat;     // shrinkage output, V x K
  RVec s2_raw;   // ||v_prev[:,k]||^2 / G
  RVec s2;       // floored
  RVec wiener;   // eps / (eps + s2)
  RVec p;        // eps / (s2 * (s2 + eps))
  RVec phi;      // per-row activity, length V
  double lc = 0.0;
  double phi_sum = 0.0;
  RVec bbar;     // Onsager row before g_t, length K
  CVec b_vec;    // after g_t
};

struct LampForwardCache {
  std::vector<LampLayerCache> layers;
  CMat h_final;  // V x K; zero when no layers run
};

LampForwardCache lamp_forward_cached(const CMat& y, const std::vector<CMat>& a,
                                     const LampParams& params, int layers);

}  // namespace umce::detail
