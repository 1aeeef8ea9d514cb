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

#include <iosfwd>
#include <string>
#include <vector>

#include "umce/harness/config.hpp"

namespace umce {

struct ComplexityDims {
  double g = 32;
  double v = 512;
  double k = 64;
  double n_ap = 128;
  double lamp_layers = 5;     // T
  double amp_iterations = 80; // T_0
  double somp_layers = 6;     // I
};

struct ComplexityRow {
  std::string scheme;
  double operations = 0.0;
  double dominant_term = 0.0;
};

/// Closed-form operation counts per estimator:
///   SOMP(I):      G*V*K*I + I^2(I+1)^2/4 + G*I(I+1)(2I+1)/3 + G*K*I(I+1)/2 + V*K*I
///   MMV-AMP(T0):  G*V*K*T0 + G*N_AP*K
///   GMMV-AMP(T0): G*V*K*T0 + G*N_AP*K
///   GMMV-LAMP(T): (G*V*K + K^2)*T + G*N_AP*K
std::vector<ComplexityRow> complexity_report(const ComplexityDims& dims);

ComplexityDims dims_from_config(const ExperimentConfig& config);

void print_complexity(std::ostream& out, const std::vector<ComplexityRow>& rows);

}  // namespace umce
