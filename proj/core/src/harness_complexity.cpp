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

#include "umce/harness/complexity.hpp"

#include <cstdio>
#include <ostream>

namespace umce {

std::vector<ComplexityRow> complexity_report(const ComplexityDims& d) {
  std::vector<ComplexityRow> rows;

  const double i = d.somp_layers;
  const double somp = d.g * d.v * d.k * i + 0.25 * i * i * (i + 1) * (i + 1) +
                      d.g * i * (i + 1) * (2 * i + 1) / 3.0 +
                      0.5 * d.g * d.k * i * (i + 1) + d.v * d.k * i;
  rows.push_back({"somp", somp, d.g * d.v * d.k * i});

  const double front = d.g * d.n_ap * d.k;
  const double amp = d.g * d.v * d.k * d.amp_iterations + front;
  rows.push_back({"mmv_amp", amp, d.g * d.v * d.k * d.amp_iterations});
  rows.push_back({"gmmv_amp", amp, d.g * d.v * d.k * d.amp_iterations});

  const double lamp = (d.g * d.v * d.k + d.k * d.k) * d.lamp_layers + front;
  rows.push_back({"gmmv_lamp", lamp, d.g * d.v * d.k * d.lamp_layers});

  return rows;
}

ComplexityDims dims_from_config(const ExperimentConfig& config) {
  ComplexityDims d;
  d.g = config.pilots.g;
  d.k = config.geometry.n_subcarriers;
  d.n_ap = config.geometry.n_ap;

  // Dictionary size from the first configured dictionary.
  const DictionaryConfig& dict = config.dictionaries.front();
  d.v = dict.type == DictionaryType::kLearnable
            ? dict.v
            : static_cast<double>(dict.rho) * config.geometry.n_ap;

  d.somp_layers = config.scatterers.total();
  for (const EstimatorConfig& e : config.estimators) {
    if (e.type == EstimatorType::kGmmvAmp) d.amp_iterations = e.iterations;
    if (e.type == EstimatorType::kGmmvLamp) d.lamp_layers = e.layers;
    if (e.type == EstimatorType::kSomp && e.sparsity > 0) d.somp_layers = e.sparsity;
  }
  return d;
}

void print_complexity(std::ostream& out, const std::vector<ComplexityRow>& rows) {
  out << "scheme,operations,dominant_term\n";
  char line[160];
  for (const ComplexityRow& r : rows) {
    std::snprintf(line, sizeof(line), "%s,%.0f,%.0f", r.scheme.c_str(), r.operations,
                  r.dominant_term);
    out << line << "\n";
  }
}

}  // namespace umce
