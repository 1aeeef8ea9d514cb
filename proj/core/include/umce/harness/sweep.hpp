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

struct MetricsRecord {
  std::string estimator;
  std::string dictionary;
  double snr_db = 0.0;
  double bandwidth_hz = 0.0;
  int n_ap = 0;
  int g = 0;
  double nmse_db = 0.0;
  int trials = 0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kMetricsCsvHeader =
    "estimator,dictionary,snr_db,bandwidth_hz,n_ap,g,nmse_db,trials,wall_time_s,seed";

/// Monte-Carlo sweep over every (dictionary, estimator, snr) cell. Trials use
/// counter-derived seeds, run on `config.threads` workers and are reduced in
/// trial order, so the result is independent of the thread count. Cells that
/// fail (for example dimension mismatches) are reported on stderr and
/// skipped; the sweep continues.
std::vector<MetricsRecord> run_sweep(const ExperimentConfig& config);

/// Header row plus one line per record, UTF-8, LF line endings; floating
/// point fields are printed with a fixed format so identical runs produce
/// byte-identical files.
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRecord>& records);

}  // namespace umce
