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

#include "umce/harness/config.hpp"

namespace umce {

struct DatasetSample {
  ScattererSet scatterers;
  CMat h;           // N_AP x K
  CMat y_clean;     // G x K noiseless
  CMat y_impaired;  // G x K after the configured receiver chain
};

struct Dataset {
  std::vector<DatasetSample> samples;
  std::uint64_t pilot_seed = 0;  // one pilot block shared by all samples
};

/// Draw `count` samples: scatterers per the profile, the channel, the
/// noiseless and noisy pilot observations, and the impaired receive chain.
/// Deterministic per (config, seed); every sample is reproducible in
/// isolation through the counter-based seed split.
Dataset generate_dataset(const ExperimentConfig& config, int count,
                         std::uint64_t seed);

/// Persist a dataset directory: manifest.json (with an FNV-1a content hash
/// over the binary payloads), channels.bin, received.bin and quantized.bin
/// (the documented quantized time-domain block format). Returns the content
/// hash.
std::string write_dataset(const std::string& directory, const ExperimentConfig& config,
                          const Dataset& dataset, int count, std::uint64_t seed);

Dataset read_dataset(const std::string& directory);

/// FNV-1a 64-bit over a byte string; used for dataset content hashes.
std::uint64_t fnv1a64(const std::string& bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace umce
