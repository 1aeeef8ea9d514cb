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

#include "umce/harness/dataset.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "umce/rng.hpp"

namespace umce {

namespace {

// Seed streams for the per-sample split.
constexpr std::uint64_t kStreamScatter = 1;
constexpr std::uint64_t kStreamNoise = 3;
constexpr std::uint64_t kStreamPilots = 0x504C54;

constexpr std::uint32_t kChannelsMagic = 0x48434D55u;  // "UMCH"
constexpr std::uint32_t kReceivedMagic = 0x52434D55u;  // "UMCR"
constexpr std::uint32_t kBinVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("dataset: truncated binary");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("dataset: truncated binary");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_cmat(std::ostream& out, const CMat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      put_f64(out, m(i, j).real());
      put_f64(out, m(i, j).imag());
    }
}

CMat get_cmat(std::istream& in, int rows, int cols) {
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double re = get_f64(in);
      const double im = get_f64(in);
      m(i, j) = cxd(re, im);
    }
  return m;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Dataset generate_dataset(const ExperimentConfig& config, int count,
                         std::uint64_t seed) {
  config.validate();
  if (count < 1) throw std::invalid_argument("generate_dataset: count must be >= 1");

  Dataset out;
  out.pilot_seed = derive_seed(seed, kStreamPilots, 0);
  const PilotBlock pilots = gen_pilots(config.geometry, config.pilots.g,
                                       config.pilots.n_rf, out.pilot_seed);
  out.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    DatasetSample sample;
    sample.scatterers = sample_scatterers(
        config.geometry, config.scatterers,
        derive_seed(seed, kStreamScatter, static_cast<std::uint64_t>(i)));
    ChannelRealization ch = channel_matrix(config.geometry, sample.scatterers);
    const RxBlocks rx =
        simulate_rx(ch.h, pilots, config.dataset_snr_db,
                    derive_seed(seed, kStreamNoise, static_cast<std::uint64_t>(i)));
    sample.h = std::move(ch.h);
    sample.y_clean = rx.clean;
    sample.y_impaired =
        receiver_frontend(rx.noisy, config.quantizer, rx.noise_power).freq;
    out.samples.push_back(std::move(sample));
  }
  return out;
}

std::string write_dataset(const std::string& directory, const ExperimentConfig& config,
                          const Dataset& dataset, int count, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);
  const int n = config.geometry.n_ap;
  const int kk = config.geometry.n_subcarriers;
  const int g = config.pilots.g;

  {
    std::ofstream out(dir / "channels.bin", std::ios::binary);
    if (!out) throw std::runtime_error("dataset: cannot write channels.bin");
    put_u32(out, kChannelsMagic);
    put_u32(out, kBinVersion);
    put_u32(out, static_cast<std::uint32_t>(n));
    put_u32(out, static_cast<std::uint32_t>(kk));
    put_u32(out, static_cast<std::uint32_t>(dataset.samples.size()));
    for (const DatasetSample& s : dataset.samples) {
      put_u32(out, static_cast<std::uint32_t>(s.scatterers.size()));
      for (const Scatterer& sc : s.scatterers) {
        put_u32(out, sc.kind == ScattererKind::kNear ? 1u : 0u);
        put_f64(out, sc.gain.real());
        put_f64(out, sc.gain.imag());
        put_f64(out, sc.delay_s);
        put_f64(out, sc.aod_rad);
        put_f64(out, sc.x_m);
        put_f64(out, sc.y_m);
      }
      put_cmat(out, s.h);
    }
  }
  {
    std::ofstream out(dir / "received.bin", std::ios::binary);
    if (!out) throw std::runtime_error("dataset: cannot write received.bin");
    put_u32(out, kReceivedMagic);
    put_u32(out, kBinVersion);
    put_u32(out, static_cast<std::uint32_t>(g));
    put_u32(out, static_cast<std::uint32_t>(kk));
    put_u32(out, static_cast<std::uint32_t>(dataset.samples.size()));
    for (const DatasetSample& s : dataset.samples) {
      put_cmat(out, s.y_clean);
      put_cmat(out, s.y_impaired);
    }
  }
  {
    // Re-run the front end to export the raw quantized time-domain blocks in
    // the documented interchange format.
    std::ofstream out(dir / "quantized.bin", std::ios::binary);
    if (!out) throw std::runtime_error("dataset: cannot write quantized.bin");
    QuantizedBlobHeader header;
    header.n_ap = static_cast<std::uint32_t>(n);
    header.k = static_cast<std::uint32_t>(kk);
    header.g = static_cast<std::uint32_t>(g);
    header.w = static_cast<std::uint32_t>(config.quantizer.oversampling);
    header.q_bits = config.quantizer.bits == kInfiniteBits
                        ? 0xFFFFFFFFu
                        : static_cast<std::uint32_t>(config.quantizer.bits);
    const PilotBlock pilots =
        gen_pilots(config.geometry, g, config.pilots.n_rf, dataset.pilot_seed);
    std::vector<std::vector<CMat>> blocks;
    blocks.reserve(dataset.samples.size());
    std::size_t i = 0;
    for (const DatasetSample& s : dataset.samples) {
      const RxBlocks rx =
          simulate_rx(s.h, pilots, config.dataset_snr_db,
                      derive_seed(seed, kStreamNoise, static_cast<std::uint64_t>(i)));
      blocks.push_back(
          receiver_frontend(rx.noisy, config.quantizer, rx.noise_power).time_quantized);
      ++i;
    }
    write_quantized_blocks(out, header, blocks);
  }

  std::uint64_t hash = fnv1a64(read_file(dir / "channels.bin"));
  hash = fnv1a64(read_file(dir / "received.bin"), hash);
  hash = fnv1a64(read_file(dir / "quantized.bin"), hash);
  std::ostringstream hash_hex;
  hash_hex << std::hex << hash;

  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["count"] = count;
  manifest["seed"] = seed;
  manifest["pilot_seed"] = dataset.pilot_seed;
  manifest["content_hash"] = hash_hex.str();
  manifest["config"] = nlohmann::json::parse(config_to_json(config));
  manifest["files"] = {{"channels", "channels.bin"},
                       {"received", "received.bin"},
                       {"quantized", "quantized.bin"}};
  std::ofstream mf(dir / "manifest.json");
  if (!mf) throw std::runtime_error("dataset: cannot write manifest.json");
  mf << manifest.dump(2) << "\n";
  return hash_hex.str();
}

Dataset read_dataset(const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  const nlohmann::json manifest =
      nlohmann::json::parse(read_file(dir / "manifest.json"));
  Dataset out;
  out.pilot_seed = manifest.at("pilot_seed").get<std::uint64_t>();

  std::ifstream ch(dir / "channels.bin", std::ios::binary);
  if (!ch) throw std::runtime_error("dataset: cannot open channels.bin");
  if (get_u32(ch) != kChannelsMagic) throw std::runtime_error("dataset: bad channels magic");
  if (get_u32(ch) != kBinVersion) throw std::runtime_error("dataset: bad channels version");
  const int n = static_cast<int>(get_u32(ch));
  const int kk = static_cast<int>(get_u32(ch));
  const int count = static_cast<int>(get_u32(ch));

  std::ifstream rc(dir / "received.bin", std::ios::binary);
  if (!rc) throw std::runtime_error("dataset: cannot open received.bin");
  if (get_u32(rc) != kReceivedMagic) throw std::runtime_error("dataset: bad received magic");
  if (get_u32(rc) != kBinVersion) throw std::runtime_error("dataset: bad received version");
  const int g = static_cast<int>(get_u32(rc));
  const int kk2 = static_cast<int>(get_u32(rc));
  const int count2 = static_cast<int>(get_u32(rc));
  if (kk2 != kk || count2 != count) {
    throw std::runtime_error("dataset: channels/received disagree");
  }

  out.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    DatasetSample s;
    const int l = static_cast<int>(get_u32(ch));
    s.scatterers.reserve(l);
    for (int j = 0; j < l; ++j) {
      Scatterer sc;
      sc.kind = get_u32(ch) == 1u ? ScattererKind::kNear : ScattererKind::kFar;
      const double re = get_f64(ch);
      const double im = get_f64(ch);
      sc.gain = cxd(re, im);
      sc.delay_s = get_f64(ch);
      sc.aod_rad = get_f64(ch);
      sc.x_m = get_f64(ch);
      sc.y_m = get_f64(ch);
      s.scatterers.push_back(sc);
    }
    s.h = get_cmat(ch, n, kk);
    s.y_clean = get_cmat(rc, g, kk);
    s.y_impaired = get_cmat(rc, g, kk);
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace umce
