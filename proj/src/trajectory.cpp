// Copyright 2026 the actcodec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "actcodec/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "actcodec/io.hpp"

namespace actcodec {

namespace {
constexpr char kTrajMagic[9] = "ACTRAJ01";
constexpr std::uint32_t kTrajVersion = 1;
}  // namespace

void RawTrajectory::validate() const {
  require(values.rows() >= 1 && values.cols() >= 1, "trajectory must have T >= 1 and D >= 1");
  require(dim_labels.size() == static_cast<std::size_t>(values.cols()),
          "trajectory has " + std::to_string(dim_labels.size()) + " labels for " +
              std::to_string(values.cols()) + " dimensions");
  require(values.allFinite(), "trajectory contains non-finite values");
  require(std::isfinite(frequency_hz) && frequency_hz > 0.0, "frequency must be positive");
}

ActionChunk::ActionChunk(Mat v, std::string tag)
    : values(std::move(v)), valid(static_cast<std::size_t>(values.rows()), 1),
      embodiment_tag(std::move(tag)) {}

std::size_t ActionChunk::valid_rows() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

double percentile_sorted(std::span<const double> sorted, double q) {
  require(!sorted.empty(), "percentile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

NormalizationStats fit_normalizer(std::span<const RawTrajectory> corpus, double q_low,
                                  double q_high) {
  require(!corpus.empty(), "cannot fit normalizer on an empty corpus");
  const Eigen::Index dims = corpus.front().dims();
  for (const auto& t : corpus) {
    require(t.dims() == dims, "dimension mismatch in normalization corpus: expected " +
                                  std::to_string(dims) + ", got " + std::to_string(t.dims()));
    require(t.values.allFinite(), "non-finite value in normalization corpus");
  }
  NormalizationStats stats;
  std::vector<double> pool;
  for (Eigen::Index d = 0; d < dims; ++d) {
    pool.clear();
    for (const auto& t : corpus) {
      for (Eigen::Index r = 0; r < t.steps(); ++r) pool.push_back(t.values(r, d));
    }
    std::sort(pool.begin(), pool.end());
    stats.q_low.push_back(percentile_sorted(pool, q_low));
    stats.q_high.push_back(percentile_sorted(pool, q_high));
  }
  return stats;
}

std::map<std::string, NormalizationStats> fit_normalizer_per_embodiment(
    std::span<const RawTrajectory> corpus) {
  std::map<std::string, std::vector<RawTrajectory>> by_tag;
  for (const auto& t : corpus) by_tag[t.embodiment_tag].push_back(t);
  std::map<std::string, NormalizationStats> out;
  for (const auto& [tag, trajs] : by_tag) out[tag] = fit_normalizer(trajs);
  return out;
}

RawTrajectory normalize(const RawTrajectory& traj, const NormalizationStats& stats) {
  require(static_cast<std::size_t>(traj.dims()) == stats.dims(),
          "normalization stats have " + std::to_string(stats.dims()) +
              " dimensions, trajectory has " + std::to_string(traj.dims()));
  RawTrajectory out = traj;
  for (Eigen::Index d = 0; d < traj.dims(); ++d) {
    const double lo = stats.q_low[d];
    const double span = stats.q_high[d] - lo;
    for (Eigen::Index r = 0; r < traj.steps(); ++r) {
      if (span <= 0.0) {
        out.values(r, d) = 0.0;
        continue;
      }
      const double v = 2.0 * (traj.values(r, d) - lo) / span - 1.0;
      out.values(r, d) = std::clamp(v, -1.0, 1.0);
    }
  }
  return out;
}

RawTrajectory denormalize(const RawTrajectory& traj, const NormalizationStats& stats) {
  require(static_cast<std::size_t>(traj.dims()) == stats.dims(), "denormalize: dimension mismatch");
  RawTrajectory out = traj;
  for (Eigen::Index d = 0; d < traj.dims(); ++d) {
    const double lo = stats.q_low[d];
    const double span = stats.q_high[d] - lo;
    for (Eigen::Index r = 0; r < traj.steps(); ++r) {
      out.values(r, d) = span <= 0.0 ? lo : lo + (traj.values(r, d) + 1.0) * 0.5 * span;
    }
  }
  return out;
}

std::vector<ActionChunk> chunk(const RawTrajectory& traj, const ChunkOptions& opts) {
  require(opts.horizon >= 1, "chunk horizon must be >= 1");
  require(opts.stride >= 1, "chunk stride must be >= 1");
  require(traj.steps() >= 1, "cannot chunk an empty trajectory");
  const Eigen::Index steps = traj.steps();
  const Eigen::Index h = opts.horizon;
  std::vector<ActionChunk> out;
  for (Eigen::Index t = 0; t < steps; t += opts.stride) {
    const Eigen::Index real = std::min(h, steps - t);
    if (real < h && !opts.pad_tail) break;
    ActionChunk c(Mat::Zero(h, traj.dims()), traj.embodiment_tag);
    c.values.topRows(real) = traj.values.middleRows(t, real);
    for (Eigen::Index r = real; r < h; ++r) c.valid[static_cast<std::size_t>(r)] = 0;
    out.push_back(std::move(c));
  }
  return out;
}

SynthProfile parse_profile(const std::string& name) {
  if (name == "smooth") return SynthProfile::kSmooth;
  if (name == "piecewise") return SynthProfile::kPiecewise;
  if (name == "gripper-binary") return SynthProfile::kGripperBinary;
  throw InputError("unknown synthetic profile '" + name + "'");
}

std::string profile_name(SynthProfile p) {
  switch (p) {
    case SynthProfile::kSmooth: return "smooth";
    case SynthProfile::kPiecewise: return "piecewise";
    case SynthProfile::kGripperBinary: return "gripper-binary";
  }
  return "smooth";
}

namespace {

// Smooth profile: offset plus two sinusoids, each below kMaxCycles cycles
// per chunk.
constexpr double kOffset = 0.4;
constexpr double kMaxAmplitude = 0.3;
constexpr double kMinCycles = 0.05;
constexpr double kMaxCycles = 0.5;
constexpr int kComponents = 2;

void fill_smooth(std::mt19937_64& rng, Mat& values, Eigen::Index col) {
  const auto h = static_cast<double>(values.rows());
  const double offset = uniform(rng, -kOffset, kOffset);
  double amp[kComponents], freq[kComponents], phase[kComponents];
  for (int k = 0; k < kComponents; ++k) {
    amp[k] = uniform(rng, 0.0, kMaxAmplitude);
    freq[k] = uniform(rng, kMinCycles, kMaxCycles);
    phase[k] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  }
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    double v = offset;
    for (int k = 0; k < kComponents; ++k) {
      v += amp[k] * std::sin(2.0 * std::numbers::pi * freq[k] * static_cast<double>(t) / h + phase[k]);
    }
    values(t, col) = std::clamp(v, -1.0, 1.0);
  }
}

void fill_piecewise(std::mt19937_64& rng, Mat& values, Eigen::Index col) {
  const Eigen::Index h = values.rows();
  const int segments = 1 + static_cast<int>(uniform_index(rng, 3));
  double level = uniform(rng, -0.8, 0.8);
  std::vector<Eigen::Index> switches;
  for (int s = 1; s < segments; ++s) switches.push_back(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(h))));
  std::sort(switches.begin(), switches.end());
  std::size_t next = 0;
  double target = level;
  double ramp_step = 0.0;
  for (Eigen::Index t = 0; t < h; ++t) {
    while (next < switches.size() && switches[next] == t) {
      target = uniform(rng, -0.8, 0.8);
      const int ramp_len = 2 + static_cast<int>(uniform_index(rng, 4));
      ramp_step = (target - level) / ramp_len;
      ++next;
    }
    if (ramp_step != 0.0) {
      level += ramp_step;
      if ((ramp_step > 0.0 && level >= target) || (ramp_step < 0.0 && level <= target)) {
        level = target;
        ramp_step = 0.0;
      }
    }
    values(t, col) = level;
  }
}

void fill_gripper(std::mt19937_64& rng, Mat& values, Eigen::Index col) {
  constexpr double kToggleProb = 0.02;
  double state = uniform01(rng) < 0.5 ? -1.0 : 1.0;
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    if (t > 0 && uniform01(rng) < kToggleProb) state = -state;
    values(t, col) = state;
  }
}

}  // namespace

double smooth_profile_step_bound(int horizon) {
  // |sin(x + dx) - sin(x)| <= |dx|; clipping only shrinks differences.
  return kComponents * kMaxAmplitude * 2.0 * std::numbers::pi * kMaxCycles / horizon;
}

std::vector<ActionChunk> synth_corpus(const SynthOptions& opts) {
  require(opts.count >= 1, "synth_corpus needs count >= 1");
  require(opts.horizon >= 1 && opts.dims >= 1, "synth_corpus needs positive shape");
  std::vector<ActionChunk> out;
  out.reserve(static_cast<std::size_t>(opts.count));
  for (int i = 0; i < opts.count; ++i) {
    auto rng = make_rng(opts.seed, static_cast<std::uint64_t>(opts.profile), static_cast<std::uint64_t>(i));
    Mat v(opts.horizon, opts.dims);
    for (Eigen::Index d = 0; d < opts.dims; ++d) {
      const bool gripper = opts.profile == SynthProfile::kGripperBinary && d == opts.dims - 1;
      if (gripper) {
        fill_gripper(rng, v, d);
      } else if (opts.profile == SynthProfile::kPiecewise) {
        fill_piecewise(rng, v, d);
      } else {
        fill_smooth(rng, v, d);
      }
    }
    out.emplace_back(std::move(v), opts.embodiment_tag);
  }
  return out;
}

RawTrajectory chunk_as_trajectory(const ActionChunk& c, double frequency_hz) {
  RawTrajectory t;
  t.values = c.values;
  t.frequency_hz = frequency_hz;
  t.embodiment_tag = c.embodiment_tag;
  for (Eigen::Index d = 0; d < c.dims(); ++d) t.dim_labels.push_back("dim" + std::to_string(d));
  return t;
}

void write_trajectories(const std::filesystem::path& path, std::span<const RawTrajectory> trajs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeFailure("cannot open " + path.string() + " for writing");
  io::write_magic(os, kTrajMagic);
  io::write_u32(os, kTrajVersion);
  io::write_u32(os, static_cast<std::uint32_t>(trajs.size()));
  for (const auto& t : trajs) {
    t.validate();
    io::write_u32(os, static_cast<std::uint32_t>(t.dims()));
    io::write_u32(os, static_cast<std::uint32_t>(t.steps()));
    io::write_f64(os, t.frequency_hz);
    io::write_string(os, t.embodiment_tag);
    for (const auto& l : t.dim_labels) io::write_string(os, l);
    for (Eigen::Index r = 0; r < t.steps(); ++r) {
      for (Eigen::Index d = 0; d < t.dims(); ++d) io::write_f32(os, static_cast<float>(t.values(r, d)));
    }
  }
  if (!os) throw RuntimeFailure("failed writing " + path.string());
}

std::vector<RawTrajectory> read_trajectories(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open trajectory file " + path.string());
  io::expect_magic(is, kTrajMagic, "trajectory container");
  const std::uint32_t version = io::read_u32(is);
  require(version == kTrajVersion, "unsupported trajectory container version " + std::to_string(version));
  const std::uint32_t n = io::read_u32(is);
  std::vector<RawTrajectory> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    RawTrajectory t;
    const std::uint32_t dims = io::read_u32(is);
    const std::uint32_t steps = io::read_u32(is);
    require(dims >= 1 && steps >= 1 && static_cast<std::uint64_t>(dims) * steps < (1ull << 30),
            "record " + std::to_string(i) + " has invalid shape");
    t.frequency_hz = io::read_f64(is);
    t.embodiment_tag = io::read_string(is);
    for (std::uint32_t d = 0; d < dims; ++d) t.dim_labels.push_back(io::read_string(is));
    t.values.resize(steps, dims);
    for (std::uint32_t r = 0; r < steps; ++r) {
      for (std::uint32_t d = 0; d < dims; ++d) t.values(r, d) = io::read_f32(is);
    }
    t.validate();
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    ManifestEntry e;
    std::string p;
    if (!(ls >> p)) continue;
    ls >> e.embodiment_tag;
    e.path = p;
    if (e.path.is_relative()) e.path = path.parent_path() / e.path;
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  std::ofstream os(path);
  if (!os) throw RuntimeFailure("cannot open " + path.string() + " for writing");
  os << "# actcodec dataset manifest: <container path> <embodiment tag>\n";
  for (const auto& e : entries) os << e.path.string() << ' ' << e.embodiment_tag << '\n';
}

std::vector<RawTrajectory> load_manifest(const std::filesystem::path& path) {
  std::vector<RawTrajectory> out;
  for (const auto& e : read_manifest(path)) {
    for (auto& t : read_trajectories(e.path)) {
      if (!e.embodiment_tag.empty()) t.embodiment_tag = e.embodiment_tag;
      out.push_back(std::move(t));
    }
  }
  return out;
}

void write_norm_stats(const std::filesystem::path& path,
                      const std::map<std::string, NormalizationStats>& stats) {
  std::ofstream os(path);
  if (!os) throw RuntimeFailure("cannot open " + path.string() + " for writing");
  os << "# actcodec normalization stats v1\n";
  os.precision(17);
  for (const auto& [tag, s] : stats) {
    os << "embodiment " << (tag.empty() ? "-" : tag) << ' ' << s.dims() << '\n';
    for (std::size_t d = 0; d < s.dims(); ++d) os << s.q_low[d] << ' ' << s.q_high[d] << '\n';
  }
}

std::map<std::string, NormalizationStats> read_norm_stats(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open normalization stats " + path.string());
  std::map<std::string, NormalizationStats> out;
  std::string word;
  while (is >> word) {
    if (word.starts_with('#')) {
      std::string rest;
      std::getline(is, rest);
      continue;
    }
    require(word == "embodiment", "malformed normalization stats file");
    std::string tag;
    std::size_t dims = 0;
    require(static_cast<bool>(is >> tag >> dims), "malformed normalization stats header");
    if (tag == "-") tag.clear();
    NormalizationStats s;
    for (std::size_t d = 0; d < dims; ++d) {
      double lo = 0, hi = 0;
      require(static_cast<bool>(is >> lo >> hi), "truncated normalization stats");
      require(lo <= hi, "normalization stats with q_low > q_high");
      s.q_low.push_back(lo);
      s.q_high.push_back(hi);
    }
    out[tag] = std::move(s);
  }
  return out;
}

const NormalizationStats& stats_for(const std::map<std::string, NormalizationStats>& stats, const std::string& tag) {
  if (auto it = stats.find(tag); it != stats.end()) return it->second;
  if (auto it = stats.find(""); it != stats.end()) return it->second;
  throw InputError("no normalization stats for embodiment '" + tag + "' and no global entry");
}

std::vector<ActionChunk> prepare_chunks(std::span<const RawTrajectory> trajs, const ChunkOptions& opts,
                                        const std::map<std::string, NormalizationStats>* stats) {
  std::vector<ActionChunk> out;
  for (const auto& t : trajs) {
    const RawTrajectory n = stats ? normalize(t, stats_for(*stats, t.embodiment_tag)) : t;
    for (auto& c : chunk(n, opts)) out.push_back(std::move(c));
  }
  return out;
}

std::vector<RawTrajectory> load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open data file " + path.string());
  char magic[8] = {};
  is.read(magic, 8);
  if (is.gcount() == 8 && std::string(magic, 8) == std::string(kTrajMagic, 8)) return read_trajectories(path);
  return load_manifest(path);
}

}  // namespace actcodec
