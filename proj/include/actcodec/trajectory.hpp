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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "actcodec/common.hpp"

namespace actcodec {

/// A recorded action stream, T rows by D columns, in physical units.
struct RawTrajectory {
  Mat values;
  std::vector<std::string> dim_labels;
  double frequency_hz = 1.0;
  std::string embodiment_tag;

  Eigen::Index steps() const { return values.rows(); }
  Eigen::Index dims() const { return values.cols(); }
  /// Throws InputError on empty shape, label count mismatch, non-finite values
  /// or non-positive frequency.
  void validate() const;
};

/// Per-dimension 1st / 99th percentile bounds.
struct NormalizationStats {
  std::vector<double> q_low;
  std::vector<double> q_high;

  std::size_t dims() const { return q_low.size(); }
};

/// One fixed-horizon window in normalized space. `valid[t] == 0` marks a
/// zero-padded tail row that must be excluded from losses and metrics.
struct ActionChunk {
  Mat values;
  std::vector<std::uint8_t> valid;
  std::string embodiment_tag;

  ActionChunk() = default;
  ActionChunk(Mat v, std::string tag = {});

  Eigen::Index horizon() const { return values.rows(); }
  Eigen::Index dims() const { return values.cols(); }
  std::size_t valid_rows() const;
};

/// Linear-interpolation percentile over an ascending-sorted sample,
/// q in [0, 1], position q * (n - 1).
double percentile_sorted(std::span<const double> sorted, double q);

NormalizationStats fit_normalizer(std::span<const RawTrajectory> corpus,
                                  double q_low = 0.01, double q_high = 0.99);

/// Fits one NormalizationStats per embodiment tag.
std::map<std::string, NormalizationStats> fit_normalizer_per_embodiment(
    std::span<const RawTrajectory> corpus);

RawTrajectory normalize(const RawTrajectory& traj, const NormalizationStats& stats);
RawTrajectory denormalize(const RawTrajectory& traj, const NormalizationStats& stats);

struct ChunkOptions {
  int horizon = 20;
  int stride = 20;
  bool pad_tail = true;
};

/// Windows [t, t + H) for t = 0, stride, 2*stride, ... < T. Windows running
/// past the end are zero-padded (or dropped when pad_tail is false).
std::vector<ActionChunk> chunk(const RawTrajectory& traj, const ChunkOptions& opts);

enum class SynthProfile { kSmooth, kPiecewise, kGripperBinary };

SynthProfile parse_profile(const std::string& name);
std::string profile_name(SynthProfile p);

struct SynthOptions {
  std::uint64_t seed = 0;
  int count = 1;
  int horizon = 20;
  int dims = 7;
  SynthProfile profile = SynthProfile::kSmooth;
  std::string embodiment_tag = "synthetic";
};

/// Bound on max |a[t+1] - a[t]| for every chunk of the smooth profile.
double smooth_profile_step_bound(int horizon);

/// Deterministic synthetic chunks in normalized space. For the
/// gripper-binary profile the last dimension is the gripper.
std::vector<ActionChunk> synth_corpus(const SynthOptions& opts);

/// Wraps a chunk as a single trajectory record (used by the CLI and tests).
RawTrajectory chunk_as_trajectory(const ActionChunk& c, double frequency_hz = 20.0);

// Trajectory container: magic "ACTRAJ01", u32 version, u32 record count, then
// per record: u32 D, u32 T, f64 frequency, string embodiment, D label strings,
// T*D row-major little-endian f32 values.
void write_trajectories(const std::filesystem::path& path, std::span<const RawTrajectory> trajs);
std::vector<RawTrajectory> read_trajectories(const std::filesystem::path& path);

struct ManifestEntry {
  std::filesystem::path path;
  std::string embodiment_tag;
};

/// Plain-text manifest: one "path [embodiment]" per line, '#' comments.
/// Relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

/// Loads every container listed in the manifest; the manifest tag overrides
/// the per-record embodiment when present.
std::vector<RawTrajectory> load_manifest(const std::filesystem::path& path);

void write_norm_stats(const std::filesystem::path& path,
                      const std::map<std::string, NormalizationStats>& stats);
std::map<std::string, NormalizationStats> read_norm_stats(const std::filesystem::path& path);

/// Stats for `tag`, falling back to the global entry (empty tag).
const NormalizationStats& stats_for(const std::map<std::string, NormalizationStats>& stats, const std::string& tag);

/// Normalizes (when `stats` is non-null) and chunks every trajectory.
std::vector<ActionChunk> prepare_chunks(std::span<const RawTrajectory> trajs, const ChunkOptions& opts,
                                        const std::map<std::string, NormalizationStats>* stats);

/// Reads a trajectory container, or a manifest when the file lacks the
/// container magic.
std::vector<RawTrajectory> load_dataset(const std::filesystem::path& path);

}  // namespace actcodec
