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

#include <string>
#include <vector>

#include "actcodec/common.hpp"
#include "actcodec/trajectory.hpp"

namespace actcodec {

/// Two-dimensional partition plan: time is split uniformly into `time_groups`
/// groups of `group_len` steps; action dimensions are split into
/// `groups.size()` named groups, each zero-padded to `width` slots.
///
/// Patch (i, j) is row i * n + j of the patch matrix. Inside a patch the
/// layout is time-major: slot s * width + k holds timestep i * group_len + s of
/// dimension groups[j][k].
struct PatchSpec {
  int horizon = 0;
  int dims = 0;
  int time_groups = 1;
  int group_len = 0;
  int width = 0;
  std::vector<std::vector<int>> groups;
  std::vector<std::string> group_names;

  int n_groups() const { return static_cast<int>(groups.size()); }
  int patch_count() const { return time_groups * n_groups(); }
  int patch_width() const { return group_len * width; }

  /// Throws InputError unless m*h = H, the groups partition 0..D-1 and every
  /// group fits in `width`.
  void validate() const;

  /// Builds a spec with width = largest group.
  static PatchSpec make(int horizon, int time_groups, std::vector<std::vector<int>> groups,
                        std::vector<std::string> names = {});

  /// Presets: "single-arm-7", "bimanual-14", "wbc-21", "per-dim" (one group per
  /// dimension), "single" (one group holding everything). Time groups default
  /// to 1.
  static PatchSpec preset(const std::string& name, int horizon, int dims, int time_groups = 1);

  std::string to_text() const;
  static PatchSpec from_text(const std::string& text);

  bool operator==(const PatchSpec&) const = default;
};

struct PatchGrid {
  Mat patches;       ///< (m*n) x (h*d)
  BoolMat mask;      ///< true where the slot holds a real value
};

PatchGrid patchify(const ActionChunk& chunk, const PatchSpec& spec);

/// Writes a chunk's patches into rows [row0, row0 + m*n) of `out` (batch use).
void patchify_into(const Mat& chunk_values, const PatchSpec& spec, Mat& out, Eigen::Index row0);

ActionChunk unpatchify(const PatchGrid& grid, const PatchSpec& spec);

/// For every chunk entry (t, dim) in row-major order, the flat patch-matrix
/// index (row * width + col) holding it.
std::vector<int> patch_source_index(const PatchSpec& spec);

/// Loads a preset name or, if `ref` names an existing file, a serialized spec.
PatchSpec resolve_patch_spec(const std::string& ref, int horizon, int dims, int time_groups);

}  // namespace actcodec
