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

#include "actcodec/patchify.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace actcodec {

void PatchSpec::validate() const {
  require(horizon >= 1 && dims >= 1, "patch spec needs positive horizon and dims");
  require(time_groups >= 1 && group_len >= 1 && time_groups * group_len == horizon,
          "patch spec: time_groups * group_len (" + std::to_string(time_groups) + " * " +
              std::to_string(group_len) + ") must equal horizon " + std::to_string(horizon));
  require(!groups.empty(), "patch spec needs at least one dimension group");
  require(group_names.empty() || group_names.size() == groups.size(),
          "patch spec: group name count mismatch");
  std::vector<int> seen(static_cast<std::size_t>(dims), 0);
  for (const auto& g : groups) {
    require(!g.empty(), "patch spec: empty dimension group");
    require(static_cast<int>(g.size()) <= width, "patch spec: group wider than padded width");
    for (int d : g) {
      require(d >= 0 && d < dims, "patch spec: dimension index " + std::to_string(d) + " out of range");
      require(seen[static_cast<std::size_t>(d)]++ == 0,
              "patch spec: dimension " + std::to_string(d) + " appears in more than one group");
    }
  }
  for (int d = 0; d < dims; ++d) {
    require(seen[static_cast<std::size_t>(d)] == 1,
            "patch spec: dimension " + std::to_string(d) + " not covered by any group");
  }
}

PatchSpec PatchSpec::make(int horizon, int time_groups, std::vector<std::vector<int>> groups,
                          std::vector<std::string> names) {
  PatchSpec s;
  s.horizon = horizon;
  s.time_groups = time_groups;
  s.group_len = time_groups > 0 ? horizon / time_groups : 0;
  s.dims = 0;
  s.width = 0;
  for (const auto& g : groups) {
    s.width = std::max(s.width, static_cast<int>(g.size()));
    for (int d : g) s.dims = std::max(s.dims, d + 1);
  }
  s.groups = std::move(groups);
  s.group_names = std::move(names);
  if (time_groups > 0 && horizon % time_groups != 0) s.group_len = 0;
  s.validate();
  return s;
}

namespace {
std::vector<int> range(int lo, int hi) {
  std::vector<int> v(static_cast<std::size_t>(hi - lo));
  std::iota(v.begin(), v.end(), lo);
  return v;
}
}  // namespace

PatchSpec PatchSpec::preset(const std::string& name, int horizon, int dims, int time_groups) {
  if (name == "single-arm-7") {
    require(dims == 7, "preset single-arm-7 needs 7 dimensions");
    return make(horizon, time_groups, {range(0, 3), range(3, 6), {6}}, {"eef_pos", "eef_rot", "gripper"});
  }
  if (name == "bimanual-14") {
    require(dims == 14, "preset bimanual-14 needs 14 dimensions");
    return make(horizon, time_groups,
                {range(0, 3), range(3, 6), {6}, range(7, 10), range(10, 13), {13}},
                {"left_pos", "left_rot", "left_gripper", "right_pos", "right_rot", "right_gripper"});
  }
  if (name == "wbc-21") {
    require(dims == 21, "preset wbc-21 needs 21 dimensions");
    return make(horizon, time_groups,
                {range(0, 3), range(3, 6), {6}, range(7, 10), range(10, 13), {13}, range(14, 18),
                 range(18, 21)},
                {"left_pos", "left_rot", "left_gripper", "right_pos", "right_rot", "right_gripper",
                 "torso", "base"});
  }
  if (name == "per-dim") {
    std::vector<std::vector<int>> g;
    std::vector<std::string> n;
    for (int d = 0; d < dims; ++d) {
      g.push_back({d});
      n.push_back("dim" + std::to_string(d));
    }
    return make(horizon, time_groups, std::move(g), std::move(n));
  }
  if (name == "single") return make(horizon, time_groups, {range(0, dims)}, {"all"});
  throw InputError("unknown patch spec preset '" + name + "'");
}

std::string PatchSpec::to_text() const {
  std::ostringstream os;
  os << "horizon " << horizon << "\n"
     << "dims " << dims << "\n"
     << "time_groups " << time_groups << "\n"
     << "width " << width << "\n"
     << "layout time-major\n";
  for (std::size_t j = 0; j < groups.size(); ++j) {
    os << "group " << (group_names.empty() ? "g" + std::to_string(j) : group_names[j]);
    for (int d : groups[j]) os << ' ' << d;
    os << "\n";
  }
  return os.str();
}

PatchSpec PatchSpec::from_text(const std::string& text) {
  std::istringstream is(text);
  PatchSpec s;
  std::string line;
  int width = -1;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "horizon") {
      ls >> s.horizon;
    } else if (key == "dims") {
      ls >> s.dims;
    } else if (key == "time_groups") {
      ls >> s.time_groups;
    } else if (key == "width") {
      ls >> width;
    } else if (key == "layout") {
      std::string layout;
      ls >> layout;
      require(layout == "time-major", "unsupported patch layout '" + layout + "'");
    } else if (key == "group") {
      std::string name;
      ls >> name;
      std::vector<int> g;
      int d = 0;
      while (ls >> d) g.push_back(d);
      s.groups.push_back(std::move(g));
      s.group_names.push_back(name);
    } else {
      throw InputError("unknown patch spec key '" + key + "'");
    }
  }
  require(s.time_groups >= 1 && s.horizon % s.time_groups == 0,
          "patch spec: time_groups must divide horizon");
  s.group_len = s.horizon / s.time_groups;
  int max_group = 0;
  for (const auto& g : s.groups) max_group = std::max(max_group, static_cast<int>(g.size()));
  s.width = width >= 0 ? width : max_group;
  s.validate();
  return s;
}

namespace {
void check_chunk(const Mat& values, const PatchSpec& spec) {
  require(values.rows() == spec.horizon && values.cols() == spec.dims,
          "chunk shape " + std::to_string(values.rows()) + "x" + std::to_string(values.cols()) +
              " does not match patch spec " + std::to_string(spec.horizon) + "x" +
              std::to_string(spec.dims));
}
}  // namespace

void patchify_into(const Mat& values, const PatchSpec& spec, Mat& out, Eigen::Index row0) {
  const int n = spec.n_groups();
  for (int i = 0; i < spec.time_groups; ++i) {
    for (int j = 0; j < n; ++j) {
      auto row = out.row(row0 + i * n + j);
      row.setZero();
      const auto& g = spec.groups[static_cast<std::size_t>(j)];
      for (int s = 0; s < spec.group_len; ++s) {
        const int t = i * spec.group_len + s;
        for (std::size_t k = 0; k < g.size(); ++k) {
          row(s * spec.width + static_cast<int>(k)) = values(t, g[k]);
        }
      }
    }
  }
}

PatchGrid patchify(const ActionChunk& chunk, const PatchSpec& spec) {
  spec.validate();
  check_chunk(chunk.values, spec);
  PatchGrid grid;
  grid.patches = Mat::Zero(spec.patch_count(), spec.patch_width());
  grid.mask = BoolMat::Constant(spec.patch_count(), spec.patch_width(), false);
  patchify_into(chunk.values, spec, grid.patches, 0);
  const int n = spec.n_groups();
  for (int i = 0; i < spec.time_groups; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto& g = spec.groups[static_cast<std::size_t>(j)];
      for (int s = 0; s < spec.group_len; ++s) {
        for (std::size_t k = 0; k < g.size(); ++k) grid.mask(i * n + j, s * spec.width + static_cast<int>(k)) = true;
      }
    }
  }
  return grid;
}

std::vector<int> patch_source_index(const PatchSpec& spec) {
  std::vector<int> idx(static_cast<std::size_t>(spec.horizon * spec.dims), -1);
  const int n = spec.n_groups();
  const int w = spec.patch_width();
  for (int j = 0; j < n; ++j) {
    const auto& g = spec.groups[static_cast<std::size_t>(j)];
    for (int t = 0; t < spec.horizon; ++t) {
      const int i = t / spec.group_len;
      const int s = t % spec.group_len;
      for (std::size_t k = 0; k < g.size(); ++k) {
        idx[static_cast<std::size_t>(t * spec.dims + g[k])] = (i * n + j) * w + s * spec.width + static_cast<int>(k);
      }
    }
  }
  return idx;
}

ActionChunk unpatchify(const PatchGrid& grid, const PatchSpec& spec) {
  spec.validate();
  require(grid.patches.rows() == spec.patch_count() && grid.patches.cols() == spec.patch_width(),
          "patch grid shape " + std::to_string(grid.patches.rows()) + "x" +
              std::to_string(grid.patches.cols()) + " does not match spec " +
              std::to_string(spec.patch_count()) + "x" + std::to_string(spec.patch_width()));
  const auto idx = patch_source_index(spec);
  Mat values(spec.horizon, spec.dims);
  for (int t = 0; t < spec.horizon; ++t) {
    for (int d = 0; d < spec.dims; ++d) values(t, d) = grid.patches.data()[idx[static_cast<std::size_t>(t * spec.dims + d)]];
  }
  return ActionChunk(std::move(values));
}

PatchSpec resolve_patch_spec(const std::string& ref, int horizon, int dims, int time_groups) {
  if (std::filesystem::is_regular_file(ref)) {
    std::ifstream is(ref);
    std::stringstream ss;
    ss << is.rdbuf();
    return PatchSpec::from_text(ss.str());
  }
  return PatchSpec::preset(ref, horizon, dims, time_groups);
}

}  // namespace actcodec
