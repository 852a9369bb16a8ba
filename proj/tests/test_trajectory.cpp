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

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "actcodec/trajectory.hpp"

using namespace actcodec;
using Catch::Approx;

namespace {

RawTrajectory ramp(int t, int d, const std::string& tag = "arm") {
  RawTrajectory r;
  r.values = Mat(t, d);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < d; ++j) r.values(i, j) = i + 0.5 * j;
  for (int j = 0; j < d; ++j) r.dim_labels.push_back("q" + std::to_string(j));
  r.frequency_hz = 10.0;
  r.embodiment_tag = tag;
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "actcodec_test_trajectory";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("percentiles of 0..100 are 1 and 99") {
  RawTrajectory r;
  r.values = Mat(101, 1);
  for (int i = 0; i <= 100; ++i) r.values(i, 0) = i;
  r.dim_labels = {"x"};
  const auto s = fit_normalizer(std::span<const RawTrajectory>(&r, 1));
  CHECK(s.q_low[0] == Approx(1.0).margin(1e-12));
  CHECK(s.q_high[0] == Approx(99.0).margin(1e-12));
}

TEST_CASE("constant corpus gives degenerate bounds mapping to zero") {
  RawTrajectory r = ramp(5, 2);
  r.values.setZero();
  const auto s = fit_normalizer(std::span<const RawTrajectory>(&r, 1));
  CHECK(s.q_low[0] == 0.0);
  CHECK(s.q_high[0] == 0.0);
  const auto n = normalize(r, s);
  CHECK(n.values.isZero());
}

TEST_CASE("pooled percentiles match a brute-force sort") {
  std::vector<RawTrajectory> corpus = {ramp(7, 1), ramp(13, 1)};
  corpus[1].values.array() *= -0.3;
  std::vector<double> pool;
  for (const auto& t : corpus)
    for (int i = 0; i < t.values.rows(); ++i) pool.push_back(t.values(i, 0));
  std::sort(pool.begin(), pool.end());
  const auto lo_pos = 0.01 * static_cast<double>(pool.size() - 1);
  const auto i0 = static_cast<std::size_t>(lo_pos);
  const double lo = pool[i0] + (lo_pos - static_cast<double>(i0)) * (pool[i0 + 1] - pool[i0]);
  const auto s = fit_normalizer(corpus);
  CHECK(s.q_low[0] == Approx(lo).margin(1e-12));
}

TEST_CASE("fit_normalizer rejects empty corpora and dimension mismatch") {
  std::vector<RawTrajectory> none;
  CHECK_THROWS_AS(fit_normalizer(none), InputError);
  std::vector<RawTrajectory> mixed = {ramp(4, 2), ramp(4, 3)};
  CHECK_THROWS_AS(fit_normalizer(mixed), InputError);
}

TEST_CASE("normalize maps endpoints, midpoint and clips") {
  NormalizationStats s{{-2.0}, {6.0}};
  RawTrajectory r;
  r.values = Mat(4, 1);
  r.values << -2.0, 6.0, 2.0, 100.0;
  r.dim_labels = {"x"};
  const auto n = normalize(r, s);
  CHECK(n.values(0, 0) == -1.0);
  CHECK(n.values(1, 0) == 1.0);
  CHECK(n.values(2, 0) == 0.0);
  CHECK(n.values(3, 0) == 1.0);
  const auto back = denormalize(n, s);
  CHECK(back.values(2, 0) == Approx(2.0));
}

TEST_CASE("chunk window arithmetic") {
  CHECK(chunk(ramp(20, 2), {20, 20, true}).size() == 1);
  const auto c45 = chunk(ramp(45, 2), {20, 20, true});
  REQUIRE(c45.size() == 3);
  CHECK(c45[2].valid_rows() == 5);
  CHECK(c45[2].values.bottomRows(15).isZero());
  CHECK(chunk(ramp(20, 2), {20, 1, true}).size() == 20);
  CHECK(chunk(ramp(20, 2), {20, 1, false}).size() == 1);
  CHECK_THROWS_AS(chunk(ramp(20, 2), {0, 1, true}), InputError);
}

TEST_CASE("synthetic corpora are deterministic and bounded") {
  SynthOptions o;
  o.seed = 9;
  o.count = 50;
  const auto a = synth_corpus(o);
  const auto b = synth_corpus(o);
  REQUIRE(a.size() == 50);
  const double bound = smooth_profile_step_bound(o.horizon);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].values == b[i].values);
    CHECK(a[i].values.cwiseAbs().maxCoeff() <= 1.0);
    const Mat diff = a[i].values.bottomRows(o.horizon - 1) - a[i].values.topRows(o.horizon - 1);
    CHECK(diff.cwiseAbs().maxCoeff() < bound);
  }
  o.profile = SynthProfile::kGripperBinary;
  for (const auto& c : synth_corpus(o))
    for (int t = 0; t < c.horizon(); ++t) CHECK(std::abs(c.values(t, o.dims - 1)) == 1.0);
}

TEST_CASE("identical synth options produce identical bytes on disk") {
  SynthOptions o;
  o.seed = 4;
  o.count = 5;
  o.profile = SynthProfile::kPiecewise;
  auto write = [&](const std::string& name) {
    std::vector<RawTrajectory> trajs;
    for (const auto& c : synth_corpus(o)) trajs.push_back(chunk_as_trajectory(c));
    write_trajectories(scratch(name), trajs);
    std::ifstream is(scratch(name), std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
  };
  CHECK(write("a.bin") == write("b.bin"));
}

TEST_CASE("trajectory container and manifest round-trip") {
  std::vector<RawTrajectory> trajs = {ramp(6, 3, "left"), ramp(2, 3, "right")};
  write_trajectories(scratch("t.bin"), trajs);
  const auto back = read_trajectories(scratch("t.bin"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].values == trajs[0].values);  // small integers survive f32
  CHECK(back[1].embodiment_tag == "right");
  CHECK(back[0].dim_labels == trajs[0].dim_labels);

  const ManifestEntry e{"t.bin", "override"};
  write_manifest(scratch("m.txt"), std::span<const ManifestEntry>(&e, 1));
  const auto viaManifest = load_dataset(scratch("m.txt"));
  REQUIRE(viaManifest.size() == 2);
  CHECK(viaManifest[1].embodiment_tag == "override");
  CHECK_THROWS_AS(read_trajectories(scratch("missing.bin")), InputError);
}

TEST_CASE("norm stats file round-trip and global fallback") {
  std::map<std::string, NormalizationStats> stats;
  stats[""] = {{0.1, -3.0}, {0.9, 3.0}};
  stats["arm"] = {{-1.0 / 3.0, 0.0}, {2.0, 1e-7}};
  write_norm_stats(scratch("n.txt"), stats);
  const auto back = read_norm_stats(scratch("n.txt"));
  CHECK(back.at("arm").q_low == stats.at("arm").q_low);
  CHECK(back.at("").q_high == stats.at("").q_high);
  CHECK(&stats_for(back, "unknown") == &back.at(""));
}

TEST_CASE("raw trajectories validate their invariants") {
  RawTrajectory r = ramp(3, 2);
  CHECK_NOTHROW(r.validate());
  r.values(1, 1) = std::nan("");
  CHECK_THROWS_AS(r.validate(), InputError);
  r = ramp(3, 2);
  r.dim_labels.pop_back();
  CHECK_THROWS_AS(r.validate(), InputError);
}
