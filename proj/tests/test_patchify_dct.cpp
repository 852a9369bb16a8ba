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

#include <cmath>
#include <numbers>

#include "actcodec/dct.hpp"
#include "actcodec/patchify.hpp"

using namespace actcodec;
using Catch::Approx;

namespace {

Mat random_mat(int r, int c, std::uint64_t seed) {
  auto rng = make_rng(seed);
  Mat m(r, c);
  for (auto& v : m.reshaped()) v = uniform(rng, -1.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("single-arm grouping pads the gripper patch") {
  const auto spec = PatchSpec::make(20, 1, {{0, 1, 2}, {3, 4, 5}, {6}});
  CHECK(spec.patch_count() == 3);
  CHECK(spec.patch_width() == 60);
  const auto grid = patchify(ActionChunk(random_mat(20, 7, 1)), spec);
  CHECK(grid.patches.rows() == 3);
  CHECK(grid.mask.row(2).count() == 20);
  CHECK(grid.mask.count() == 140);
  for (int s = 0; s < 60; ++s)
    if (!grid.mask(2, s)) CHECK(grid.patches(2, s) == 0.0);
}

TEST_CASE("patch slots follow the time-major layout") {
  const auto spec = PatchSpec::make(4, 2, {{2, 0}, {1}});
  const Mat a = random_mat(4, 3, 2);
  const auto grid = patchify(ActionChunk(a), spec);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int s = 0; s < 2; ++s)
        for (std::size_t k = 0; k < spec.groups[j].size(); ++k)
          CHECK(grid.patches(i * 2 + j, s * 2 + static_cast<int>(k)) == a(i * 2 + s, spec.groups[j][k]));
}

TEST_CASE("scalar identity patch") {
  const auto spec = PatchSpec::make(1, 1, {{0}});
  Mat a(1, 1);
  a << 0.25;
  const auto grid = patchify(ActionChunk(a), spec);
  CHECK(grid.patches.size() == 1);
  CHECK(grid.patches(0, 0) == 0.25);
}

TEST_CASE("unpatchify inverts patchify bitwise") {
  for (const int h : {2, 10, 20, 32}) {
    for (const int m : {1, 2}) {
      const auto spec = PatchSpec::preset("bimanual-14", h, 14, m);
      const Mat a = random_mat(h, 14, static_cast<std::uint64_t>(h * 10 + m));
      const auto back = unpatchify(patchify(ActionChunk(a), spec), spec);
      CHECK(back.values == a);
    }
  }
}

TEST_CASE("constant and zero grids") {
  const auto spec = PatchSpec::make(6, 2, {{0, 1}, {2}});
  PatchGrid g = patchify(ActionChunk(Mat::Zero(6, 3)), spec);
  CHECK(g.patches.isZero());
  g.patches.setOnes();
  CHECK(unpatchify(g, spec).values == Mat::Ones(6, 3));
}

TEST_CASE("permuting groups in spec and grid leaves the chunk unchanged") {
  const auto spec = PatchSpec::make(4, 1, {{0, 1}, {2}, {3, 4}});
  const auto perm = PatchSpec::make(4, 1, {{3, 4}, {0, 1}, {2}});
  const Mat a = random_mat(4, 5, 3);
  PatchGrid g = patchify(ActionChunk(a), spec);
  PatchGrid pg = g;
  pg.patches.row(0) = g.patches.row(2);
  pg.patches.row(1) = g.patches.row(0);
  pg.patches.row(2) = g.patches.row(1);
  pg.mask.row(0) = g.mask.row(2);
  pg.mask.row(1) = g.mask.row(0);
  pg.mask.row(2) = g.mask.row(1);
  CHECK(unpatchify(pg, perm).values == a);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(PatchSpec::make(20, 3, {{0}}), InputError);
  CHECK_THROWS_AS(PatchSpec::make(4, 1, {{0, 1}, {1}}), InputError);
  const auto spec = PatchSpec::make(4, 1, {{0}, {1}});
  CHECK_THROWS_AS(patchify(ActionChunk(Mat::Zero(5, 2)), spec), InputError);
}

TEST_CASE("patch spec text round-trip") {
  const auto spec = PatchSpec::preset("wbc-21", 32, 21, 2);
  CHECK(PatchSpec::from_text(spec.to_text()) == spec);
}

TEST_CASE("source index addresses every entry exactly once") {
  const auto spec = PatchSpec::preset("single-arm-7", 10, 7, 2);
  const auto idx = patch_source_index(spec);
  std::vector<int> sorted = idx;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  const Mat a = random_mat(10, 7, 5);
  const auto g = patchify(ActionChunk(a), spec);
  for (int i = 0; i < 70; ++i) CHECK(g.patches.reshaped<Eigen::RowMajor>()(idx[i]) == a.reshaped<Eigen::RowMajor>()(i));
}

TEST_CASE("DCT basis is orthonormal") {
  for (const int h : {1, 2, 10, 20, 32}) {
    const DctPlan p(h);
    CHECK((p.basis().transpose() * p.basis() - Mat::Identity(h, h)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("DCT of a constant is DC only") {
  const DctPlan p(20);
  const Mat c = p.forward(Mat::Constant(20, 2, 0.3));
  CHECK(c(0, 0) == Approx(0.3 * std::sqrt(20.0)).margin(1e-12));
  CHECK(c.bottomRows(19).cwiseAbs().maxCoeff() <= 1e-12);
  Mat dc = Mat::Zero(20, 1);
  dc(0, 0) = 0.3 * std::sqrt(20.0);
  CHECK((p.inverse(dc).array() - 0.3).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("H=4 impulse yields the first basis column") {
  const DctPlan p(4);
  Mat e0 = Mat::Zero(4, 1);
  e0(0, 0) = 1.0;
  const Mat c = p.forward(e0);
  for (int k = 0; k < 4; ++k) {
    const double alpha = k == 0 ? std::sqrt(0.25) : std::sqrt(0.5);
    CHECK(c(k, 0) == Approx(alpha * std::cos(std::numbers::pi * k / 8.0)).margin(1e-14));
  }
}

TEST_CASE("DCT round-trips and preserves energy") {
  for (const int h : {2, 10, 20, 32}) {
    const DctPlan p(h);
    const Mat x = random_mat(h, 7, static_cast<std::uint64_t>(h));
    const Mat c = p.forward(x);
    CHECK((p.inverse(c) - x).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((p.forward(p.inverse(x)) - x).cwiseAbs().maxCoeff() <= 1e-9);
    for (int j = 0; j < 7; ++j) CHECK(c.col(j).norm() == Approx(x.col(j).norm()).epsilon(1e-12));
    CHECK((p.forward(2.0 * x + c) - (2.0 * c + p.forward(c))).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK_THROWS_AS(DctPlan(4).forward(Mat::Zero(5, 1)), InputError);
}
