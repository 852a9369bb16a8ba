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
#include <set>

#include "actcodec/bar.hpp"

using namespace actcodec;
using Catch::Approx;

namespace {

std::vector<ToyExample> toy_corpus(const ToyPolicyConfig& cfg, const BlockSchedule& s, int n, std::uint64_t seed) {
  std::vector<ToyExample> out;
  for (int e = 0; e < n; ++e) {
    auto rng = make_rng(seed, 5, static_cast<std::uint64_t>(e));
    ToyExample ex{Vec(cfg.context_dim), CodeTensor(s.n_codebooks, s.cells_h, s.cells_a)};
    for (int i = 0; i < cfg.context_dim; ++i) ex.context(i) = gaussian(rng);
    for (auto& c : ex.codes.indices) c = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(cfg.codebook_size)));
    out.push_back(std::move(ex));
  }
  return out;
}

// Brute-force visibility predicate for action tokens i, j.
bool visible(int i, int j, int prefix, int b) {
  if (i < prefix) return j <= i;
  if (j < prefix) return true;
  return (j - prefix) / b <= (i - prefix) / b;
}

}  // namespace

TEST_CASE("libero schedule arithmetic") {
  const auto s = build_schedule(3, 1, 7, 7);
  CHECK(s.tokens() == 21);
  CHECK(s.n_blocks == 3);
  CHECK(pass_count(s, DecodeMode::kBar) == 3);
  CHECK(pass_count(s, DecodeMode::kAr) == 21);
  CHECK(s.to_text() == "3/1/7/7");
  CHECK(parse_schedule("3/1/7/7").flat_order == s.flat_order);
}

TEST_CASE("trivial and enumerated orders") {
  const auto one = build_schedule(1, 1, 1, 1);
  CHECK(one.n_blocks == 1);
  CHECK(one.flat_order == std::vector<CellIndex>{{0, 0, 0}});

  const auto s = build_schedule(2, 2, 3, 4);
  std::vector<CellIndex> expect;
  for (int st = 0; st < 2; ++st)
    for (int h = 0; h < 2; ++h)
      for (int a = 0; a < 3; ++a) expect.push_back({st, h, a});
  CHECK(s.flat_order == expect);
  CHECK(s.n_blocks == 3);
  CHECK(s.block_bounds == std::vector<std::pair<int, int>>{{0, 4}, {4, 8}, {8, 12}});
  CHECK_THROWS_AS(build_schedule(2, 2, 3, 13), InputError);
  CHECK_THROWS_AS(build_schedule(2, 2, 3, 0), InputError);
}

TEST_CASE("short final block and pass counts") {
  const auto wbc = build_schedule(3, 2, 21, 8);
  CHECK(wbc.tokens() == 126);
  CHECK(wbc.n_blocks == 16);
  CHECK(wbc.padded_tokens() == 128);
  for (int n = 1; n <= 30; ++n)
    for (int b = 1; b <= n; ++b) CHECK(pass_count(build_schedule(1, 1, n, b), DecodeMode::kBar) == (n + b - 1) / b);
}

TEST_CASE("code flattening is a bijection") {
  const auto s = build_schedule(3, 2, 5, 4);
  CodeTensor c(3, 2, 5);
  for (std::size_t i = 0; i < c.size(); ++i) c.indices[i] = static_cast<int>(i * 7 % 31);
  const auto flat = flatten_codes(c, s);
  CHECK(unflatten_codes(flat, s) == c);
  std::set<std::tuple<int, int, int>> seen;
  int prev_stage = 0;
  for (const auto& cell : s.flat_order) {
    seen.insert({cell.stage, cell.h, cell.a});
    CHECK(cell.stage >= prev_stage);
    prev_stage = cell.stage;
  }
  CHECK(seen.size() == 30);
}

TEST_CASE("masks") {
  const auto b1 = build_schedule(1, 1, 6, 1);
  CHECK(build_mask(3, b1) == causal_mask(9));

  const auto full = build_schedule(1, 1, 5, 5);
  const BoolMat m = build_mask(2, full);
  CHECK(m.bottomRightCorner(5, 5).all());
  CHECK(m.bottomLeftCorner(5, 2).all());
  CHECK_FALSE(m.topRightCorner(2, 5).any());

  const auto s = build_schedule(1, 1, 4, 2);
  const BoolMat p = build_mask(2, s);
  REQUIRE(p.rows() == 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(p(i, j) == visible(i, j, 2, 2));
}

TEST_CASE("spacing positions") {
  const auto zero = spacing_positions(6, 0, PositionMode::kTrain, 3);
  for (int i = 0; i < 6; ++i) CHECK(zero.positions[static_cast<std::size_t>(i)] == i);
  CHECK(spacing_positions(4, 2, PositionMode::kInfer, 0).positions == std::vector<int>{0, 2, 4, 6});

  std::set<int> gaps;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = spacing_positions(101, 2, PositionMode::kTrain, seed).positions;
    for (std::size_t i = 1; i < p.size(); ++i) {
      const int g = p[i] - p[i - 1];
      CHECK((g >= 1 && g <= 3));
      gaps.insert(g);
    }
  }
  CHECK(gaps == std::set<int>{1, 2, 3});
  CHECK(spacing_positions(5, 2, PositionMode::kTrain, 9).positions == spacing_positions(5, 2, PositionMode::kTrain, 9).positions);
  CHECK_THROWS_AS(spacing_positions(5, -1, PositionMode::kTrain, 0), InputError);
  CHECK_THROWS_AS(spacing_positions(0, 1, PositionMode::kTrain, 0), InputError);
}

TEST_CASE("teacher forcing sequences") {
  ToyPolicyConfig cfg;
  cfg.codebook_size = 10;
  cfg.n_codebooks = 1;
  const auto s = build_schedule(1, 1, 5, 2);
  CodeTensor c(1, 1, 5);
  c.indices = {1, 2, 3, 4, 5};
  const auto [bin, btgt] = teacher_forcing_sequence(cfg, c, s, DecodeMode::kBar);
  CHECK(bin == std::vector<int>{10, 10, 1, 2, 3, 4});
  CHECK(btgt == std::vector<int>{1, 2, 3, 4, 5, -1});
  const auto [ain, atgt] = teacher_forcing_sequence(cfg, c, s, DecodeMode::kAr);
  CHECK(ain == std::vector<int>{10, 1, 2, 3, 4});
  CHECK(atgt == std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("initial loss is log K and B=1 BAR equals AR bitwise") {
  ToyPolicyConfig cfg;
  cfg.codebook_size = 16;
  cfg.n_codebooks = 2;
  const auto s = build_schedule(2, 1, 3, 1);
  const auto data = toy_corpus(cfg, s, 4, 1);
  ToyPolicy p(cfg, 3);
  CHECK(p.loss_value(data, s, DecodeMode::kBar) == Approx(std::log(16.0)).epsilon(1e-12));
  for (std::size_t i = 0; i < p.params().size(); ++i) p.params().value(i).array() += 0.01 * static_cast<double>(i % 3);
  CHECK(p.loss_value(data, s, DecodeMode::kBar) == p.loss_value(data, s, DecodeMode::kAr));
}

TEST_CASE("single example memorization in both modes") {
  ToyPolicyConfig cfg;
  cfg.codebook_size = 16;
  cfg.n_codebooks = 2;
  cfg.d_model = 16;
  cfg.layers = 1;
  const auto s = build_schedule(2, 1, 3, 4);
  const auto data = toy_corpus(cfg, s, 1, 2);
  for (const auto mode : {DecodeMode::kAr, DecodeMode::kBar}) {
    ToyPolicy p(cfg, 4);
    ToyTrainOptions o;
    o.steps = 800;
    o.batch_size = 1;
    toy_policy_train(p, data, s, mode, o);
    CHECK(p.loss_value(data, s, mode) < 0.01);
    const auto r = decode_rollout(p, data[0].context, s, mode, Sampler{});
    CHECK(r.codes == data[0].codes);
    CHECK(r.passes == pass_count(s, mode));
  }
}

TEST_CASE("sampler contracts") {
  ToyPolicyConfig cfg;
  cfg.codebook_size = 8;
  cfg.n_codebooks = 1;
  const auto s = build_schedule(1, 1, 4, 2);
  ToyPolicy p(cfg, 1);
  for (std::size_t i = 0; i < p.params().size(); ++i) p.params().value(i).array() += 0.05;
  const Vec ctx = Vec::Ones(cfg.context_dim);
  CHECK(decode_rollout(p, ctx, s, DecodeMode::kBar, Sampler{}).codes ==
        decode_rollout(p, ctx, s, DecodeMode::kBar, Sampler{}).codes);
  CHECK(decode_rollout(p, ctx, s, DecodeMode::kBar, Sampler{5, 0.8, 3}).codes ==
        decode_rollout(p, ctx, s, DecodeMode::kBar, Sampler{5, 0.8, 3}).codes);
  CHECK_THROWS_AS(decode_rollout(p, ctx, s, DecodeMode::kBar, Sampler{0, 1.0, 0}), InputError);
  CHECK_THROWS_AS(decode_rollout(p, ctx, s, DecodeMode::kBar, Sampler{1, 0.0, 0}), InputError);
}

TEST_CASE("latency accounting") {
  const std::vector<std::pair<std::string, double>> extras = {{"image", 16.0}, {"obs", 72.0}, {"detok", 2.7}};
  const auto bar = latency_model(7.4, 3, extras);
  CHECK(bar.total_ms == Approx(112.9).margin(1e-9));
  CHECK(std::abs(bar.total_ms - 112.0) <= 1.0);
  const auto doubled = latency_model(7.4, 6, extras);
  CHECK(doubled.passes_ms == Approx(2.0 * bar.passes_ms));
  const auto ar = latency_model(6.4, 21, extras);
  CHECK(ar.passes_ms / bar.passes_ms == Approx(21.0 * 6.4 / (3.0 * 7.4)));
  CHECK(ar.passes_ms / bar.passes_ms == Approx(6.05).margin(0.01));
}
