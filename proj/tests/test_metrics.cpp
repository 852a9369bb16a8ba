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

#include "actcodec/codec.hpp"
#include "actcodec/metrics.hpp"
#include "support.hpp"

using namespace actcodec;
using actcodec::testing::random_mat;
using Catch::Approx;

namespace {

std::vector<ActionChunk> corpus(int n, std::uint64_t seed, const std::string& tag = "synthetic") {
  SynthOptions o;
  o.seed = seed;
  o.count = n;
  o.embodiment_tag = tag;
  return synth_corpus(o);
}

}  // namespace

TEST_CASE("histogram of three and one over four codes") {
  const std::vector<std::int64_t> counts = {3, 1, 0, 0};
  const auto s = histogram_stats(counts);
  CHECK(s.usage_pct == Approx(50.0).margin(1e-9));
  CHECK(s.f_max_pct == Approx(75.0).margin(1e-9));
  const double h = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
  CHECK(s.entropy_norm == Approx(h / std::log(4.0)).margin(1e-9));
  CHECK(s.entropy_norm == Approx(0.4056).margin(5e-5));
  // 0.25 > 0.02 and 0.75 > 0.02: both used codes are active.
  CHECK(s.active_above[1].second == 2);
}

TEST_CASE("uniform and single-code histograms") {
  const std::vector<std::int64_t> uniform(16, 5);
  const auto u = histogram_stats(uniform);
  CHECK(u.usage_pct == Approx(100.0).margin(1e-9));
  CHECK(u.f_max_pct == Approx(100.0 / 16).margin(1e-9));
  CHECK(u.entropy_norm == Approx(1.0).margin(1e-9));
  std::vector<std::int64_t> single(16, 0);
  single[3] = 40;
  const auto s = histogram_stats(single);
  CHECK(s.usage_pct == Approx(100.0 / 16).margin(1e-9));
  CHECK(s.entropy_norm == Approx(0.0).margin(1e-9));
}

TEST_CASE("code histograms offset each stage") {
  CodeTensor c(2, 1, 2);
  c.at(0, 0, 0) = 1;
  c.at(0, 0, 1) = 1;
  c.at(1, 0, 0) = 1;
  c.at(1, 0, 1) = 0;
  const std::vector<CodeTensor> cs = {c};
  const auto offset = code_stats(cs, 4);
  CHECK(offset.vocab_size == 8);
  CHECK(offset.usage_pct == Approx(300.0 / 8).margin(1e-9));
  const auto shared = code_stats(cs, 4, kDefaultActiveThresholds, false);
  CHECK(shared.vocab_size == 4);
  CHECK(shared.f_max_pct == Approx(75.0).margin(1e-9));
}

TEST_CASE("VRR counting") {
  const auto truth = corpus(1, 1);
  std::vector<Mat> recon = {truth[0].values};
  CHECK(vrr(recon, truth, 1e-6).vrr == 1.0);

  ActionChunk four(Mat::Zero(4, 3));
  Mat r = Mat::Zero(4, 3);
  r(2, 0) = 0.01;
  r(2, 2) = 0.01;  // L1 error 0.02 = 2 sigma
  const std::vector<ActionChunk> t4 = {four};
  const std::vector<Mat> r4 = {r};
  const auto rep = vrr(r4, t4, 0.01);
  CHECK(rep.n_total == 4);
  CHECK(rep.n_valid == 3);
  CHECK(rep.vrr == 0.75);
  CHECK(vrr(r4, t4, 0.01, VrrMode::kPerScalar).n_total == 12);
  // Two scalars sit exactly at sigma, which is not strictly inside.
  CHECK(vrr(r4, t4, 0.01, VrrMode::kPerScalar).n_valid == 10);
  CHECK_THROWS_AS(vrr(r4, t4, 0.0), InputError);
  const std::vector<Mat> bad = {Mat::Zero(3, 3)};
  CHECK_THROWS_AS(vrr(bad, t4, 0.1), InputError);
}

TEST_CASE("masked rows are not counted") {
  ActionChunk c(Mat::Zero(4, 2));
  c.valid = {1, 1, 0, 0};
  Mat r = Mat::Zero(4, 2);
  r.bottomRows(2).setOnes();
  const std::vector<ActionChunk> t = {c};
  const std::vector<Mat> rs = {r};
  const auto rep = vrr(rs, t, 0.1);
  CHECK(rep.n_total == 2);
  CHECK(rep.vrr == 1.0);
}

TEST_CASE("compression ratios") {
  CHECK(compression_ratio(20, 7, 21) == Approx(140.0 / 21.0));
  CHECK(compression_ratio(32, 21, 126) == Approx(672.0 / 126.0));
  CHECK(compression_ratio(20, 7, CodeTensor(3, 1, 7)) == Approx(140.0 / 21.0));
  CHECK(compression_ratio(4, 5, 20) == 1.0);
}

TEST_CASE("binning baseline") {
  Mat v(1, 2);
  v << -0.3, 0.3;
  const auto t = binning_tokenize(v, 2);
  CHECK(t == std::vector<int>{0, 1});
  for (const int bins : {2, 7, 256}) {
    const Mat x = random_mat(20, 7, static_cast<std::uint64_t>(bins), 0.6).cwiseMax(-1.0).cwiseMin(1.0);
    const auto tok = binning_tokenize(x, bins);
    CHECK(tok.size() == 140);
    const Mat back = binning_detokenize(tok, 20, 7, bins);
    CHECK((back - x).cwiseAbs().maxCoeff() <= 1.0 / bins + 1e-15);
  }
  Mat edge(1, 2);
  edge << -1.0, 1.0;
  CHECK(binning_tokenize(edge, 4) == std::vector<int>{0, 3});
  CHECK_THROWS_AS(binning_tokenize(edge, 1), InputError);
}

TEST_CASE("VRR sweeps are monotone with per-embodiment rows") {
  auto data = corpus(20, 3, "left");
  for (const auto& c : corpus(10, 4, "right")) data.push_back(c);
  const Reconstructor noisy = [](const Mat& c) {
    return Mat(c + random_mat(c.rows(), c.cols(), 5, 0.002));
  };
  const std::vector<double> sigmas = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  const auto t = vrr_sweep(noisy, data, sigmas);
  REQUIRE(t.overall.size() == 5);
  for (std::size_t i = 1; i < 5; ++i) CHECK(t.overall[i - 1].vrr <= t.overall[i].vrr);
  CHECK(t.per_embodiment.size() == 2);
  CHECK(t.per_embodiment.at("right")[0].n_total == 200);

  const Reconstructor identity = [](const Mat& c) { return c; };
  for (const auto& r : vrr_sweep(identity, data, {1e-3, 1e-2}).overall) CHECK(r.vrr == 1.0);
}

TEST_CASE("an untrained codec fails tight tolerances") {
  CodecConfig cfg;
  cfg.patch = PatchSpec::preset("per-dim", 20, 7, 1);
  cfg.taae.d_model = 16;
  cfg.taae.heads = 2;
  cfg.rvq.dim = cfg.taae.d_latent;
  const Codec codec(cfg, 1);
  const auto data = corpus(50, 9);
  const Reconstructor rec = [&](const Mat& c) { return codec.reconstruct(c); };
  CHECK(vrr_sweep(rec, data, {1e-3}).overall[0].vrr <= 0.05);
}
