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

#include "actcodec/codec.hpp"
#include "actcodec/training.hpp"
#include "support.hpp"

using namespace actcodec;
using actcodec::testing::random_mat;
using Catch::Approx;

namespace {

CodecConfig small_config(int d_model = 16, int k = 32) {
  CodecConfig c;
  c.patch = PatchSpec::preset("per-dim", 20, 7, 1);
  c.taae.d_latent = 8;
  c.taae.d_model = d_model;
  c.taae.enc_layers = 1;
  c.taae.dec_layers = 1;
  c.taae.heads = 2;
  c.taae.cells_h = 1;
  c.taae.cells_a = 7;
  c.rvq.stages = 3;
  c.rvq.codebook_size = k;
  c.rvq.dim = 8;
  return c;
}

std::vector<ActionChunk> corpus(int n, std::uint64_t seed) {
  SynthOptions o;
  o.seed = seed;
  o.count = n;
  return synth_corpus(o);
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "actcodec_test_codec";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("encoder and decoder shape laws") {
  const auto cfg = small_config();
  const Codec codec(cfg, 3);
  const Mat a = corpus(1, 1)[0].values;
  CHECK(codec.latents(a).rows() == 7);
  CHECK(codec.latents(a).cols() == 8);
  const Mat r = codec.reconstruct(a);
  CHECK(r.rows() == 20);
  CHECK(r.cols() == 7);
  CHECK(r.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(codec.encode(a).size() == 21);
  CHECK(codec.latents(a) == codec.latents(a));
  CHECK_THROWS_AS(codec.encode(Mat::Zero(19, 7)), InputError);
}

TEST_CASE("multi-patch configs pool to their cell grid") {
  CodecConfig cfg = small_config();
  cfg.patch = PatchSpec::preset("per-dim", 32, 21, 2);
  cfg.taae.cells_h = 2;
  cfg.taae.cells_a = 21;
  const Codec codec(cfg, 1);
  const Mat a = random_mat(32, 21, 4, 0.3).cwiseMax(-1.0).cwiseMin(1.0);
  CHECK(codec.encode(a).size() == 126);
  CHECK(codec.reconstruct(a).rows() == 32);
}

TEST_CASE("zero parameters give a zero latent") {
  const auto cfg = small_config();
  Codec codec(cfg, 5);
  for (std::size_t i = 0; i < codec.params().size(); ++i) codec.params().value(i).setZero();
  CHECK(codec.latents(corpus(1, 2)[0].values).isZero());
}

TEST_CASE("config validation") {
  CodecConfig cfg = small_config();
  cfg.taae.heads = 3;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = small_config();
  cfg.rvq.dim = 4;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = small_config();
  cfg.taae.cells_a = 8;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = small_config();
  CHECK(CodecConfig::from_text(cfg.to_text(), cfg.patch.to_text()).to_text() == cfg.to_text());
}

TEST_CASE("hand two-step loss") {
  ActionChunk a(Mat(2, 1));
  a.values << 0.5, -0.5;
  const Mat recon = Mat::Zero(2, 1);
  const Mat z = Mat::Zero(1, 2);
  const auto t = vq_loss_values(a, recon, z, z, 0.25);
  CHECK(t.time_l1 == Approx(0.5).epsilon(1e-14));
  // DCT of (0.5, -0.5) is (0, 1/sqrt2); mean abs over two coefficients.
  CHECK(t.dct_l1 == Approx(0.5 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(t.commitment == 0.0);
  CHECK(t.total == t.time_l1 + t.dct_l1);
}

TEST_CASE("loss term isolation") {
  const ActionChunk a = corpus(1, 3)[0];
  const Mat z = random_mat(7, 8, 1), zq = random_mat(7, 8, 2);
  const auto zero = vq_loss_values(a, a.values, z, z, 0.25);
  CHECK(zero.total == 0.0);
  const auto commit = vq_loss_values(a, a.values, z, zq, 0.25);
  CHECK(commit.total == Approx(0.25 * (z - zq).array().square().mean()).epsilon(1e-14));
  CHECK(commit.total == commit.time_l1 + commit.dct_l1 + 0.25 * commit.commitment);
}

TEST_CASE("padded rows are excluded from the loss") {
  ActionChunk a = corpus(1, 4)[0];
  a.valid.assign(20, 1);
  for (int t = 15; t < 20; ++t) {
    a.valid[static_cast<std::size_t>(t)] = 0;
    a.values.row(t).setZero();
  }
  Mat recon = a.values;
  recon.bottomRows(5).setConstant(0.9);
  const auto t = vq_loss_values(a, recon, Mat::Zero(1, 1), Mat::Zero(1, 1), 0.25);
  CHECK(t.total == 0.0);
}

TEST_CASE("learning-rate schedule") {
  TrainConfig cfg;
  CHECK(lr_at(cfg, 0) == Approx(1e-4 / 1000.0));
  CHECK(lr_at(cfg, 999) == Approx(1e-4));
  CHECK(lr_at(cfg, 20000) == 0.0);
  const double mid = lr_at(cfg, 1000 + 9500);
  CHECK(mid == Approx(0.5e-4).epsilon(1e-9));
  for (std::int64_t s = 1000; s < 20000; s += 997) CHECK(lr_at(cfg, s) >= lr_at(cfg, s + 1));
}

TEST_CASE("global-norm clipping") {
  std::vector<Mat> g = {Mat::Constant(1, 1, 6.0), Mat::Constant(1, 1, 8.0)};
  CHECK(clip_global_norm(g, 1.0) == Approx(10.0));
  CHECK(g[0](0, 0) == Approx(0.6));
  CHECK(g[1](0, 0) == Approx(0.8));
  std::vector<Mat> small = {Mat::Constant(1, 1, 0.3)};
  clip_global_norm(small, 1.0);
  CHECK(small[0](0, 0) == 0.3);
}

TEST_CASE("AdamW with zero gradient shrinks by the decay factor") {
  ad::ParamSet ps;
  ps.add("w", random_mat(3, 3, 9));
  const Mat before = ps.value(0);
  TrainConfig cfg;
  AdamState st;
  adamw_step(ps, {Mat::Zero(3, 3)}, st, cfg, 1e-2);
  CHECK((ps.value(0) - before * (1.0 - 1e-2 * 0.1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("train config text round-trip and validation") {
  TrainConfig cfg;
  cfg.lr = 3e-4;
  cfg.seed = 12345678901ULL;
  CHECK(TrainConfig::from_text(cfg.to_text()).to_text() == cfg.to_text());
  cfg.warmup_steps = -1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("checkpoint round-trip is bit exact") {
  const auto cfg = small_config();
  TrainConfig tc;
  tc.total_steps = 5;
  tc.warmup_steps = 2;
  tc.batch_size = 4;
  Trainer tr(Codec(cfg, 1), tc, corpus(16, 5));
  for (int i = 0; i < 5; ++i) tr.step();
  const auto state = tr.state();
  save_checkpoint(scratch("c.ckpt"), tr.codec(), &state);
  const auto back = load_checkpoint(scratch("c.ckpt"));
  CHECK(back.codec.params() == tr.codec().params());
  for (int s = 0; s < 3; ++s) {
    CHECK(back.codec.bank().stages[static_cast<std::size_t>(s)].codes == tr.codec().bank().stages[static_cast<std::size_t>(s)].codes);
    CHECK(back.codec.bank().stages[static_cast<std::size_t>(s)].cluster_size ==
          tr.codec().bank().stages[static_cast<std::size_t>(s)].cluster_size);
  }
  REQUIRE(back.training.has_value());
  CHECK(back.training->step == 5);
  CHECK(back.training->adam_v[3] == state.adam_v[3]);
  const Mat a = corpus(1, 77)[0].values;
  CHECK(back.codec.reconstruct(a) == tr.codec().reconstruct(a));
}

TEST_CASE("bad checkpoints are input errors") {
  CHECK_THROWS_AS(load_checkpoint(scratch("nope.ckpt")), InputError);
  std::ofstream(scratch("junk.ckpt")) << "not a checkpoint";
  CHECK_THROWS_AS(load_checkpoint(scratch("junk.ckpt")), InputError);
}

TEST_CASE("run_training logs one record per step and resumes") {
  const auto dir = scratch("run");
  std::filesystem::remove_all(dir);
  TrainConfig tc;
  tc.total_steps = 6;
  tc.warmup_steps = 2;
  tc.batch_size = 4;
  tc.checkpoint_every = 3;
  const auto data = corpus(12, 6);
  RunOptions opts;
  opts.out_dir = dir;
  const auto r = run_training(data, tc, small_config(), opts);
  CHECK(r.steps == 6);
  std::ifstream log(dir / "metrics.jsonl");
  int lines = 0;
  for (std::string l; std::getline(log, l);) ++lines;
  CHECK(lines == 6);
  CHECK(std::filesystem::exists(dir / "step_3.ckpt"));
  const auto again = run_training(data, tc, small_config(), opts);
  CHECK(again.resumed);
  CHECK(again.codec.params() == r.codec.params());
}

TEST_CASE("batch sampling is deterministic and in range") {
  TrainConfig tc;
  tc.batch_size = 8;
  const Trainer tr(Codec(small_config(), 1), tc, corpus(20, 1));
  CHECK(tr.batch_indices(17) == tr.batch_indices(17));
  auto idx = tr.batch_indices(3);
  std::sort(idx.begin(), idx.end());
  CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
  CHECK(idx.back() < 20);
}

TEST_CASE("single-chunk memorization") {
  TrainConfig tc;
  tc.lr = 3e-3;
  tc.warmup_steps = 100;
  tc.total_steps = 3000;
  tc.batch_size = 1;
  tc.weight_decay = 0.0;
  CodecConfig cfg = small_config(16, 16);
  cfg.rvq.dead_threshold = 0.01;
  const auto data = corpus(1, 8);
  Trainer tr(Codec(cfg, 2), tc, data);
  double last = 0.0;
  for (int i = 0; i < tc.total_steps; ++i) last = tr.step().loss.total;
  CHECK(last < 1e-2);
  const Mat r = tr.codec().reconstruct(data[0].values);
  CHECK((r - data[0].values).cwiseAbs().mean() <= 1e-3);
}
