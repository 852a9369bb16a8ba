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

#include "actcodec/taae.hpp"

#include <algorithm>
#include <cmath>

namespace actcodec {

Activation parse_activation(const std::string& name) {
  if (name == "gelu") return Activation::kGelu;
  if (name == "tanh") return Activation::kTanh;
  throw InputError("unknown activation '" + name + "'");
}

std::string activation_name(Activation a) { return a == Activation::kTanh ? "tanh" : "gelu"; }

void TaaeConfig::validate(const PatchSpec& spec) const {
  require(d_latent >= 1 && d_model >= 2 && heads >= 1, "TAAE widths must be positive");
  require(d_model % heads == 0, "d_model " + std::to_string(d_model) + " not divisible by heads " + std::to_string(heads));
  require(enc_layers >= 0 && dec_layers >= 0 && mlp_ratio >= 1, "TAAE layer counts must be non-negative");
  require(conv_kernel >= 1 && conv_kernel % 2 == 1, "conv_kernel must be odd");
  require(cells_h >= 1 && cells_a >= 1, "latent grid must be at least 1x1");
  require(cells() <= spec.patch_count(), "latent grid " + std::to_string(cells_h) + "x" + std::to_string(cells_a) +
                                             " has more cells than the " + std::to_string(spec.patch_count()) +
                                             " patch tokens");
}

namespace {

// Window [floor(k * len / out), ceil((k + 1) * len / out)).
std::pair<int, int> adaptive_window(int k, int len, int out) {
  const int lo = (k * len) / out;
  const int hi = ((k + 1) * len + out - 1) / out;
  return {lo, hi};
}

}  // namespace

Mat pooling_matrix(const PatchSpec& spec, int cells_h, int cells_a) {
  const int m = spec.time_groups;
  const int n = spec.n_groups();
  const int tokens = m * n;
  const int cells = cells_h * cells_a;
  Mat p = Mat::Zero(cells, tokens);
  if (cells_h <= m && cells_a <= n) {
    for (int h = 0; h < cells_h; ++h) {
      const auto [t0, t1] = adaptive_window(h, m, cells_h);
      for (int a = 0; a < cells_a; ++a) {
        const auto [g0, g1] = adaptive_window(a, n, cells_a);
        const double w = 1.0 / ((t1 - t0) * (g1 - g0));
        for (int i = t0; i < t1; ++i) {
          for (int j = g0; j < g1; ++j) p(h * cells_a + a, i * n + j) = w;
        }
      }
    }
  } else {
    for (int k = 0; k < cells; ++k) {
      const auto [lo, hi] = adaptive_window(k, tokens, cells);
      for (int t = lo; t < hi; ++t) p(k, t) = 1.0 / (hi - lo);
    }
  }
  return p;
}

Mat unpooling_matrix(const Mat& pool) {
  Mat u = Mat::Zero(pool.cols(), pool.rows());
  for (Eigen::Index t = 0; t < pool.cols(); ++t) {
    int covered = 0;
    for (Eigen::Index k = 0; k < pool.rows(); ++k) covered += pool(k, t) > 0.0 ? 1 : 0;
    for (Eigen::Index k = 0; k < pool.rows(); ++k) {
      if (pool(k, t) > 0.0) u(t, k) = 1.0 / covered;
    }
  }
  return u;
}

Taae::Taae(TaaeConfig cfg, PatchSpec spec) : cfg_(cfg), spec_(std::move(spec)) {
  spec_.validate();
  cfg_.validate(spec_);
  pool_ = pooling_matrix(spec_, cfg_.cells_h, cfg_.cells_a);
  unpool_ = unpooling_matrix(pool_);
  full_mask_ = BoolMat::Constant(tokens(), tokens(), true);

  const int pw = spec_.patch_width();
  const int dm = cfg_.d_model;
  enc_.in_w = reg("enc.in.w", pw, dm, ParamInfo::kWeight);
  enc_.in_b = reg("enc.in.b", 1, dm, ParamInfo::kZero);
  enc_.pos = reg("enc.pos", tokens(), dm, ParamInfo::kPos);
  for (int l = 0; l < cfg_.enc_layers; ++l) enc_.blocks.push_back(reg_block("enc.block" + std::to_string(l)));
  enc_.lnf_g = reg("enc.ln_f.g", 1, dm, ParamInfo::kOne);
  enc_.lnf_b = reg("enc.ln_f.b", 1, dm, ParamInfo::kZero);
  enc_.out_w = reg("enc.to_latent.w", dm, cfg_.d_latent, ParamInfo::kWeight);
  enc_.out_b = reg("enc.to_latent.b", 1, cfg_.d_latent, ParamInfo::kZero);

  dec_.in_w = reg("dec.from_latent.w", cfg_.d_latent, dm, ParamInfo::kWeight);
  dec_.in_b = reg("dec.from_latent.b", 1, dm, ParamInfo::kZero);
  dec_.pos = reg("dec.pos", tokens(), dm, ParamInfo::kPos);
  for (int l = 0; l < cfg_.dec_layers; ++l) dec_.blocks.push_back(reg_block("dec.block" + std::to_string(l)));
  dec_.lnf_g = reg("dec.ln_f.g", 1, dm, ParamInfo::kOne);
  dec_.lnf_b = reg("dec.ln_f.b", 1, dm, ParamInfo::kZero);
  dec_.out_w = reg("dec.out.w", dm, pw, ParamInfo::kWeight);
  dec_.out_b = reg("dec.out.b", 1, pw, ParamInfo::kZero);
}

int Taae::reg(const std::string& name, int rows, int cols, ParamInfo::Kind kind) {
  infos_.push_back(ParamInfo{name, rows, cols, kind});
  return static_cast<int>(infos_.size()) - 1;
}

Taae::BlockParams Taae::reg_block(const std::string& prefix) {
  const int dm = cfg_.d_model;
  const int hidden = dm * cfg_.mlp_ratio;
  BlockParams b{};
  b.ln1_g = reg(prefix + ".ln1.g", 1, dm, ParamInfo::kOne);
  b.ln1_b = reg(prefix + ".ln1.b", 1, dm, ParamInfo::kZero);
  b.conv_w = reg(prefix + ".conv.w", cfg_.conv_kernel, dm, ParamInfo::kWeight);
  b.conv_b = reg(prefix + ".conv.b", 1, dm, ParamInfo::kZero);
  b.ln2_g = reg(prefix + ".ln2.g", 1, dm, ParamInfo::kOne);
  b.ln2_b = reg(prefix + ".ln2.b", 1, dm, ParamInfo::kZero);
  b.wq = reg(prefix + ".attn.wq", dm, dm, ParamInfo::kWeight);
  b.bq = reg(prefix + ".attn.bq", 1, dm, ParamInfo::kZero);
  b.wk = reg(prefix + ".attn.wk", dm, dm, ParamInfo::kWeight);
  b.bk = reg(prefix + ".attn.bk", 1, dm, ParamInfo::kZero);
  b.wv = reg(prefix + ".attn.wv", dm, dm, ParamInfo::kWeight);
  b.bv = reg(prefix + ".attn.bv", 1, dm, ParamInfo::kZero);
  b.wo = reg(prefix + ".attn.wo", dm, dm, ParamInfo::kWeight);
  b.bo = reg(prefix + ".attn.bo", 1, dm, ParamInfo::kZero);
  b.ln3_g = reg(prefix + ".ln3.g", 1, dm, ParamInfo::kOne);
  b.ln3_b = reg(prefix + ".ln3.b", 1, dm, ParamInfo::kZero);
  b.w1 = reg(prefix + ".mlp.w1", dm, hidden, ParamInfo::kWeight);
  b.b1 = reg(prefix + ".mlp.b1", 1, hidden, ParamInfo::kZero);
  b.w2 = reg(prefix + ".mlp.w2", hidden, dm, ParamInfo::kWeight);
  b.b2 = reg(prefix + ".mlp.b2", 1, dm, ParamInfo::kZero);
  return b;
}

ad::ParamSet Taae::init_params(std::uint64_t seed) const {
  ad::ParamSet ps;
  for (std::size_t i = 0; i < infos_.size(); ++i) {
    const auto& info = infos_[i];
    auto rng = make_rng(seed, 0x7AAEu, i);
    Mat v(info.rows, info.cols);
    switch (info.kind) {
      case ParamInfo::kZero: v.setZero(); break;
      case ParamInfo::kOne: v.setOnes(); break;
      case ParamInfo::kWeight: {
        const double sd = 1.0 / std::sqrt(static_cast<double>(info.rows));
        for (Eigen::Index k = 0; k < v.size(); ++k) v.data()[k] = sd * gaussian(rng);
        break;
      }
      case ParamInfo::kPos:
        for (Eigen::Index k = 0; k < v.size(); ++k) v.data()[k] = 0.02 * gaussian(rng);
        break;
    }
    ps.add(info.name, std::move(v));
  }
  return ps;
}

ad::Var Taae::act(ad::Var x) const {
  return cfg_.activation == Activation::kTanh ? ad::tanh(x) : ad::gelu(x);
}

ad::Var Taae::run_block(const std::vector<ad::Var>& p, const BlockParams& b, ad::Var x, int batch) const {
  auto at = [&](int i) { return p[static_cast<std::size_t>(i)]; };
  ad::Var h = ad::layer_norm(x, at(b.ln1_g), at(b.ln1_b));
  h = ad::add_row(ad::depthwise_conv(h, at(b.conv_w), batch), at(b.conv_b));
  x = ad::add(x, h);

  h = ad::layer_norm(x, at(b.ln2_g), at(b.ln2_b));
  ad::Var q = ad::add_row(ad::matmul(h, at(b.wq)), at(b.bq));
  ad::Var k = ad::add_row(ad::matmul(h, at(b.wk)), at(b.bk));
  ad::Var v = ad::add_row(ad::matmul(h, at(b.wv)), at(b.bv));
  ad::Var a = ad::attention(q, k, v, cfg_.heads, full_mask_, batch);
  x = ad::add(x, ad::add_row(ad::matmul(a, at(b.wo)), at(b.bo)));

  h = ad::layer_norm(x, at(b.ln3_g), at(b.ln3_b));
  h = act(ad::add_row(ad::matmul(h, at(b.w1)), at(b.b1)));
  return ad::add(x, ad::add_row(ad::matmul(h, at(b.w2)), at(b.b2)));
}

ad::Var Taae::encode(const std::vector<ad::Var>& p, ad::Var patches, int batch) const {
  require(p.size() == infos_.size(), "TAAE parameter count mismatch");
  require(batch >= 1 && patches.rows() == static_cast<Eigen::Index>(batch) * tokens() &&
              patches.cols() == spec_.patch_width(),
          "encoder input is " + std::to_string(patches.rows()) + "x" + std::to_string(patches.cols()) +
              ", expected " + std::to_string(batch * tokens()) + "x" + std::to_string(spec_.patch_width()));
  auto at = [&](int i) { return p[static_cast<std::size_t>(i)]; };
  ad::Var x = ad::add_row(ad::matmul(patches, at(enc_.in_w)), at(enc_.in_b));
  x = ad::add_tiled(x, at(enc_.pos));
  for (const auto& b : enc_.blocks) x = run_block(p, b, x, batch);
  x = ad::layer_norm(x, at(enc_.lnf_g), at(enc_.lnf_b));
  x = ad::block_left(x, pool_);
  return ad::add_row(ad::matmul(x, at(enc_.out_w)), at(enc_.out_b));
}

ad::Var Taae::decode(const std::vector<ad::Var>& p, ad::Var latents, int batch) const {
  require(p.size() == infos_.size(), "TAAE parameter count mismatch");
  require(batch >= 1 && latents.rows() == static_cast<Eigen::Index>(batch) * cfg_.cells() &&
              latents.cols() == cfg_.d_latent,
          "decoder input is " + std::to_string(latents.rows()) + "x" + std::to_string(latents.cols()) +
              ", expected " + std::to_string(batch * cfg_.cells()) + "x" + std::to_string(cfg_.d_latent));
  auto at = [&](int i) { return p[static_cast<std::size_t>(i)]; };
  ad::Var x = ad::add_row(ad::matmul(latents, at(dec_.in_w)), at(dec_.in_b));
  x = ad::block_left(x, unpool_);
  x = ad::add_tiled(x, at(dec_.pos));
  for (const auto& b : dec_.blocks) x = run_block(p, b, x, batch);
  x = ad::layer_norm(x, at(dec_.lnf_g), at(dec_.lnf_b));
  return ad::tanh(ad::add_row(ad::matmul(x, at(dec_.out_w)), at(dec_.out_b)));
}

Mat Taae::encode_values(const ad::ParamSet& params, const Mat& patches, int batch) const {
  ad::Tape tape;
  const auto p = params.bind(tape, false);
  return encode(p, tape.constant(patches), batch).value();
}

Mat Taae::decode_values(const ad::ParamSet& params, const Mat& latents, int batch) const {
  ad::Tape tape;
  const auto p = params.bind(tape, false);
  return decode(p, tape.constant(latents), batch).value();
}

}  // namespace actcodec
