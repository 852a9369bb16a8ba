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
#include <string>
#include <vector>

#include "actcodec/autograd.hpp"
#include "actcodec/patchify.hpp"

namespace actcodec {

enum class Activation { kGelu, kTanh };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation a);

struct TaaeConfig {
  int d_latent = 16;
  int d_model = 64;
  int enc_layers = 2;
  int dec_layers = 2;
  int heads = 4;
  int conv_kernel = 3;
  int cells_h = 1;
  int cells_a = 7;
  int mlp_ratio = 2;
  Activation activation = Activation::kGelu;

  int cells() const { return cells_h * cells_a; }
  /// Throws InputError if the latent grid has more cells than the spec has
  /// patches, heads do not divide d_model, or the kernel is even.
  void validate(const PatchSpec& spec) const;
};

/// Adaptive mean pooling from the m x n patch-token grid to the C_h x C_a
/// latent grid. Separable (time windows x group windows) when C_h <= m and
/// C_a <= n, otherwise adaptive over the flattened token sequence.
Mat pooling_matrix(const PatchSpec& spec, int cells_h, int cells_a);

/// Decoder-side upsampling: every token averages the cells whose pooling
/// window covers it.
Mat unpooling_matrix(const Mat& pool);

/// Transformer Action AutoEncoder. Each block is pre-norm
/// [depthwise conv over patch tokens] -> [multi-head self-attention] -> [MLP],
/// each wrapped in a residual connection.
class Taae {
 public:
  Taae(TaaeConfig cfg, PatchSpec spec);

  const TaaeConfig& config() const { return cfg_; }
  const PatchSpec& spec() const { return spec_; }
  int tokens() const { return spec_.patch_count(); }

  /// Scaled-Gaussian weights (std 1/sqrt(fan_in)), zero biases, unit norms.
  ad::ParamSet init_params(std::uint64_t seed) const;

  /// patches: (batch * m*n) x (h*d) -> latents (batch * C_h*C_a) x d_latent.
  ad::Var encode(const std::vector<ad::Var>& p, ad::Var patches, int batch) const;
  /// latents -> patch values in [-1, 1].
  ad::Var decode(const std::vector<ad::Var>& p, ad::Var latents, int batch) const;

  /// Gradient-free conveniences over a parameter set.
  Mat encode_values(const ad::ParamSet& params, const Mat& patches, int batch) const;
  Mat decode_values(const ad::ParamSet& params, const Mat& latents, int batch) const;

 private:
  struct BlockParams {
    int ln1_g, ln1_b, conv_w, conv_b;
    int ln2_g, ln2_b, wq, bq, wk, bk, wv, bv, wo, bo;
    int ln3_g, ln3_b, w1, b1, w2, b2;
  };
  struct Layout {
    int in_w, in_b, pos;
    std::vector<BlockParams> blocks;
    int lnf_g, lnf_b, out_w, out_b;
  };
  struct ParamInfo {
    std::string name;
    int rows, cols;
    enum Kind { kWeight, kZero, kOne, kPos } kind;
  };

  int reg(const std::string& name, int rows, int cols, ParamInfo::Kind kind);
  BlockParams reg_block(const std::string& prefix);
  ad::Var run_block(const std::vector<ad::Var>& p, const BlockParams& b, ad::Var x, int batch) const;
  ad::Var act(ad::Var x) const;

  TaaeConfig cfg_;
  PatchSpec spec_;
  Mat pool_;
  Mat unpool_;
  BoolMat full_mask_;
  std::vector<ParamInfo> infos_;
  Layout enc_{};
  Layout dec_{};
};

}  // namespace actcodec
