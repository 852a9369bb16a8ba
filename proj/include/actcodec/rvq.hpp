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
#include <span>
#include <vector>

#include "actcodec/common.hpp"

namespace actcodec {

struct RvqConfig {
  int stages = 3;           ///< N_c
  int codebook_size = 256;  ///< K
  int dim = 16;             ///< d_latent
  double decay = 0.99;
  double epsilon = 1e-5;    ///< Laplace smoothing of EMA cluster sizes
  double dead_threshold = 1.0;

  void validate() const;
};

/// One quantizer stage: K code vectors plus EMA statistics.
struct Codebook {
  Mat codes;                        ///< K x dim
  Vec cluster_size;                 ///< EMA of per-code assignment counts
  Mat embed_sum;                    ///< EMA of per-code residual sums
  std::vector<std::int64_t> usage;  ///< assignments since last reset

  int size() const { return static_cast<int>(codes.rows()); }
  int dim() const { return static_cast<int>(codes.cols()); }
};

struct CodebookBank {
  RvqConfig config;
  std::vector<Codebook> stages;

  CodebookBank() = default;
  /// Gaussian code vectors with standard deviation `init_scale`; EMA state
  /// starts at zero so every code counts as dead until it is first assigned.
  CodebookBank(const RvqConfig& cfg, std::uint64_t seed, double init_scale = 0.1);

  void reset_usage();
  std::int64_t total_usage(int stage) const;
};

/// C_h x C_a latent cells, each a row of width d_latent. Cell (h, a) is row
/// h * C_a + a.
struct LatentGrid {
  int cells_h = 0;
  int cells_a = 0;
  Mat values;

  int cells() const { return cells_h * cells_a; }
};

/// N_c x C_h x C_a code indices, 0-based.
struct CodeTensor {
  int stages = 0;
  int cells_h = 0;
  int cells_a = 0;
  std::vector<std::int32_t> indices;

  CodeTensor() = default;
  CodeTensor(int n_stages, int ch, int ca)
      : stages(n_stages), cells_h(ch), cells_a(ca),
        indices(static_cast<std::size_t>(n_stages * ch * ca), 0) {}

  std::size_t size() const { return indices.size(); }
  std::int32_t& at(int s, int h, int a) { return indices[flat(s, h, a)]; }
  std::int32_t at(int s, int h, int a) const { return indices[flat(s, h, a)]; }
  std::size_t flat(int s, int h, int a) const {
    return static_cast<std::size_t>((s * cells_h + h) * cells_a + a);
  }
  bool operator==(const CodeTensor&) const = default;
};

struct NearestCode {
  int index = -1;
  double distance = 0.0;  ///< squared Euclidean
};

/// Exhaustive squared-Euclidean nearest neighbour; ties go to the lowest index.
NearestCode quantize_one(std::span<const double> vec, const Mat& codes);
NearestCode quantize_one(std::span<const double> vec, const Codebook& book);

/// Residual cascade over a block of latent rows (one row per cell).
struct RowEncoding {
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> indices;  ///< rows x stages
  Mat quantized;                  ///< sum of selected code vectors (compensated)
  std::vector<Mat> stage_inputs;  ///< residual r_i entering stage i
  Mat residual;                   ///< r_{N_c + 1}
};

RowEncoding rvq_encode_rows(const Mat& z, const CodebookBank& bank);
Mat rvq_decode_rows(const Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& indices,
                    const CodebookBank& bank);

struct RvqEncoding {
  CodeTensor codes;
  LatentGrid quantized;
  std::vector<Mat> stage_inputs;
  Mat residual;
};

RvqEncoding rvq_encode(const LatentGrid& z, const CodebookBank& bank);
/// Throws InputError on an index outside [0, K).
LatentGrid rvq_decode(const CodeTensor& codes, const CodebookBank& bank);

/// Residuals assigned to codes of one stage during a training step.
struct StageAssignments {
  std::vector<int> indices;
  Mat residuals;  ///< indices.size() x dim
};

/// EMA codebook step. Per-code sums are accumulated in a canonical
/// (lexicographic) order, so the result does not depend on batch order.
void ema_update(CodebookBank& bank, std::span<const StageAssignments> per_stage);

/// Replaces every code whose EMA cluster size is below `threshold` with a
/// vector drawn from that stage's pool. Returns the number of revived codes.
int reinit_dead_codes(CodebookBank& bank, std::span<const Mat> pools, double threshold,
                      std::uint64_t seed);

/// Forward value of the straight-through estimator (equals z_q). The gradient
/// side lives in ad::straight_through.
LatentGrid ste_passthrough(const LatentGrid& z, const LatentGrid& z_q);

/// Neumaier-compensated accumulation used by both encode and decode so that
/// decode(encode(z).codes) reproduces the encoder's z_q bit for bit.
class CompensatedRows {
 public:
  CompensatedRows(Eigen::Index rows, Eigen::Index cols) : sum_(Mat::Zero(rows, cols)), comp_(Mat::Zero(rows, cols)) {}
  void add(Eigen::Index row, const Eigen::Ref<const Eigen::RowVectorXd>& v);
  Mat result() const { return sum_ + comp_; }

 private:
  Mat sum_;
  Mat comp_;
};

}  // namespace actcodec
