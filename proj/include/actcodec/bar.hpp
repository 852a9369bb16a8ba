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
#include <utility>
#include <vector>

#include "actcodec/autograd.hpp"
#include "actcodec/rvq.hpp"

namespace actcodec {

struct CellIndex {
  int stage = 0;
  int h = 0;
  int a = 0;
  bool operator==(const CellIndex&) const = default;
};

/// Block-wise decoding plan over an N_c x C_h x C_a code tensor.
struct BlockSchedule {
  int n_codebooks = 0;
  int cells_h = 0;
  int cells_a = 0;
  int block_size = 0;
  int n_blocks = 0;
  std::vector<CellIndex> flat_order;           ///< codebook-major, then horizon, then action group
  std::vector<std::pair<int, int>> block_bounds;  ///< [start, end) into flat_order

  int tokens() const { return static_cast<int>(flat_order.size()); }
  /// Action sequence length including end-token padding of the last block.
  int padded_tokens() const { return n_blocks * block_size; }
  int block_of(int i) const { return i / block_size; }

  /// "n_codebooks/cells_h/cells_a/block_size".
  std::string to_text() const;
};

/// Throws InputError when B < 1 or B > N.
BlockSchedule build_schedule(int n_codebooks, int cells_h, int cells_a, int block_size);
BlockSchedule parse_schedule(const std::string& text);

/// Flattens a code tensor along the schedule order (and back).
std::vector<int> flatten_codes(const CodeTensor& codes, const BlockSchedule& sched);
CodeTensor unflatten_codes(const std::vector<int>& flat, const BlockSchedule& sched);

/// S x S visibility, S = prefix_len + padded action tokens. Prefix tokens
/// are causal among themselves; action token i sees every prefix token and
/// every action token j with block(j) <= block(i).
BoolMat build_mask(int prefix_len, const BlockSchedule& sched);
BoolMat causal_mask(int size);

enum class PositionMode { kTrain, kInfer };

struct PositionPlan {
  std::vector<int> positions;
  int jitter = 0;
  PositionMode mode = PositionMode::kInfer;
};

/// p_0 = start; train: p_i = p_{i-1} + 1 + U{0..k}; infer: p_i = p_{i-1} + 2.
PositionPlan spacing_positions(int n, int k, PositionMode mode, std::uint64_t seed, int start = 0);

enum class DecodeMode { kAr, kBar };

DecodeMode parse_decode_mode(const std::string& name);
std::string decode_mode_name(DecodeMode m);

struct ToyPolicyConfig {
  int codebook_size = 256;  ///< K, output classes
  int n_codebooks = 3;
  int context_dim = 8;
  int prefix_len = 2;
  int d_model = 32;
  int layers = 2;
  int heads = 2;
  int mlp_ratio = 2;
  int jitter = 2;  ///< spacing augmentation bound k during training

  int vocab() const { return n_codebooks * codebook_size + 2; }
  int bo_blk() const { return n_codebooks * codebook_size; }
  int eo_blk() const { return n_codebooks * codebook_size + 1; }
};

struct ToyExample {
  Vec context;
  CodeTensor codes;
};

/// Small decoder-only transformer over stage-offset code tokens. A learned
/// projection of the context vector fills `prefix_len` prefix slots.
class ToyPolicy {
 public:
  ToyPolicy(ToyPolicyConfig cfg, std::uint64_t seed);

  const ToyPolicyConfig& config() const { return cfg_; }
  ad::ParamSet& params() { return params_; }
  const ad::ParamSet& params() const { return params_; }

  /// Mean teacher-forced cross-entropy per predicted token. BAR feeds
  /// <BoBlk> x B as block 0 and block j-1's targets as block j under the
  /// block mask; AR feeds the one-step-shifted sequence under a causal mask.
  ad::Var loss(ad::Tape& tape, const std::vector<ad::Var>& p, const std::vector<ToyExample>& batch,
               const BlockSchedule& sched, DecodeMode mode, const std::vector<std::vector<int>>& action_positions) const;

  double loss_value(const std::vector<ToyExample>& batch, const BlockSchedule& sched, DecodeMode mode) const;

  /// Logits (rows = sequence positions) for one example's input tokens.
  Mat logits(const Vec& context, const std::vector<int>& action_inputs, const std::vector<int>& action_positions,
             const BoolMat& mask) const;

 private:
  ad::Var forward(ad::Tape& tape, const std::vector<ad::Var>& p, const Mat& contexts,
                  const std::vector<int>& action_inputs, const Eigen::MatrixXi& positions, const BoolMat& mask,
                  int batch) const;

  ToyPolicyConfig cfg_;
  ad::ParamSet params_;
};

/// Input tokens and targets for one example (targets -1 on padding).
std::pair<std::vector<int>, std::vector<int>> teacher_forcing_sequence(const ToyPolicyConfig& cfg,
                                                                       const CodeTensor& codes,
                                                                       const BlockSchedule& sched, DecodeMode mode);

struct ToyTrainOptions {
  int steps = 2000;
  int batch_size = 8;
  double lr = 3e-3;
  std::uint64_t seed = 0;
};

/// Returns the per-step training loss.
std::vector<double> toy_policy_train(ToyPolicy& policy, const std::vector<ToyExample>& corpus,
                                     const BlockSchedule& sched, DecodeMode mode, const ToyTrainOptions& opts);

struct Sampler {
  int top_k = 1;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

struct Rollout {
  CodeTensor codes;
  int passes = 0;
};

/// BAR emits one block per forward pass (J passes); AR one token per pass
/// (N passes). Throws InputError for top_k < 1 or temperature <= 0.
Rollout decode_rollout(const ToyPolicy& policy, const Vec& context, const BlockSchedule& sched, DecodeMode mode,
                       const Sampler& sampler);

int pass_count(const BlockSchedule& sched, DecodeMode mode);

struct LatencyBreakdown {
  std::vector<std::pair<std::string, double>> rows;
  double passes_ms = 0.0;
  double total_ms = 0.0;
};

/// total = sum(extras) + per_pass_ms * passes. An accounting model only.
LatencyBreakdown latency_model(double per_pass_ms, int passes,
                               const std::vector<std::pair<std::string, double>>& extras);

}  // namespace actcodec
