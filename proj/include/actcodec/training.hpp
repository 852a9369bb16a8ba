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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "actcodec/autograd.hpp"
#include "actcodec/codec.hpp"
#include "actcodec/dct.hpp"
#include "actcodec/trajectory.hpp"

namespace actcodec {

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double adam_eps = 1e-8;
  int warmup_steps = 1000;
  int total_steps = 20000;
  double grad_clip = 1.0;
  int batch_size = 32;
  double commit_weight = 0.25;  ///< lambda
  std::uint64_t seed = 0;
  int checkpoint_every = 1000;

  void validate() const;
  std::string to_text() const;
  static TrainConfig from_text(const std::string& text);
};

/// Linear warmup reaching lr after `warmup_steps` steps (step 0 trains at
/// lr / warmup), then cosine decay to zero at `total_steps`.
double lr_at(const TrainConfig& cfg, std::int64_t step);

/// Scales `grads` in place so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_global_norm(std::vector<Mat>& grads, double max_norm);

struct AdamState {
  std::vector<Mat> m;
  std::vector<Mat> v;
  std::int64_t t = 0;
};

/// One decoupled-weight-decay Adam update; weight decay applies to every
/// parameter as p <- p * (1 - lr * wd) - lr * adam_direction.
void adamw_step(ad::ParamSet& params, const std::vector<Mat>& grads, AdamState& state, const TrainConfig& cfg,
                double lr);

struct LossVars {
  ad::Var total;
  ad::Var time_l1;
  ad::Var dct_l1;
  ad::Var commitment;
};

/// Reconstruction objective on stacked chunks. recon and target are
/// (chunks * H) x D; `weights` is 1 on valid entries and 0 on padding.
/// The time term averages |a - a_hat| over valid entries, the DCT term
/// averages |DCT(a) - DCT(a_hat)| over all coefficients of the masked
/// signals, and the commitment term is the mean of (z - sg(z_q))^2.
LossVars vq_loss(ad::Var recon, const Mat& target, const Mat& weights, ad::Var z, const Mat& zq, double lambda,
                 const DctPlan& dct);

struct LossTerms {
  double total = 0.0;
  double time_l1 = 0.0;
  double dct_l1 = 0.0;
  double commitment = 0.0;
};

/// Value-only loss on a single chunk.
LossTerms vq_loss_values(const ActionChunk& chunk, const Mat& recon, const Mat& z, const Mat& zq, double lambda);

/// A stacked training batch.
struct TrainBatch {
  int size = 0;
  Mat patches;  ///< (size * m*n) x (h*d)
  Mat targets;  ///< (size * H) x D
  Mat weights;  ///< (size * H) x D
};

TrainBatch make_batch(const std::vector<const ActionChunk*>& chunks, const PatchSpec& spec);

/// Frozen quantization used by finite-difference checks: the decoder sees
/// z + offset and the commitment target is zq, both held constant.
struct FrozenQuantization {
  Mat offset;
  Mat zq;
};

struct ForwardPass {
  LossVars loss;
  ad::Var z;
  ad::Var recon;
  RowEncoding encoding;  ///< empty when a frozen quantization was supplied
};

ForwardPass forward_loss(ad::Tape& tape, const std::vector<ad::Var>& params, const Codec& codec,
                         const TrainBatch& batch, double lambda, const FrozenQuantization* frozen = nullptr);

struct StepRecord {
  std::int64_t step = 0;
  double lr = 0.0;
  LossTerms loss;
  double grad_norm = 0.0;
  double alive_pct = 0.0;  ///< codes with EMA cluster size >= threshold, before reinit
  double batch_usage_pct = 0.0;
  int revived = 0;

  std::string to_json() const;
};

/// Drives Algorithm-style VQ training: gradient step, then EMA update, then
/// dead-code reinit. Batch sampling and reinit draws are derived from
/// (seed, step), so a resumed run continues exactly.
class Trainer {
 public:
  Trainer(Codec codec, TrainConfig cfg, std::vector<ActionChunk> corpus);
  Trainer(Codec codec, TrainConfig cfg, std::vector<ActionChunk> corpus, const TrainingState& resume);

  /// Throws RuntimeFailure with a JSON diagnostic on a non-finite loss.
  StepRecord step();

  std::int64_t steps_done() const { return step_; }
  const Codec& codec() const { return codec_; }
  Codec& codec() { return codec_; }
  const TrainConfig& config() const { return cfg_; }
  TrainingState state() const;

  /// Indices of the chunks used at `step` (exposed for tests).
  std::vector<int> batch_indices(std::int64_t step) const;

 private:
  Codec codec_;
  TrainConfig cfg_;
  std::vector<ActionChunk> corpus_;
  AdamState adam_;
  std::int64_t step_ = 0;
};

struct RunOptions {
  std::filesystem::path out_dir;
  bool resume = true;
  /// Called after every step (progress reporting); may be empty.
  std::function<void(const StepRecord&)> on_step;
};

struct RunResult {
  Codec codec;
  std::int64_t steps = 0;
  bool resumed = false;
};

/// Trains until cfg.total_steps, writing `latest.ckpt`, `step_<n>.ckpt`
/// every checkpoint_every steps, and one JSON line per step to
/// `metrics.jsonl`. Resumes from `latest.ckpt` when present.
RunResult run_training(const std::vector<ActionChunk>& corpus, const TrainConfig& cfg, const CodecConfig& codec_cfg,
                       const RunOptions& opts);

}  // namespace actcodec
