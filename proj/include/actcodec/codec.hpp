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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "actcodec/autograd.hpp"
#include "actcodec/patchify.hpp"
#include "actcodec/rvq.hpp"
#include "actcodec/taae.hpp"

namespace actcodec {

struct CodecConfig {
  PatchSpec patch;
  TaaeConfig taae;
  RvqConfig rvq;

  /// Total discrete tokens per chunk, N = N_c * C_h * C_a.
  int tokens_per_chunk() const { return rvq.stages * taae.cells(); }
  void validate() const;
  /// "key value" lines for the TAAE and RVQ fields; the patch spec is kept
  /// separately in its own text form.
  std::string to_text() const;
  static CodecConfig from_text(const std::string& codec_text, const std::string& patch_text);
};

/// Frozen-or-training codec: TAAE parameters plus the RVQ bank.
class Codec {
 public:
  Codec(CodecConfig cfg, std::uint64_t seed);
  Codec(CodecConfig cfg, ad::ParamSet params, CodebookBank bank);

  const CodecConfig& config() const { return cfg_; }
  const Taae& model() const { return model_; }
  const ad::ParamSet& params() const { return params_; }
  ad::ParamSet& params() { return params_; }
  const CodebookBank& bank() const { return bank_; }
  CodebookBank& bank() { return bank_; }

  /// H x D chunk values -> codes. Always runs one chunk per forward pass so
  /// results do not depend on how callers batch their inputs.
  CodeTensor encode(const Mat& chunk) const;
  Mat decode(const CodeTensor& codes) const;
  /// decode(encode(chunk)).
  Mat reconstruct(const Mat& chunk) const;

  /// Continuous latents before quantization, C_h*C_a x d_latent.
  Mat latents(const Mat& chunk) const;

 private:
  void check_chunk(const Mat& chunk) const;

  CodecConfig cfg_;
  Taae model_;
  ad::ParamSet params_;
  CodebookBank bank_;
};

/// Optimizer and schedule state stored alongside a codec during training.
struct TrainingState {
  std::int64_t step = 0;  ///< number of completed steps
  std::vector<Mat> adam_m;
  std::vector<Mat> adam_v;
  std::string train_config_text;
};

// Checkpoint container: magic "ACTCKPT1", u32 version, codec config text,
// patch spec text, named f64 parameters, per-stage codes and EMA state, and an
// optional training section.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Codec& codec,
                     const TrainingState* training = nullptr);

struct LoadedCheckpoint {
  Codec codec;
  std::optional<TrainingState> training;
};

/// Throws InputError on a missing file, wrong magic or version mismatch.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace actcodec
