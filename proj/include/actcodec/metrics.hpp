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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "actcodec/rvq.hpp"
#include "actcodec/trajectory.hpp"

namespace actcodec {

/// How the reconstruction error of one action is measured for VRR.
enum class VrrMode {
  kPerTimestep,  ///< L1 norm over the D-vector of each timestep
  kPerScalar,    ///< every scalar counted on its own
};

VrrMode parse_vrr_mode(const std::string& name);
std::string vrr_mode_name(VrrMode m);

struct VrrReport {
  double sigma = 0.0;
  std::int64_t n_total = 0;
  std::int64_t n_valid = 0;
  double vrr = 0.0;
};

/// Fraction of actions whose reconstruction error is < sigma. Rows marked
/// invalid in the truth chunk are skipped.
VrrReport vrr(std::span<const Mat> recons, std::span<const ActionChunk> truths, double sigma,
              VrrMode mode = VrrMode::kPerTimestep);

/// Raw scalars per discrete token, (H * D) / N.
double compression_ratio(int horizon, int dims, const CodeTensor& codes);
double compression_ratio(int horizon, int dims, int tokens);

struct CodeStats {
  int vocab_size = 0;
  std::int64_t total = 0;
  double usage_pct = 0.0;
  double f_max_pct = 0.0;
  double entropy_norm = 0.0;
  std::vector<std::pair<double, int>> active_above;  ///< threshold -> tokens with frequency > threshold
};

inline const std::vector<double> kDefaultActiveThresholds = {1e-3, 2e-2};

/// Statistics of a token histogram (one count per vocabulary entry).
CodeStats histogram_stats(std::span<const std::int64_t> counts,
                          const std::vector<double>& thresholds = kDefaultActiveThresholds);

/// Histogram over a stream of code tensors. With `stage_offsets`, stage s
/// uses vocabulary range [s*K, (s+1)*K); otherwise all stages share K ids.
std::vector<std::int64_t> code_histogram(std::span<const CodeTensor> codes, int codebook_size,
                                         bool stage_offsets = true);

CodeStats code_stats(std::span<const CodeTensor> codes, int codebook_size,
                     const std::vector<double>& thresholds = kDefaultActiveThresholds, bool stage_offsets = true);

/// Per-dimension uniform binning over [-1, 1]; row-major token order.
std::vector<int> binning_tokenize(const Mat& chunk, int bins);
Mat binning_detokenize(std::span<const int> tokens, int horizon, int dims, int bins);

using Reconstructor = std::function<Mat(const Mat&)>;

struct VrrTable {
  std::vector<double> sigmas;
  std::vector<VrrReport> overall;
  std::map<std::string, std::vector<VrrReport>> per_embodiment;
};

VrrTable vrr_sweep(std::span<const Mat> recons, std::span<const ActionChunk> corpus, const std::vector<double>& sigmas,
                   VrrMode mode = VrrMode::kPerTimestep);
VrrTable vrr_sweep(const Reconstructor& reconstruct, std::span<const ActionChunk> corpus,
                   const std::vector<double>& sigmas, VrrMode mode = VrrMode::kPerTimestep);

}  // namespace actcodec
