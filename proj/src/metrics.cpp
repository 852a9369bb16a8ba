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

#include "actcodec/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace actcodec {

VrrMode parse_vrr_mode(const std::string& name) {
  if (name == "timestep") return VrrMode::kPerTimestep;
  if (name == "scalar") return VrrMode::kPerScalar;
  throw InputError("unknown VRR mode '" + name + "' (expected timestep or scalar)");
}

std::string vrr_mode_name(VrrMode m) { return m == VrrMode::kPerScalar ? "scalar" : "timestep"; }

VrrReport vrr(std::span<const Mat> recons, std::span<const ActionChunk> truths, double sigma, VrrMode mode) {
  require(sigma > 0.0, "VRR tolerance sigma must be positive, got " + std::to_string(sigma));
  require(recons.size() == truths.size(), "VRR needs one reconstruction per chunk (" + std::to_string(recons.size()) +
                                              " vs " + std::to_string(truths.size()) + ")");
  VrrReport r;
  r.sigma = sigma;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const Mat& a = recons[i];
    const ActionChunk& t = truths[i];
    require(a.rows() == t.horizon() && a.cols() == t.dims(), "VRR shape mismatch at chunk " + std::to_string(i));
    for (Eigen::Index row = 0; row < t.horizon(); ++row) {
      if (!t.valid[static_cast<std::size_t>(row)]) continue;
      if (mode == VrrMode::kPerTimestep) {
        r.n_total += 1;
        if ((a.row(row) - t.values.row(row)).cwiseAbs().sum() < sigma) r.n_valid += 1;
      } else {
        for (Eigen::Index d = 0; d < t.dims(); ++d) {
          r.n_total += 1;
          if (std::abs(a(row, d) - t.values(row, d)) < sigma) r.n_valid += 1;
        }
      }
    }
  }
  r.vrr = r.n_total > 0 ? static_cast<double>(r.n_valid) / static_cast<double>(r.n_total) : 0.0;
  return r;
}

double compression_ratio(int horizon, int dims, int tokens) {
  require(horizon >= 1 && dims >= 1 && tokens >= 1, "compression ratio needs positive shapes");
  return static_cast<double>(horizon) * dims / tokens;
}

double compression_ratio(int horizon, int dims, const CodeTensor& codes) {
  return compression_ratio(horizon, dims, static_cast<int>(codes.size()));
}

CodeStats histogram_stats(std::span<const std::int64_t> counts, const std::vector<double>& thresholds) {
  require(!counts.empty(), "empty vocabulary");
  CodeStats st;
  st.vocab_size = static_cast<int>(counts.size());
  std::int64_t used = 0;
  std::int64_t peak = 0;
  for (auto c : counts) {
    require(c >= 0, "negative histogram count");
    st.total += c;
    used += c > 0 ? 1 : 0;
    peak = std::max(peak, c);
  }
  require(st.total > 0, "code statistics need at least one token");
  const double total = static_cast<double>(st.total);
  st.usage_pct = 100.0 * static_cast<double>(used) / st.vocab_size;
  st.f_max_pct = 100.0 * static_cast<double>(peak) / total;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  st.entropy_norm = st.vocab_size > 1 ? h / std::log(static_cast<double>(st.vocab_size)) : 0.0;
  for (double th : thresholds) {
    int n = 0;
    for (auto c : counts) n += static_cast<double>(c) / total > th ? 1 : 0;
    st.active_above.emplace_back(th, n);
  }
  return st;
}

std::vector<std::int64_t> code_histogram(std::span<const CodeTensor> codes, int codebook_size, bool stage_offsets) {
  require(!codes.empty(), "code statistics need a non-empty stream");
  require(codebook_size >= 1, "codebook size must be positive");
  const int stages = codes.front().stages;
  std::vector<std::int64_t> hist(static_cast<std::size_t>(stage_offsets ? stages * codebook_size : codebook_size), 0);
  for (const auto& c : codes) {
    require(c.stages == stages, "code tensors in one stream must share the stage count");
    for (int s = 0; s < c.stages; ++s) {
      for (int h = 0; h < c.cells_h; ++h) {
        for (int a = 0; a < c.cells_a; ++a) {
          const int idx = c.at(s, h, a);
          require(idx >= 0 && idx < codebook_size, "code index " + std::to_string(idx) + " outside [0, " +
                                                       std::to_string(codebook_size) + ")");
          hist[static_cast<std::size_t>(stage_offsets ? s * codebook_size + idx : idx)] += 1;
        }
      }
    }
  }
  return hist;
}

CodeStats code_stats(std::span<const CodeTensor> codes, int codebook_size, const std::vector<double>& thresholds,
                     bool stage_offsets) {
  const auto hist = code_histogram(codes, codebook_size, stage_offsets);
  return histogram_stats(hist, thresholds);
}

std::vector<int> binning_tokenize(const Mat& chunk, int bins) {
  require(bins >= 2, "binning needs at least 2 bins");
  std::vector<int> out(static_cast<std::size_t>(chunk.size()));
  for (Eigen::Index i = 0; i < chunk.size(); ++i) {
    const double v = std::clamp(chunk.data()[i], -1.0, 1.0);
    const int b = static_cast<int>(std::floor((v + 1.0) * 0.5 * bins));
    out[static_cast<std::size_t>(i)] = std::clamp(b, 0, bins - 1);
  }
  return out;
}

Mat binning_detokenize(std::span<const int> tokens, int horizon, int dims, int bins) {
  require(bins >= 2, "binning needs at least 2 bins");
  require(static_cast<std::int64_t>(tokens.size()) == static_cast<std::int64_t>(horizon) * dims,
          "binning token count does not match the chunk shape");
  Mat out(horizon, dims);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    require(tokens[i] >= 0 && tokens[i] < bins, "bin index out of range");
    out.data()[i] = -1.0 + (tokens[i] + 0.5) * 2.0 / bins;
  }
  return out;
}

VrrTable vrr_sweep(std::span<const Mat> recons, std::span<const ActionChunk> corpus, const std::vector<double>& sigmas,
                   VrrMode mode) {
  require(!sigmas.empty(), "VRR sweep needs at least one sigma");
  VrrTable t;
  t.sigmas = sigmas;
  std::map<std::string, std::pair<std::vector<Mat>, std::vector<ActionChunk>>> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& g = groups[corpus[i].embodiment_tag];
    g.first.push_back(recons[i]);
    g.second.push_back(corpus[i]);
  }
  for (double s : sigmas) {
    t.overall.push_back(vrr(recons, corpus, s, mode));
    for (const auto& [tag, g] : groups) t.per_embodiment[tag].push_back(vrr(g.first, g.second, s, mode));
  }
  return t;
}

VrrTable vrr_sweep(const Reconstructor& reconstruct, std::span<const ActionChunk> corpus,
                   const std::vector<double>& sigmas, VrrMode mode) {
  std::vector<Mat> recons;
  recons.reserve(corpus.size());
  for (const auto& c : corpus) recons.push_back(reconstruct(c.values));
  return vrr_sweep(recons, corpus, sigmas, mode);
}

}  // namespace actcodec
