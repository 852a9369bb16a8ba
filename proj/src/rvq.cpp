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

#include "actcodec/rvq.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace actcodec {

void RvqConfig::validate() const {
  require(stages >= 1, "RVQ needs at least one stage");
  require(codebook_size >= 2, "RVQ codebook size must be >= 2");
  require(dim >= 1, "RVQ latent dimension must be >= 1");
  require(decay >= 0.0 && decay < 1.0, "EMA decay must be in [0, 1)");
  require(epsilon >= 0.0, "Laplace epsilon must be >= 0");
}

CodebookBank::CodebookBank(const RvqConfig& cfg, std::uint64_t seed, double init_scale) : config(cfg) {
  cfg.validate();
  for (int s = 0; s < cfg.stages; ++s) {
    auto rng = make_rng(seed, 0xC0DEB00Cu, static_cast<std::uint64_t>(s));
    Codebook b;
    b.codes.resize(cfg.codebook_size, cfg.dim);
    for (Eigen::Index i = 0; i < b.codes.size(); ++i) b.codes.data()[i] = init_scale * gaussian(rng);
    b.cluster_size = Vec::Zero(cfg.codebook_size);
    b.embed_sum = Mat::Zero(cfg.codebook_size, cfg.dim);
    b.usage.assign(static_cast<std::size_t>(cfg.codebook_size), 0);
    stages.push_back(std::move(b));
  }
}

void CodebookBank::reset_usage() {
  for (auto& b : stages) std::fill(b.usage.begin(), b.usage.end(), 0);
}

std::int64_t CodebookBank::total_usage(int stage) const {
  const auto& u = stages.at(static_cast<std::size_t>(stage)).usage;
  return std::accumulate(u.begin(), u.end(), std::int64_t{0});
}

NearestCode quantize_one(std::span<const double> vec, const Mat& codes) {
  require(codes.rows() > 0, "cannot quantize against an empty codebook");
  require(static_cast<Eigen::Index>(vec.size()) == codes.cols(),
          "quantize_one: vector has " + std::to_string(vec.size()) + " entries, codebook dimension is " +
              std::to_string(codes.cols()));
  NearestCode best;
  const Eigen::Index dim = codes.cols();
  for (Eigen::Index j = 0; j < codes.rows(); ++j) {
    const double* e = codes.data() + j * dim;
    double dist = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double diff = vec[static_cast<std::size_t>(k)] - e[k];
      dist += diff * diff;
    }
    if (best.index < 0 || dist < best.distance) {
      best.index = static_cast<int>(j);
      best.distance = dist;
    }
  }
  return best;
}

NearestCode quantize_one(std::span<const double> vec, const Codebook& book) {
  return quantize_one(vec, book.codes);
}

void CompensatedRows::add(Eigen::Index row, const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double s = sum_(row, k);
    const double t = s + v(k);
    if (std::abs(s) >= std::abs(v(k))) {
      comp_(row, k) += (s - t) + v(k);
    } else {
      comp_(row, k) += (v(k) - t) + s;
    }
    sum_(row, k) = t;
  }
}

RowEncoding rvq_encode_rows(const Mat& z, const CodebookBank& bank) {
  const int n_stages = static_cast<int>(bank.stages.size());
  require(n_stages >= 1, "RVQ bank has no stages");
  require(z.cols() == bank.stages.front().dim(),
          "latent width " + std::to_string(z.cols()) + " does not match codebook dimension " +
              std::to_string(bank.stages.front().dim()));
  RowEncoding enc;
  enc.indices.resize(z.rows(), n_stages);
  CompensatedRows acc(z.rows(), z.cols());
  Mat r = z;
  for (int s = 0; s < n_stages; ++s) {
    const auto& book = bank.stages[static_cast<std::size_t>(s)];
    enc.stage_inputs.push_back(r);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const auto nn = quantize_one(std::span<const double>(r.data() + i * r.cols(), static_cast<std::size_t>(r.cols())), book);
      enc.indices(i, s) = nn.index;
      acc.add(i, book.codes.row(nn.index));
      r.row(i) -= book.codes.row(nn.index);
    }
  }
  enc.quantized = acc.result();
  enc.residual = std::move(r);
  return enc;
}

Mat rvq_decode_rows(const Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& indices,
                    const CodebookBank& bank) {
  const int n_stages = static_cast<int>(bank.stages.size());
  require(indices.cols() == n_stages, "code rows have " + std::to_string(indices.cols()) +
                                          " stages, bank has " + std::to_string(n_stages));
  CompensatedRows acc(indices.rows(), bank.stages.front().dim());
  for (int s = 0; s < n_stages; ++s) {
    const auto& book = bank.stages[static_cast<std::size_t>(s)];
    for (Eigen::Index i = 0; i < indices.rows(); ++i) {
      const int idx = indices(i, s);
      require(idx >= 0 && idx < book.size(), "code index " + std::to_string(idx) + " at stage " +
                                                 std::to_string(s) + " outside [0, " +
                                                 std::to_string(book.size()) + ")");
      acc.add(i, book.codes.row(idx));
    }
  }
  return acc.result();
}

RvqEncoding rvq_encode(const LatentGrid& z, const CodebookBank& bank) {
  require(z.values.rows() == z.cells(), "latent grid rows do not match its cell count");
  auto rows = rvq_encode_rows(z.values, bank);
  RvqEncoding out;
  out.codes = CodeTensor(static_cast<int>(bank.stages.size()), z.cells_h, z.cells_a);
  for (int s = 0; s < out.codes.stages; ++s) {
    for (int c = 0; c < z.cells(); ++c) out.codes.indices[static_cast<std::size_t>(s * z.cells() + c)] = rows.indices(c, s);
  }
  out.quantized = LatentGrid{z.cells_h, z.cells_a, std::move(rows.quantized)};
  out.stage_inputs = std::move(rows.stage_inputs);
  out.residual = std::move(rows.residual);
  return out;
}

LatentGrid rvq_decode(const CodeTensor& codes, const CodebookBank& bank) {
  require(codes.stages == static_cast<int>(bank.stages.size()),
          "code tensor has " + std::to_string(codes.stages) + " stages, bank has " +
              std::to_string(bank.stages.size()));
  require(codes.size() == static_cast<std::size_t>(codes.stages * codes.cells_h * codes.cells_a),
          "code tensor size does not match its shape");
  const int cells = codes.cells_h * codes.cells_a;
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> idx(cells, codes.stages);
  for (int s = 0; s < codes.stages; ++s) {
    for (int c = 0; c < cells; ++c) idx(c, s) = codes.indices[static_cast<std::size_t>(s * cells + c)];
  }
  return LatentGrid{codes.cells_h, codes.cells_a, rvq_decode_rows(idx, bank)};
}

void ema_update(CodebookBank& bank, std::span<const StageAssignments> per_stage) {
  require(per_stage.size() <= bank.stages.size(), "more assignment groups than stages");
  const double decay = bank.config.decay;
  const double eps = bank.config.epsilon;
  for (std::size_t s = 0; s < per_stage.size(); ++s) {
    auto& book = bank.stages[s];
    const auto& as = per_stage[s];
    const int k = book.size();
    const Eigen::Index dim = book.dim();
    require(as.residuals.rows() == static_cast<Eigen::Index>(as.indices.size()) &&
                (as.indices.empty() || as.residuals.cols() == dim),
            "assignment residual shape mismatch at stage " + std::to_string(s));

    // Bucket rows by code, then sum each bucket in lexicographic row order.
    std::vector<std::vector<Eigen::Index>> buckets(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < as.indices.size(); ++i) {
      const int j = as.indices[i];
      require(j >= 0 && j < k, "assignment index out of range at stage " + std::to_string(s));
      buckets[static_cast<std::size_t>(j)].push_back(static_cast<Eigen::Index>(i));
    }
    Vec counts = Vec::Zero(k);
    Mat sums = Mat::Zero(k, dim);
    for (int j = 0; j < k; ++j) {
      auto& rows = buckets[static_cast<std::size_t>(j)];
      std::sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double* ra = as.residuals.data() + a * dim;
        const double* rb = as.residuals.data() + b * dim;
        return std::lexicographical_compare(ra, ra + dim, rb, rb + dim);
      });
      for (Eigen::Index r : rows) sums.row(j) += as.residuals.row(r);
      counts(j) = static_cast<double>(rows.size());
      book.usage[static_cast<std::size_t>(j)] += static_cast<std::int64_t>(rows.size());
    }

    book.cluster_size = decay * book.cluster_size + (1.0 - decay) * counts;
    book.embed_sum = decay * book.embed_sum + (1.0 - decay) * sums;
    const double n = book.cluster_size.sum();
    for (int j = 0; j < k; ++j) {
      if (book.cluster_size(j) <= 0.0) continue;  // never assigned: keep its vector
      const double smoothed = (book.cluster_size(j) + eps) / (n + k * eps) * n;
      book.codes.row(j) = book.embed_sum.row(j) / smoothed;
    }
  }
}

int reinit_dead_codes(CodebookBank& bank, std::span<const Mat> pools, double threshold,
                      std::uint64_t seed) {
  require(pools.size() <= bank.stages.size(), "more reinit pools than stages");
  int revived = 0;
  for (std::size_t s = 0; s < pools.size(); ++s) {
    auto& book = bank.stages[s];
    std::vector<int> dead;
    for (int j = 0; j < book.size(); ++j) {
      if (book.cluster_size(j) < threshold) dead.push_back(j);
    }
    if (dead.empty()) continue;
    const Mat& pool = pools[s];
    require(pool.rows() > 0, "dead codes at stage " + std::to_string(s) + " but the reinit pool is empty");
    require(pool.cols() == book.dim(), "reinit pool width mismatch at stage " + std::to_string(s));
    auto rng = make_rng(seed, 0xDEADC0DEu, s);
    // Draw without replacement while the pool lasts.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(pool.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      std::swap(order[i], order[i + uniform_index(rng, order.size() - i)]);
    }
    for (std::size_t i = 0; i < dead.size(); ++i) {
      const Eigen::Index src = i < order.size() ? order[i] : static_cast<Eigen::Index>(uniform_index(rng, order.size()));
      const int j = dead[i];
      book.codes.row(j) = pool.row(src);
      book.cluster_size(j) = threshold;
      book.embed_sum.row(j) = pool.row(src) * threshold;
      ++revived;
    }
  }
  return revived;
}

LatentGrid ste_passthrough(const LatentGrid& z, const LatentGrid& z_q) {
  require(z.cells_h == z_q.cells_h && z.cells_a == z_q.cells_a && z.values.rows() == z_q.values.rows() &&
              z.values.cols() == z_q.values.cols(),
          "straight-through: latent shapes differ");
  return z_q;
}

}  // namespace actcodec
