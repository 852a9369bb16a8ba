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

#include "actcodec/bar.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "actcodec/training.hpp"

namespace actcodec {

std::string BlockSchedule::to_text() const {
  return std::to_string(n_codebooks) + "/" + std::to_string(cells_h) + "/" + std::to_string(cells_a) + "/" +
         std::to_string(block_size);
}

BlockSchedule build_schedule(int n_codebooks, int cells_h, int cells_a, int block_size) {
  require(n_codebooks >= 1 && cells_h >= 1 && cells_a >= 1, "schedule needs a non-empty code tensor");
  require(block_size >= 1, "block size must be at least 1");
  const int n = n_codebooks * cells_h * cells_a;
  require(block_size <= n, "block size " + std::to_string(block_size) + " exceeds the " + std::to_string(n) +
                               " tokens of the code tensor");
  BlockSchedule s;
  s.n_codebooks = n_codebooks;
  s.cells_h = cells_h;
  s.cells_a = cells_a;
  s.block_size = block_size;
  s.n_blocks = (n + block_size - 1) / block_size;
  for (int st = 0; st < n_codebooks; ++st) {
    for (int h = 0; h < cells_h; ++h) {
      for (int a = 0; a < cells_a; ++a) s.flat_order.push_back({st, h, a});
    }
  }
  for (int j = 0; j < s.n_blocks; ++j) s.block_bounds.emplace_back(j * block_size, std::min(n, (j + 1) * block_size));
  return s;
}

BlockSchedule parse_schedule(const std::string& text) {
  std::vector<int> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '/')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stoi(item, &used));
      require(used == item.size(), "");
    } catch (const std::exception&) {
      throw InputError("schedule '" + text + "' is not n_codebooks/cells_h/cells_a/block_size");
    }
  }
  require(parts.size() == 4, "schedule '" + text + "' is not n_codebooks/cells_h/cells_a/block_size");
  return build_schedule(parts[0], parts[1], parts[2], parts[3]);
}

std::vector<int> flatten_codes(const CodeTensor& codes, const BlockSchedule& sched) {
  require(codes.stages == sched.n_codebooks && codes.cells_h == sched.cells_h && codes.cells_a == sched.cells_a,
          "code tensor shape does not match the schedule " + sched.to_text());
  std::vector<int> out;
  out.reserve(sched.flat_order.size());
  for (const auto& c : sched.flat_order) out.push_back(codes.at(c.stage, c.h, c.a));
  return out;
}

CodeTensor unflatten_codes(const std::vector<int>& flat, const BlockSchedule& sched) {
  require(static_cast<int>(flat.size()) == sched.tokens(), "flat code count does not match the schedule");
  CodeTensor t(sched.n_codebooks, sched.cells_h, sched.cells_a);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const auto& c = sched.flat_order[i];
    t.at(c.stage, c.h, c.a) = flat[i];
  }
  return t;
}

BoolMat build_mask(int prefix_len, const BlockSchedule& sched) {
  require(prefix_len >= 0, "prefix length must be non-negative");
  const int l = sched.padded_tokens();
  const int s = prefix_len + l;
  BoolMat m = BoolMat::Constant(s, s, false);
  for (int i = 0; i < prefix_len; ++i) {
    for (int j = 0; j <= i; ++j) m(i, j) = true;
  }
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < prefix_len; ++j) m(prefix_len + i, j) = true;
    for (int j = 0; j < l; ++j) m(prefix_len + i, prefix_len + j) = sched.block_of(j) <= sched.block_of(i);
  }
  return m;
}

BoolMat causal_mask(int size) {
  BoolMat m = BoolMat::Constant(size, size, false);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j <= i; ++j) m(i, j) = true;
  }
  return m;
}

PositionPlan spacing_positions(int n, int k, PositionMode mode, std::uint64_t seed, int start) {
  require(n >= 1, "position plan needs at least one token");
  require(k >= 0, "spacing jitter bound k must be non-negative, got " + std::to_string(k));
  PositionPlan plan;
  plan.jitter = k;
  plan.mode = mode;
  plan.positions.resize(static_cast<std::size_t>(n));
  plan.positions[0] = start;
  auto rng = make_rng(seed, 0x5AC1u, 0);
  for (int i = 1; i < n; ++i) {
    const int gap = mode == PositionMode::kInfer ? 2 : 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(k) + 1));
    plan.positions[static_cast<std::size_t>(i)] = plan.positions[static_cast<std::size_t>(i - 1)] + gap;
  }
  return plan;
}

DecodeMode parse_decode_mode(const std::string& name) {
  if (name == "ar") return DecodeMode::kAr;
  if (name == "bar") return DecodeMode::kBar;
  throw InputError("unknown decode mode '" + name + "' (expected ar or bar)");
}

std::string decode_mode_name(DecodeMode m) { return m == DecodeMode::kAr ? "ar" : "bar"; }

int pass_count(const BlockSchedule& sched, DecodeMode mode) {
  return mode == DecodeMode::kAr ? sched.tokens() : sched.n_blocks;
}

ToyPolicy::ToyPolicy(ToyPolicyConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  require(cfg_.codebook_size >= 2 && cfg_.n_codebooks >= 1, "toy policy needs K >= 2 and N_c >= 1");
  require(cfg_.d_model % cfg_.heads == 0 && (cfg_.d_model / cfg_.heads) % 2 == 0,
          "toy policy head width must be even and divide d_model");
  require(cfg_.prefix_len >= 1 && cfg_.context_dim >= 1 && cfg_.layers >= 0 && cfg_.jitter >= 0,
          "invalid toy policy config");
  const int d = cfg_.d_model;
  const int hidden = d * cfg_.mlp_ratio;
  std::uint64_t counter = 0;
  auto gauss = [&](int r, int c, double sd) {
    auto rng = make_rng(seed, 0x70Eu, counter++);
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sd * gaussian(rng);
    return m;
  };
  params_.add("embed", gauss(cfg_.vocab(), d, 0.1));
  params_.add("ctx.w", gauss(cfg_.context_dim, cfg_.prefix_len * d, 1.0 / std::sqrt(cfg_.context_dim)));
  params_.add("ctx.b", Mat::Zero(1, cfg_.prefix_len * d));
  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string p = "block" + std::to_string(l);
    params_.add(p + ".ln1.g", Mat::Ones(1, d));
    params_.add(p + ".ln1.b", Mat::Zero(1, d));
    for (const char* w : {"wq", "wk", "wv", "wo"}) params_.add(p + ".attn." + w, gauss(d, d, 1.0 / std::sqrt(d)));
    params_.add(p + ".ln2.g", Mat::Ones(1, d));
    params_.add(p + ".ln2.b", Mat::Zero(1, d));
    params_.add(p + ".mlp.w1", gauss(d, hidden, 1.0 / std::sqrt(d)));
    params_.add(p + ".mlp.b1", Mat::Zero(1, hidden));
    params_.add(p + ".mlp.w2", gauss(hidden, d, 1.0 / std::sqrt(hidden)));
    params_.add(p + ".mlp.b2", Mat::Zero(1, d));
  }
  params_.add("ln_f.g", Mat::Ones(1, d));
  params_.add("ln_f.b", Mat::Zero(1, d));
  // Zero head: uniform logits at initialization.
  params_.add("head.w", Mat::Zero(d, cfg_.codebook_size));
  params_.add("head.b", Mat::Zero(1, cfg_.codebook_size));
}

ad::Var ToyPolicy::forward(ad::Tape& tape, const std::vector<ad::Var>& p, const Mat& contexts,
                           const std::vector<int>& action_inputs, const Eigen::MatrixXi& positions,
                           const BoolMat& mask, int batch) const {
  const int d = cfg_.d_model;
  const int pl = cfg_.prefix_len;
  std::size_t i = 0;
  auto next = [&]() { return p[i++]; };
  const ad::Var embed = next();
  const ad::Var ctx_w = next();
  const ad::Var ctx_b = next();

  ad::Var prefix = ad::add_row(ad::matmul(tape.constant(contexts), ctx_w), ctx_b);
  std::vector<int> reshape(static_cast<std::size_t>(batch * pl * d));
  std::iota(reshape.begin(), reshape.end(), 0);
  prefix = ad::gather(prefix, reshape, static_cast<Eigen::Index>(batch) * pl, d);
  ad::Var x = ad::concat_blocks(prefix, ad::embedding(embed, action_inputs), batch);

  for (int l = 0; l < cfg_.layers; ++l) {
    const ad::Var g1 = next(), b1 = next(), wq = next(), wk = next(), wv = next(), wo = next();
    const ad::Var g2 = next(), b2 = next(), w1 = next(), c1 = next(), w2 = next(), c2 = next();
    ad::Var h = ad::layer_norm(x, g1, b1);
    const ad::Var q = ad::rope(ad::matmul(h, wq), positions, cfg_.heads);
    const ad::Var k = ad::rope(ad::matmul(h, wk), positions, cfg_.heads);
    const ad::Var v = ad::matmul(h, wv);
    x = ad::add(x, ad::matmul(ad::attention(q, k, v, cfg_.heads, mask, batch), wo));
    h = ad::gelu(ad::add_row(ad::matmul(ad::layer_norm(x, g2, b2), w1), c1));
    x = ad::add(x, ad::add_row(ad::matmul(h, w2), c2));
  }
  const ad::Var gf = next(), bf = next(), hw = next(), hb = next();
  return ad::add_row(ad::matmul(ad::layer_norm(x, gf, bf), hw), hb);
}

std::pair<std::vector<int>, std::vector<int>> teacher_forcing_sequence(const ToyPolicyConfig& cfg,
                                                                       const CodeTensor& codes,
                                                                       const BlockSchedule& sched, DecodeMode mode) {
  require(sched.n_codebooks == cfg.n_codebooks, "schedule codebook count does not match the policy");
  const auto flat = flatten_codes(codes, sched);
  const int n = sched.tokens();
  const int k = cfg.codebook_size;
  auto token = [&](int i) {
    const int c = flat[static_cast<std::size_t>(i)];
    require(c >= 0 && c < k, "code " + std::to_string(c) + " outside the policy vocabulary");
    return sched.flat_order[static_cast<std::size_t>(i)].stage * k + c;
  };
  std::vector<int> inputs;
  std::vector<int> targets;
  if (mode == DecodeMode::kAr) {
    inputs.push_back(cfg.bo_blk());
    for (int i = 0; i + 1 < n; ++i) inputs.push_back(token(i));
    targets = flat;
    return {inputs, targets};
  }
  const int b = sched.block_size;
  const int l = sched.padded_tokens();
  for (int i = 0; i < l; ++i) {
    targets.push_back(i < n ? flat[static_cast<std::size_t>(i)] : -1);
    if (i < b) {
      inputs.push_back(cfg.bo_blk());
    } else {
      inputs.push_back(i - b < n ? token(i - b) : cfg.eo_blk());
    }
  }
  return {inputs, targets};
}

ad::Var ToyPolicy::loss(ad::Tape& tape, const std::vector<ad::Var>& p, const std::vector<ToyExample>& batch,
                        const BlockSchedule& sched, DecodeMode mode,
                        const std::vector<std::vector<int>>& action_positions) const {
  require(!batch.empty(), "empty policy batch");
  require(action_positions.size() == batch.size(), "one position list per example required");
  const int pl = cfg_.prefix_len;
  const int l = mode == DecodeMode::kAr ? sched.tokens() : sched.padded_tokens();
  const int s = pl + l;
  const int nb = static_cast<int>(batch.size());
  Mat contexts(nb, cfg_.context_dim);
  std::vector<int> inputs;
  std::vector<int> targets;
  Eigen::MatrixXi positions(nb, s);
  for (int e = 0; e < nb; ++e) {
    const auto& ex = batch[static_cast<std::size_t>(e)];
    require(ex.context.size() == cfg_.context_dim, "context has " + std::to_string(ex.context.size()) +
                                                       " entries, expected " + std::to_string(cfg_.context_dim));
    contexts.row(e) = ex.context.transpose();
    auto [in, tg] = teacher_forcing_sequence(cfg_, ex.codes, sched, mode);
    inputs.insert(inputs.end(), in.begin(), in.end());
    targets.insert(targets.end(), static_cast<std::size_t>(pl), -1);
    targets.insert(targets.end(), tg.begin(), tg.end());
    const auto& ap = action_positions[static_cast<std::size_t>(e)];
    require(static_cast<int>(ap.size()) == l, "action position count does not match the sequence");
    for (int i = 0; i < pl; ++i) positions(e, i) = i;
    for (int i = 0; i < l; ++i) positions(e, pl + i) = ap[static_cast<std::size_t>(i)];
  }
  const BoolMat mask = mode == DecodeMode::kAr ? causal_mask(s) : build_mask(pl, sched);
  const ad::Var logits = forward(tape, p, contexts, inputs, positions, mask, nb);
  return ad::cross_entropy(logits, targets);
}

double ToyPolicy::loss_value(const std::vector<ToyExample>& batch, const BlockSchedule& sched, DecodeMode mode) const {
  const int l = mode == DecodeMode::kAr ? sched.tokens() : sched.padded_tokens();
  const auto pos = spacing_positions(l, 0, PositionMode::kInfer, 0, cfg_.prefix_len).positions;
  ad::Tape tape;
  const auto p = params_.bind(tape, false);
  return loss(tape, p, batch, sched, mode, std::vector<std::vector<int>>(batch.size(), pos)).scalar();
}

Mat ToyPolicy::logits(const Vec& context, const std::vector<int>& action_inputs,
                      const std::vector<int>& action_positions, const BoolMat& mask) const {
  require(context.size() == cfg_.context_dim, "context has " + std::to_string(context.size()) +
                                                  " entries, expected " + std::to_string(cfg_.context_dim));
  const int pl = cfg_.prefix_len;
  const int s = pl + static_cast<int>(action_inputs.size());
  Eigen::MatrixXi positions(1, s);
  for (int i = 0; i < pl; ++i) positions(0, i) = i;
  for (std::size_t i = 0; i < action_inputs.size(); ++i) positions(0, pl + static_cast<int>(i)) = action_positions[i];
  ad::Tape tape;
  const auto p = params_.bind(tape, false);
  return forward(tape, p, Mat(context.transpose()), action_inputs, positions, mask, 1).value();
}

std::vector<double> toy_policy_train(ToyPolicy& policy, const std::vector<ToyExample>& corpus,
                                     const BlockSchedule& sched, DecodeMode mode, const ToyTrainOptions& opts) {
  require(!corpus.empty(), "toy policy corpus is empty");
  require(opts.steps >= 1 && opts.batch_size >= 1, "toy policy training needs steps and batch size >= 1");
  for (const auto& ex : corpus) {
    require(ex.codes.stages == sched.n_codebooks && ex.codes.cells_h == sched.cells_h &&
                ex.codes.cells_a == sched.cells_a,
            "codec code tensor does not match the schedule " + sched.to_text());
  }
  TrainConfig tc;
  tc.lr = opts.lr;
  tc.weight_decay = 0.0;
  tc.total_steps = opts.steps;
  tc.warmup_steps = std::min(100, opts.steps / 10);
  tc.grad_clip = 1.0;
  AdamState adam;
  const auto& cfg = policy.config();
  const int l = mode == DecodeMode::kAr ? sched.tokens() : sched.padded_tokens();
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(opts.steps));
  for (int step = 0; step < opts.steps; ++step) {
    auto rng = make_rng(opts.seed, 0x70E7u, static_cast<std::uint64_t>(step));
    std::vector<ToyExample> batch;
    std::vector<std::vector<int>> positions;
    const auto n = corpus.size();
    const auto b = static_cast<std::size_t>(opts.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < b; ++i) {
      std::size_t pick;
      if (n >= b) {
        std::swap(order[i], order[i + uniform_index(rng, n - i)]);
        pick = order[i];
      } else {
        pick = uniform_index(rng, n);
      }
      batch.push_back(corpus[pick]);
      positions.push_back(spacing_positions(l, cfg.jitter, PositionMode::kTrain, rng(), cfg.prefix_len).positions);
    }
    ad::Tape tape;
    const auto p = policy.params().bind(tape, true);
    const ad::Var loss = policy.loss(tape, p, batch, sched, mode, positions);
    require(std::isfinite(loss.scalar()), "toy policy loss became non-finite at step " + std::to_string(step));
    tape.backward(loss);
    std::vector<Mat> grads;
    for (const auto& v : p) grads.push_back(tape.grad(v.id));
    clip_global_norm(grads, tc.grad_clip);
    adamw_step(policy.params(), grads, adam, tc, lr_at(tc, step));
    curve.push_back(loss.scalar());
  }
  return curve;
}

namespace {

int sample_token(const Eigen::Ref<const Eigen::RowVectorXd>& logits, const Sampler& s, std::mt19937_64& rng) {
  const int k = static_cast<int>(logits.size());
  if (s.top_k == 1) {
    int best = 0;
    for (int j = 1; j < k; ++j) {
      if (logits(j) > logits(best)) best = j;
    }
    return best;
  }
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  const int keep = std::min(k, s.top_k);
  std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(), [&](int a, int b) {
    return logits(a) > logits(b) || (logits(a) == logits(b) && a < b);
  });
  const double mx = logits(idx[0]);
  std::vector<double> w(static_cast<std::size_t>(keep));
  double total = 0.0;
  for (int j = 0; j < keep; ++j) {
    w[static_cast<std::size_t>(j)] = std::exp((logits(idx[static_cast<std::size_t>(j)]) - mx) / s.temperature);
    total += w[static_cast<std::size_t>(j)];
  }
  double u = uniform01(rng) * total;
  for (int j = 0; j < keep; ++j) {
    u -= w[static_cast<std::size_t>(j)];
    if (u < 0.0) return idx[static_cast<std::size_t>(j)];
  }
  return idx[static_cast<std::size_t>(keep - 1)];
}

}  // namespace

Rollout decode_rollout(const ToyPolicy& policy, const Vec& context, const BlockSchedule& sched, DecodeMode mode,
                       const Sampler& sampler) {
  require(sampler.top_k >= 1, "top-k sampler needs k >= 1, got " + std::to_string(sampler.top_k));
  require(sampler.temperature > 0.0, "sampling temperature must be positive");
  const auto& cfg = policy.config();
  require(sched.n_codebooks == cfg.n_codebooks, "schedule codebook count does not match the policy");
  const int n = sched.tokens();
  const int k = cfg.codebook_size;
  const int pl = cfg.prefix_len;
  auto rng = make_rng(sampler.seed, 0x5A3Du, 0);
  std::vector<int> flat;
  std::vector<int> inputs;
  Rollout r;
  auto stage_of = [&](int i) { return sched.flat_order[static_cast<std::size_t>(i)].stage; };

  if (mode == DecodeMode::kAr) {
    const auto pos = spacing_positions(n, 0, PositionMode::kInfer, 0, pl).positions;
    const BoolMat full = causal_mask(pl + n);
    inputs.push_back(cfg.bo_blk());
    for (int i = 0; i < n; ++i) {
      const int s = pl + static_cast<int>(inputs.size());
      const Mat lg = policy.logits(context, inputs, pos, full.topLeftCorner(s, s));
      ++r.passes;
      const int c = sample_token(lg.row(s - 1), sampler, rng);
      flat.push_back(c);
      inputs.push_back(stage_of(i) * k + c);
    }
  } else {
    const int b = sched.block_size;
    const int l = sched.padded_tokens();
    const auto pos = spacing_positions(l, 0, PositionMode::kInfer, 0, pl).positions;
    const BoolMat full = build_mask(pl, sched);
    inputs.assign(static_cast<std::size_t>(b), cfg.bo_blk());
    for (int j = 0; j < sched.n_blocks; ++j) {
      const int s = pl + static_cast<int>(inputs.size());
      const Mat lg = policy.logits(context, inputs, pos, full.topLeftCorner(s, s));
      ++r.passes;
      for (int t = 0; t < b; ++t) {
        const int i = j * b + t;
        if (i < n) {
          const int c = sample_token(lg.row(pl + i), sampler, rng);
          flat.push_back(c);
          if (j + 1 < sched.n_blocks) inputs.push_back(stage_of(i) * k + c);
        } else if (j + 1 < sched.n_blocks) {
          inputs.push_back(cfg.eo_blk());
        }
      }
    }
  }
  r.codes = unflatten_codes(flat, sched);
  return r;
}

LatencyBreakdown latency_model(double per_pass_ms, int passes,
                               const std::vector<std::pair<std::string, double>>& extras) {
  require(per_pass_ms > 0.0, "per-pass latency must be positive");
  require(passes >= 1, "pass count must be at least 1");
  LatencyBreakdown out;
  double total = 0.0;
  for (const auto& [name, ms] : extras) {
    require(ms >= 0.0, "latency entry '" + name + "' is negative");
    out.rows.emplace_back(name, ms);
    total += ms;
  }
  out.passes_ms = per_pass_ms * passes;
  out.rows.emplace_back("forward_passes", out.passes_ms);
  out.total_ms = total + out.passes_ms;
  return out;
}

}  // namespace actcodec
