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

#include "actcodec/training.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace actcodec {

namespace {

constexpr std::uint64_t kBatchStream = 0xBA7C4u;
constexpr std::uint64_t kReinitStream = 0x4E1A17u;

std::map<std::string, std::string> parse_pairs(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key)) continue;
    require(static_cast<bool>(ls >> value), "train config line '" + line + "' has no value");
    kv[key] = value;
  }
  return kv;
}

}  // namespace

void TrainConfig::validate() const {
  require(lr > 0.0 && std::isfinite(lr), "lr must be positive");
  require(weight_decay >= 0.0, "weight_decay must be non-negative");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "betas must lie in [0, 1)");
  require(adam_eps > 0.0, "adam_eps must be positive");
  require(total_steps >= 1, "total_steps must be at least 1");
  require(warmup_steps >= 0 && warmup_steps <= total_steps, "warmup_steps must lie in [0, total_steps]");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(commit_weight >= 0.0, "commit_weight must be non-negative");
  require(checkpoint_every >= 1, "checkpoint_every must be at least 1");
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "lr " << lr << "\nweight_decay " << weight_decay << "\nbeta1 " << beta1 << "\nbeta2 " << beta2
     << "\nadam_eps " << adam_eps << "\nwarmup_steps " << warmup_steps << "\ntotal_steps " << total_steps
     << "\ngrad_clip " << grad_clip << "\nbatch_size " << batch_size << "\ncommit_weight " << commit_weight
     << "\nseed " << seed << "\ncheckpoint_every " << checkpoint_every << "\n";
  return os.str();
}

TrainConfig TrainConfig::from_text(const std::string& text) {
  const auto kv = parse_pairs(text);
  TrainConfig c;
  auto num = [&](const char* key, double& out) {
    if (auto it = kv.find(key); it != kv.end()) out = std::stod(it->second);
  };
  auto integer = [&](const char* key, int& out) {
    if (auto it = kv.find(key); it != kv.end()) out = std::stoi(it->second);
  };
  num("lr", c.lr);
  num("weight_decay", c.weight_decay);
  num("beta1", c.beta1);
  num("beta2", c.beta2);
  num("adam_eps", c.adam_eps);
  integer("warmup_steps", c.warmup_steps);
  integer("total_steps", c.total_steps);
  num("grad_clip", c.grad_clip);
  integer("batch_size", c.batch_size);
  num("commit_weight", c.commit_weight);
  if (auto it = kv.find("seed"); it != kv.end()) c.seed = std::stoull(it->second);
  integer("checkpoint_every", c.checkpoint_every);
  return c;
}

double lr_at(const TrainConfig& cfg, std::int64_t step) {
  if (step < 0) return 0.0;
  if (step < cfg.warmup_steps) return cfg.lr * static_cast<double>(step + 1) / cfg.warmup_steps;
  if (step >= cfg.total_steps) return 0.0;
  const double span = static_cast<double>(cfg.total_steps - cfg.warmup_steps);
  const double progress = static_cast<double>(step - cfg.warmup_steps) / span;
  return cfg.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

double clip_global_norm(std::vector<Mat>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& g : grads) g *= s;
  }
  return norm;
}

void adamw_step(ad::ParamSet& params, const std::vector<Mat>& grads, AdamState& state, const TrainConfig& cfg,
                double lr) {
  require(grads.size() == params.size(), "gradient count does not match parameters");
  if (state.m.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m.push_back(Mat::Zero(params.value(i).rows(), params.value(i).cols()));
      state.v.push_back(Mat::Zero(params.value(i).rows(), params.value(i).cols()));
    }
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  const double shrink = 1.0 - lr * cfg.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Mat& m = state.m[i];
    Mat& v = state.v[i];
    const Mat& g = grads[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    const Mat dir = ((m / bc1).array() / ((v / bc2).array().sqrt() + cfg.adam_eps)).matrix();
    Mat& p = params.value(i);
    p = p * shrink - lr * dir;
  }
}

LossVars vq_loss(ad::Var recon, const Mat& target, const Mat& weights, ad::Var z, const Mat& zq, double lambda,
                 const DctPlan& dct) {
  ad::Tape& tape = *recon.tape;
  require(recon.rows() == target.rows() && recon.cols() == target.cols(), "reconstruction/target shape mismatch");
  require(recon.rows() % dct.length() == 0, "reconstruction rows are not a multiple of the horizon");
  LossVars out;
  out.time_l1 = ad::l1_mean(recon, tape.constant(target), weights);

  const ad::Var masked = ad::mul(recon, tape.constant(weights));
  const ad::Var coeffs = ad::block_left(masked, dct.basis());
  const Mat masked_target = target.cwiseProduct(weights);
  Mat target_coeffs(target.rows(), target.cols());
  const Eigen::Index h = dct.length();
  for (Eigen::Index b = 0; b < target.rows() / h; ++b) {
    target_coeffs.middleRows(b * h, h).noalias() = dct.basis() * masked_target.middleRows(b * h, h);
  }
  out.dct_l1 = ad::l1_mean(coeffs, tape.constant(target_coeffs), Mat::Ones(target.rows(), target.cols()));

  out.commitment = ad::sq_mean(z, zq);
  out.total = ad::add(ad::add(out.time_l1, out.dct_l1), ad::scale(out.commitment, lambda));
  return out;
}

LossTerms vq_loss_values(const ActionChunk& chunk, const Mat& recon, const Mat& z, const Mat& zq, double lambda) {
  require(chunk.values.rows() == recon.rows() && chunk.values.cols() == recon.cols(),
          "reconstruction shape differs from chunk");
  require(z.rows() == zq.rows() && z.cols() == zq.cols(), "latent shapes differ");
  Mat weights(chunk.horizon(), chunk.dims());
  for (Eigen::Index t = 0; t < chunk.horizon(); ++t) {
    weights.row(t).setConstant(chunk.valid[static_cast<std::size_t>(t)] ? 1.0 : 0.0);
  }
  ad::Tape tape;
  const DctPlan dct(static_cast<int>(chunk.horizon()));
  const LossVars v = vq_loss(tape.constant(recon), chunk.values, weights, tape.constant(z), zq, lambda, dct);
  return {v.total.scalar(), v.time_l1.scalar(), v.dct_l1.scalar(), v.commitment.scalar()};
}

TrainBatch make_batch(const std::vector<const ActionChunk*>& chunks, const PatchSpec& spec) {
  require(!chunks.empty(), "empty training batch");
  TrainBatch b;
  b.size = static_cast<int>(chunks.size());
  const Eigen::Index l = spec.patch_count();
  const Eigen::Index h = spec.horizon;
  b.patches.resize(b.size * l, spec.patch_width());
  b.targets.resize(b.size * h, spec.dims);
  b.weights.resize(b.size * h, spec.dims);
  for (int i = 0; i < b.size; ++i) {
    const ActionChunk& c = *chunks[static_cast<std::size_t>(i)];
    require(c.horizon() == h && c.dims() == spec.dims,
            "chunk is " + std::to_string(c.horizon()) + "x" + std::to_string(c.dims()) + ", expected " +
                std::to_string(h) + "x" + std::to_string(spec.dims));
    patchify_into(c.values, spec, b.patches, i * l);
    b.targets.middleRows(i * h, h) = c.values;
    for (Eigen::Index t = 0; t < h; ++t) {
      b.weights.row(i * h + t).setConstant(c.valid[static_cast<std::size_t>(t)] ? 1.0 : 0.0);
    }
  }
  return b;
}

ForwardPass forward_loss(ad::Tape& tape, const std::vector<ad::Var>& params, const Codec& codec,
                         const TrainBatch& batch, double lambda, const FrozenQuantization* frozen) {
  const auto& cfg = codec.config();
  const Taae& model = codec.model();
  ForwardPass fp;
  fp.z = model.encode(params, tape.constant(batch.patches), batch.size);
  ad::Var dec_in;
  Mat zq;
  if (frozen) {
    dec_in = ad::add(fp.z, tape.constant(frozen->offset));
    zq = frozen->zq;
  } else {
    fp.encoding = rvq_encode_rows(fp.z.value(), codec.bank());
    dec_in = ad::straight_through(fp.z, fp.encoding.quantized);
    zq = fp.encoding.quantized;
  }
  const ad::Var out = model.decode(params, dec_in, batch.size);

  const auto src = patch_source_index(cfg.patch);
  const int per_chunk = cfg.patch.patch_count() * cfg.patch.patch_width();
  std::vector<int> index;
  index.reserve(src.size() * static_cast<std::size_t>(batch.size));
  for (int b = 0; b < batch.size; ++b) {
    for (int s : src) index.push_back(s < 0 ? -1 : b * per_chunk + s);
  }
  fp.recon = ad::gather(out, index, static_cast<Eigen::Index>(batch.size) * cfg.patch.horizon, cfg.patch.dims);
  const DctPlan dct(cfg.patch.horizon);
  fp.loss = vq_loss(fp.recon, batch.targets, batch.weights, fp.z, zq, lambda, dct);
  return fp;
}

std::string StepRecord::to_json() const {
  nlohmann::json j;
  j["step"] = step;
  j["lr"] = lr;
  j["loss"] = loss.total;
  j["time_l1"] = loss.time_l1;
  j["dct_l1"] = loss.dct_l1;
  j["commitment"] = loss.commitment;
  j["grad_norm"] = grad_norm;
  j["codebook_alive_pct"] = alive_pct;
  j["batch_usage_pct"] = batch_usage_pct;
  j["revived"] = revived;
  return j.dump();
}

Trainer::Trainer(Codec codec, TrainConfig cfg, std::vector<ActionChunk> corpus)
    : codec_(std::move(codec)), cfg_(cfg), corpus_(std::move(corpus)) {
  cfg_.validate();
  require(!corpus_.empty(), "training corpus is empty");
}

Trainer::Trainer(Codec codec, TrainConfig cfg, std::vector<ActionChunk> corpus, const TrainingState& resume)
    : Trainer(std::move(codec), cfg, std::move(corpus)) {
  require(resume.adam_m.size() == codec_.params().size() && resume.adam_v.size() == codec_.params().size(),
          "optimizer state does not match parameter count");
  adam_.m = resume.adam_m;
  adam_.v = resume.adam_v;
  adam_.t = resume.step;
  step_ = resume.step;
}

TrainingState Trainer::state() const {
  TrainingState s;
  s.step = step_;
  s.adam_m = adam_.m;
  s.adam_v = adam_.v;
  if (s.adam_m.empty()) {
    for (std::size_t i = 0; i < codec_.params().size(); ++i) {
      const Mat& p = codec_.params().value(i);
      s.adam_m.push_back(Mat::Zero(p.rows(), p.cols()));
      s.adam_v.push_back(Mat::Zero(p.rows(), p.cols()));
    }
  }
  s.train_config_text = cfg_.to_text();
  return s;
}

std::vector<int> Trainer::batch_indices(std::int64_t step) const {
  auto rng = make_rng(cfg_.seed, kBatchStream, static_cast<std::uint64_t>(step));
  const auto n = corpus_.size();
  const auto b = static_cast<std::size_t>(cfg_.batch_size);
  std::vector<int> out;
  out.reserve(b);
  if (n >= b) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < b; ++i) {
      std::swap(order[i], order[i + uniform_index(rng, n - i)]);
      out.push_back(order[i]);
    }
  } else {
    for (std::size_t i = 0; i < b; ++i) out.push_back(static_cast<int>(uniform_index(rng, n)));
  }
  return out;
}

StepRecord Trainer::step() {
  StepRecord rec;
  rec.step = step_;
  rec.lr = lr_at(cfg_, step_);

  std::vector<const ActionChunk*> chunks;
  for (int i : batch_indices(step_)) chunks.push_back(&corpus_[static_cast<std::size_t>(i)]);
  const TrainBatch batch = make_batch(chunks, codec_.config().patch);

  ad::Tape tape;
  const auto p = codec_.params().bind(tape, true);
  ForwardPass fp = forward_loss(tape, p, codec_, batch, cfg_.commit_weight);
  rec.loss = {fp.loss.total.scalar(), fp.loss.time_l1.scalar(), fp.loss.dct_l1.scalar(),
              fp.loss.commitment.scalar()};
  if (!std::isfinite(rec.loss.total)) {
    throw RuntimeFailure("non-finite loss at step " + std::to_string(step_) + ": " + rec.to_json());
  }
  tape.backward(fp.loss.total);
  std::vector<Mat> grads;
  grads.reserve(p.size());
  for (const auto& v : p) grads.push_back(tape.grad(v.id));
  rec.grad_norm = clip_global_norm(grads, cfg_.grad_clip);
  if (!std::isfinite(rec.grad_norm)) {
    throw RuntimeFailure("non-finite gradient at step " + std::to_string(step_) + ": " + rec.to_json());
  }
  adamw_step(codec_.params(), grads, adam_, cfg_, rec.lr);

  auto& bank = codec_.bank();
  const int stages = bank.config.stages;
  const int k = bank.config.codebook_size;
  std::vector<StageAssignments> assigned(static_cast<std::size_t>(stages));
  std::size_t used = 0;
  for (int s = 0; s < stages; ++s) {
    auto& a = assigned[static_cast<std::size_t>(s)];
    std::set<int> distinct;
    for (Eigen::Index r = 0; r < fp.encoding.indices.rows(); ++r) {
      a.indices.push_back(fp.encoding.indices(r, s));
      distinct.insert(fp.encoding.indices(r, s));
    }
    a.residuals = fp.encoding.stage_inputs[static_cast<std::size_t>(s)];
    used += distinct.size();
  }
  ema_update(bank, assigned);
  int alive = 0;
  for (const auto& book : bank.stages) {
    for (int j = 0; j < book.size(); ++j) alive += book.cluster_size(j) >= bank.config.dead_threshold ? 1 : 0;
  }
  rec.alive_pct = 100.0 * alive / (stages * k);
  rec.batch_usage_pct = 100.0 * static_cast<double>(used) / (stages * k);
  rec.revived = reinit_dead_codes(bank, fp.encoding.stage_inputs, bank.config.dead_threshold,
                                  splitmix64(cfg_.seed ^ splitmix64(kReinitStream ^ static_cast<std::uint64_t>(step_))));
  for (const auto& book : bank.stages) {
    if (!book.codes.allFinite()) {
      throw RuntimeFailure("non-finite codebook after step " + std::to_string(step_) + ": " + rec.to_json());
    }
  }
  ++step_;
  return rec;
}

namespace {

// Keeps the first `keep` lines of the metrics log (drops records written
// after the checkpoint we resume from).
void truncate_log(const std::filesystem::path& path, std::int64_t keep) {
  std::vector<std::string> lines;
  {
    std::ifstream in(path);
    std::string line;
    while (static_cast<std::int64_t>(lines.size()) < keep && std::getline(in, line)) lines.push_back(line);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot rewrite " + path.string());
  for (const auto& l : lines) out << l << "\n";
}

}  // namespace

RunResult run_training(const std::vector<ActionChunk>& corpus, const TrainConfig& cfg, const CodecConfig& codec_cfg,
                       const RunOptions& opts) {
  cfg.validate();
  codec_cfg.validate();
  require(!corpus.empty(), "training corpus is empty");
  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (ec) throw RuntimeFailure("cannot create " + opts.out_dir.string() + ": " + ec.message());
  const auto latest = opts.out_dir / "latest.ckpt";
  const auto log_path = opts.out_dir / "metrics.jsonl";

  std::optional<Trainer> trainer;
  bool resumed = false;
  if (opts.resume && std::filesystem::exists(latest)) {
    auto loaded = load_checkpoint(latest);
    require(loaded.training.has_value(), latest.string() + " has no training state to resume from");
    require(loaded.codec.config().to_text() == codec_cfg.to_text() &&
                loaded.codec.config().patch == codec_cfg.patch,
            "codec config differs from the checkpoint in " + opts.out_dir.string());
    require(loaded.training->train_config_text == cfg.to_text(),
            "train config differs from the checkpoint in " + opts.out_dir.string());
    truncate_log(log_path, loaded.training->step);
    trainer.emplace(std::move(loaded.codec), cfg, corpus, *loaded.training);
    resumed = true;
  } else {
    std::ofstream(log_path, std::ios::trunc);
    trainer.emplace(Codec(codec_cfg, cfg.seed), cfg, corpus);
  }

  std::ofstream log(log_path, std::ios::app);
  if (!log) throw RuntimeFailure("cannot open " + log_path.string());
  while (trainer->steps_done() < cfg.total_steps) {
    StepRecord rec;
    try {
      rec = trainer->step();
    } catch (const RuntimeFailure& e) {
      nlohmann::json diag;
      diag["error"] = e.what();
      log << diag.dump() << "\n";
      log.flush();
      throw;
    }
    log << rec.to_json() << "\n";
    if (!log) throw RuntimeFailure("write failed for " + log_path.string());
    const auto done = trainer->steps_done();
    if (done % cfg.checkpoint_every == 0 || done == cfg.total_steps) {
      log.flush();
      const TrainingState st = trainer->state();
      save_checkpoint(latest, trainer->codec(), &st);
      if (done % cfg.checkpoint_every == 0) {
        save_checkpoint(opts.out_dir / ("step_" + std::to_string(done) + ".ckpt"), trainer->codec(), &st);
      }
    }
    if (opts.on_step) opts.on_step(rec);
  }
  return RunResult{trainer->codec(), trainer->steps_done(), resumed};
}

}  // namespace actcodec
