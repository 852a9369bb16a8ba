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

// actcodec: train, apply and evaluate the action codec from the shell.
//
// Exit codes: 0 success, 1 internal failure, 2 usage or input error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "actcodec/bar.hpp"
#include "actcodec/codec.hpp"
#include "actcodec/codefile.hpp"
#include "actcodec/config.hpp"
#include "actcodec/metrics.hpp"
#include "actcodec/training.hpp"
#include "actcodec/trajectory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace actcodec;

namespace {

// Options shared by every subcommand that reads a run configuration.
struct ConfigArgs {
  std::string config;
  std::string suite;
  std::vector<std::string> sets;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config,
                  "Key/value config file; bare names are looked up in $ACTCODEC_CONFIG_DIR");
  cmd->add_option("--suite", args.suite, "Suite preset (libero, simpler, vlabench, galaxea, xarm, r1lite, bridge, droid)");
  cmd->add_option("--set", args.sets, "Override one config key, key=value (repeatable)");
}

RunConfig resolve_config(const ConfigArgs& args) {
  RunConfig rc;
  if (!args.suite.empty()) rc.apply_suite(args.suite);
  if (!args.config.empty()) rc.load_file(resolve_config_path(args.config));
  for (const auto& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
    rc.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return rc;
}

// Snapshot for single-file outputs: "<file>.resolved.conf".
void write_snapshot(const RunConfig& rc, const fs::path& output, const std::string& command) {
  const fs::path snap = fs::is_directory(output) ? output / "resolved.conf" : fs::path(output.string() + ".resolved.conf");
  rc.write_snapshot(snap);
  std::ofstream(snap, std::ios::app) << "# command: " << command << "\n";
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(what + ": '" + item + "' is not a number");
    }
  }
  require(!out.empty(), what + " is empty");
  return out;
}

// Loads and chunks data for a codec whose chunk size is fixed by `horizon`.
std::vector<ActionChunk> load_chunks(const RunConfig& rc, int horizon) {
  require(!rc.get("data").empty(), "no data given (use --data or the 'data' config key)");
  const auto trajs = load_dataset(rc.get("data"));
  ChunkOptions opts = rc.chunk_options();
  opts.horizon = horizon;
  const std::string scope = rc.get("norm_scope");
  if (!rc.get("norm_stats").empty()) {
    const auto stats = read_norm_stats(rc.get("norm_stats"));
    return prepare_chunks(trajs, opts, &stats);
  }
  require(scope == "none", "data needs normalization stats (--norm-stats) unless norm_scope = none");
  return prepare_chunks(trajs, opts, nullptr);
}

json vrr_json(const VrrReport& r) {
  return {{"sigma", r.sigma}, {"n_total", r.n_total}, {"n_valid", r.n_valid}, {"vrr", r.vrr}};
}

json stats_json(const CodeStats& s) {
  json active = json::array();
  for (const auto& [th, n] : s.active_above) active.push_back({{"threshold", th}, {"count", n}});
  return {{"vocab_size", s.vocab_size}, {"tokens", s.total},     {"usage_pct", s.usage_pct},
          {"f_max_pct", s.f_max_pct},   {"entropy_norm", s.entropy_norm}, {"active_above", active}};
}

json table_json(const VrrTable& t) {
  json overall = json::array();
  for (const auto& r : t.overall) overall.push_back(vrr_json(r));
  json per = json::object();
  for (const auto& [tag, rows] : t.per_embodiment) {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(vrr_json(r));
    per[tag.empty() ? "-" : tag] = arr;
  }
  return {{"overall", overall}, {"per_embodiment", per}};
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  ConfigArgs cfg;
  std::string data, out, norm_stats;
  int chunk_size = 0, stride = 0;
  bool no_resume = false;
  int log_every = 100;
};

int cmd_train(const TrainArgs& a, const std::string& command) {
  RunConfig rc = resolve_config(a.cfg);
  if (!a.data.empty()) rc.set("data", a.data);
  if (!a.out.empty()) rc.set("out", a.out);
  if (!a.norm_stats.empty()) rc.set("norm_stats", a.norm_stats);
  if (a.chunk_size > 0) rc.set("horizon", std::to_string(a.chunk_size));
  if (a.stride > 0) rc.set("stride", std::to_string(a.stride));
  require(!rc.get("out").empty(), "no output directory given (use --out)");
  require(!rc.get("data").empty(), "no data given (use --data)");
  const fs::path out = rc.get("out");
  fs::create_directories(out);

  const CodecConfig codec_cfg = rc.codec_config();
  const TrainConfig train_cfg = rc.train_config();
  const auto trajs = load_dataset(rc.get("data"));
  const std::string scope = rc.get("norm_scope");
  std::vector<ActionChunk> corpus;
  if (!rc.get("norm_stats").empty()) {
    const auto stats = read_norm_stats(rc.get("norm_stats"));
    corpus = prepare_chunks(trajs, rc.chunk_options(), &stats);
  } else if (scope == "none") {
    corpus = prepare_chunks(trajs, rc.chunk_options(), nullptr);
  } else {
    std::map<std::string, NormalizationStats> stats;
    if (scope == "global") {
      stats[""] = fit_normalizer(trajs);
    } else if (scope == "per-embodiment") {
      stats = fit_normalizer_per_embodiment(trajs);
    } else {
      throw InputError("norm_scope must be per-embodiment, global or none, got '" + scope + "'");
    }
    write_norm_stats(out / "norm_stats.txt", stats);
    rc.set("norm_stats", (out / "norm_stats.txt").string());
    corpus = prepare_chunks(trajs, rc.chunk_options(), &stats);
  }
  require(!corpus.empty(), "data produced no chunks");
  write_snapshot(rc, out, command);
  std::ofstream(out / "schedule.txt") << rc.schedule().to_text() << "\n";

  RunOptions opts;
  opts.out_dir = out;
  opts.resume = !a.no_resume;
  const auto t0 = std::chrono::steady_clock::now();
  opts.on_step = [&](const StepRecord& r) {
    if (a.log_every > 0 && ((r.step + 1) % a.log_every == 0 || r.step + 1 == train_cfg.total_steps)) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::fprintf(stderr, "step %lld/%d loss %.6f lr %.3g alive %.1f%% (%.0fs)\n",
                   static_cast<long long>(r.step + 1), train_cfg.total_steps, r.loss.total, r.lr, r.alive_pct, secs);
    }
  };
  const RunResult res = run_training(corpus, train_cfg, codec_cfg, opts);
  std::fprintf(stderr, "%s %lld steps, checkpoint %s\n", res.resumed ? "resumed and finished" : "finished",
               static_cast<long long>(res.steps), (out / "latest.ckpt").string().c_str());
  return 0;
}

// ---------------------------------------------------------------- encode / decode

struct CodecArgs {
  ConfigArgs cfg;
  std::string ckpt, data, codes, out, norm_stats;
  int stride = 0;
};

int cmd_encode(const CodecArgs& a, const std::string& command) {
  RunConfig rc = resolve_config(a.cfg);
  if (!a.data.empty()) rc.set("data", a.data);
  if (!a.norm_stats.empty()) rc.set("norm_stats", a.norm_stats);
  if (a.stride > 0) rc.set("stride", std::to_string(a.stride));
  const auto loaded = load_checkpoint(a.ckpt);
  const Codec& codec = loaded.codec;
  const auto& cc = codec.config();
  if (a.stride <= 0) rc.set("stride", std::to_string(cc.patch.horizon));
  const auto chunks = load_chunks(rc, cc.patch.horizon);
  CodeFile file{cc.rvq.stages, cc.taae.cells_h, cc.taae.cells_a, cc.rvq.codebook_size, {}};
  for (const auto& c : chunks) file.records.push_back({c.embodiment_tag, c.valid, codec.encode(c.values)});
  write_code_file(a.out, file);
  write_snapshot(rc, a.out, command);
  std::fprintf(stderr, "encoded %zu chunks, %d tokens each\n", chunks.size(), cc.tokens_per_chunk());
  return 0;
}

int cmd_decode(const CodecArgs& a, const std::string& command) {
  RunConfig rc = resolve_config(a.cfg);
  if (!a.norm_stats.empty()) rc.set("norm_stats", a.norm_stats);
  const auto loaded = load_checkpoint(a.ckpt);
  const Codec& codec = loaded.codec;
  const auto& cc = codec.config();
  const CodeFile file = read_code_file(a.codes);
  if (!file.records.empty()) {
    require(file.stages == cc.rvq.stages && file.cells_h == cc.taae.cells_h && file.cells_a == cc.taae.cells_a,
            "code file shape " + std::to_string(file.stages) + "x" + std::to_string(file.cells_h) + "x" +
                std::to_string(file.cells_a) + " does not match the checkpoint");
  }
  std::map<std::string, NormalizationStats> stats;
  const bool denorm = !rc.get("norm_stats").empty();
  if (denorm) stats = read_norm_stats(rc.get("norm_stats"));
  std::vector<RawTrajectory> outs;
  for (std::size_t r = 0; r < file.records.size(); ++r) {
    const auto& rec = file.records[r];
    Mat values;
    try {
      values = codec.decode(rec.codes);
    } catch (const InputError& e) {
      throw InputError("code record " + std::to_string(r) + ": " + e.what());
    }
    ActionChunk c(values, rec.embodiment_tag);
    RawTrajectory t = chunk_as_trajectory(c);
    if (denorm) t = denormalize(t, stats_for(stats, rec.embodiment_tag));
    outs.push_back(std::move(t));
  }
  write_trajectories(a.out, outs);
  write_snapshot(rc, a.out, command);
  std::fprintf(stderr, "decoded %zu records\n", outs.size());
  return 0;
}

// ---------------------------------------------------------------- eval / report

struct EvalArgs {
  ConfigArgs cfg;
  std::string ckpt, data, out, norm_stats;
  std::string sigmas = "0.001,0.003,0.01,0.03,0.1";
  std::string vrr_mode = "timestep";
  int bins = 256;
  std::string label = "codec";
};

const char* kSigmaHeader = "series\tsigma\tvrr\tn_valid\tn_total";
const char* kCompressionHeader = "series\tcompression_ratio\ttokens_per_chunk\tsigma\tvrr";
const char* kHeatmapHeader = "series\tembodiment\tsigma\tvrr";

// Writes the three plot tables for a list of (label, report-series) pairs.
void write_tables(const fs::path& dir, const std::vector<std::pair<std::string, json>>& series) {
  std::ofstream sig(dir / "vrr_sigma.tsv"), comp(dir / "vrr_compression.tsv"), heat(dir / "vrr_heatmap.tsv");
  if (!sig || !comp || !heat) throw RuntimeFailure("cannot write tables in " + dir.string());
  sig << kSigmaHeader << "\n";
  comp << kCompressionHeader << "\n";
  heat << kHeatmapHeader << "\n";
  sig.precision(10);
  comp.precision(10);
  heat.precision(10);
  for (const auto& [label, s] : series) {
    for (const auto& r : s.at("vrr").at("overall")) {
      sig << label << "\t" << r.at("sigma").get<double>() << "\t" << r.at("vrr").get<double>() << "\t"
          << r.at("n_valid").get<std::int64_t>() << "\t" << r.at("n_total").get<std::int64_t>() << "\n";
      comp << label << "\t" << s.at("compression_ratio").get<double>() << "\t" << s.at("tokens_per_chunk").get<int>()
           << "\t" << r.at("sigma").get<double>() << "\t" << r.at("vrr").get<double>() << "\n";
    }
    for (const auto& [tag, rows] : s.at("vrr").at("per_embodiment").items()) {
      for (const auto& r : rows) {
        heat << label << "\t" << tag << "\t" << r.at("sigma").get<double>() << "\t" << r.at("vrr").get<double>() << "\n";
      }
    }
  }
}

int cmd_eval(const EvalArgs& a, const std::string& command) {
  RunConfig rc = resolve_config(a.cfg);
  if (!a.data.empty()) rc.set("data", a.data);
  if (!a.norm_stats.empty()) rc.set("norm_stats", a.norm_stats);
  const auto loaded = load_checkpoint(a.ckpt);
  const Codec& codec = loaded.codec;
  const auto& cc = codec.config();
  rc.set("stride", std::to_string(cc.patch.horizon));
  const auto chunks = load_chunks(rc, cc.patch.horizon);
  require(!chunks.empty(), "evaluation data produced no chunks");
  const auto sigmas = parse_list(a.sigmas, "--sigmas");
  const VrrMode mode = parse_vrr_mode(a.vrr_mode);
  require(a.bins >= 2, "--bins must be at least 2");
  fs::create_directories(a.out);

  std::vector<Mat> recons;
  std::vector<CodeTensor> codes;
  for (const auto& c : chunks) {
    codes.push_back(codec.encode(c.values));
    recons.push_back(codec.decode(codes.back()));
  }
  std::vector<Mat> binned;
  for (const auto& c : chunks) {
    binned.push_back(binning_detokenize(binning_tokenize(c.values, a.bins), static_cast<int>(c.horizon()),
                                        static_cast<int>(c.dims()), a.bins));
  }
  const int h = cc.patch.horizon;
  const int d = cc.patch.dims;
  json codec_series = {{"tokens_per_chunk", cc.tokens_per_chunk()},
                       {"compression_ratio", compression_ratio(h, d, cc.tokens_per_chunk())},
                       {"vrr", table_json(vrr_sweep(recons, chunks, sigmas, mode))},
                       {"code_stats", stats_json(code_stats(codes, cc.rvq.codebook_size))}};
  json bin_series = {{"tokens_per_chunk", h * d},
                     {"compression_ratio", 1.0},
                     {"vrr", table_json(vrr_sweep(binned, chunks, sigmas, mode))}};
  const std::string bin_label = "binning-" + std::to_string(a.bins);
  codec_series["label"] = a.label;
  bin_series["label"] = bin_label;
  json report = {{"sigma_units", "normalized"},
                 {"vrr_mode", vrr_mode_name(mode)},
                 {"chunks", chunks.size()},
                 {"horizon", h},
                 {"dims", d},
                 {"series", json::array({codec_series, bin_series})}};
  std::ofstream(fs::path(a.out) / "report.json") << report.dump(2) << "\n";
  write_tables(a.out, {{a.label, codec_series}, {bin_label, bin_series}});
  write_snapshot(rc, a.out, command);
  for (const auto& r : codec_series["vrr"]["overall"]) {
    std::printf("%s sigma=%g vrr=%.6f\n", a.label.c_str(), r["sigma"].get<double>(), r["vrr"].get<double>());
  }
  return 0;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

int cmd_report(const ReportArgs& a) {
  require(!a.inputs.empty(), "report needs at least one eval output");
  std::vector<std::pair<std::string, json>> series;
  for (const auto& in : a.inputs) {
    fs::path p = in;
    if (fs::is_directory(p)) p /= "report.json";
    std::ifstream is(p);
    if (!is) throw InputError("cannot open eval report " + p.string());
    json j;
    try {
      is >> j;
    } catch (const json::exception& e) {
      throw InputError("malformed eval report " + p.string() + ": " + e.what());
    }
    if (!j.contains("series") || !j["series"].is_array()) throw InputError(p.string() + " is not an eval report");
    const std::string prefix = a.inputs.size() > 1 ? p.parent_path().filename().string() + "/" : "";
    for (const auto& s : j["series"]) series.emplace_back(prefix + s.at("label").get<std::string>(), s);
  }
  fs::create_directories(a.out);
  write_tables(a.out, series);
  std::fprintf(stderr, "wrote %zu series to %s\n", series.size(), a.out.c_str());
  return 0;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
  std::vector<std::string> codes;
  std::string thresholds = "0.001,0.02";
  bool shared_vocab = false;
};

int cmd_stats(const StatsArgs& a) {
  std::vector<CodeTensor> all;
  int k = 0;
  for (const auto& path : a.codes) {
    const CodeFile f = read_code_file(path);
    if (f.records.empty()) continue;
    require(k == 0 || k == f.codebook_size, "code files disagree on codebook size");
    k = f.codebook_size;
    for (const auto& r : f.records) all.push_back(r.codes);
  }
  require(!all.empty(), "no code records to summarize");
  const auto st = code_stats(all, k, parse_list(a.thresholds, "--thresholds"), !a.shared_vocab);
  json j = stats_json(st);
  j["records"] = all.size();
  j["codebook_size"] = k;
  j["stage_offsets"] = !a.shared_vocab;
  std::printf("%s\n", j.dump(2).c_str());
  return 0;
}

// ---------------------------------------------------------------- bar-sim

struct BarArgs {
  std::string schedule = "libero";
  std::string mode = "bar";
  std::string report;
  double per_pass_ms = 0.0;
  double image_ms = 16.0;
  double observation_ms = 72.0;
  double detok_ms = 2.7;
  int policy_steps = 0;
  int examples = 32;
  int codebook_size = 256;
  std::uint64_t seed = 0;
};

BlockSchedule schedule_from_arg(const std::string& s) {
  if (s.find('/') != std::string::npos) return parse_schedule(s);
  const SuitePreset& p = find_suite(s);
  return build_schedule(p.stages, p.cells_h, p.cells_a, p.block_size);
}

int cmd_bar_sim(const BarArgs& a) {
  const BlockSchedule sched = schedule_from_arg(a.schedule);
  const DecodeMode mode = parse_decode_mode(a.mode);
  const double per_pass = a.per_pass_ms > 0.0 ? a.per_pass_ms : (mode == DecodeMode::kAr ? 6.4 : 7.4);
  const int passes = pass_count(sched, mode);
  const auto lat = latency_model(per_pass, passes,
                                 {{"image_encode", a.image_ms}, {"observation", a.observation_ms}, {"detokenize", a.detok_ms}});
  json rows = json::array();
  for (const auto& [name, ms] : lat.rows) rows.push_back({{"stage", name}, {"ms", ms}});
  json report = {{"schedule", sched.to_text()},
                 {"tokens", sched.tokens()},
                 {"block_size", sched.block_size},
                 {"blocks", sched.n_blocks},
                 {"mode", decode_mode_name(mode)},
                 {"passes", passes},
                 {"passes_ar", pass_count(sched, DecodeMode::kAr)},
                 {"passes_bar", pass_count(sched, DecodeMode::kBar)},
                 {"per_pass_ms", per_pass},
                 {"latency", {{"rows", rows}, {"total_ms", lat.total_ms}, {"model", "accounting"}}}};

  if (a.policy_steps > 0) {
    require(a.examples >= 1, "--examples must be at least 1");
    ToyPolicyConfig pc;
    pc.codebook_size = a.codebook_size;
    pc.n_codebooks = sched.n_codebooks;
    std::vector<ToyExample> corpus;
    for (int e = 0; e < a.examples; ++e) {
      auto rng = make_rng(a.seed, 0xC0DEu, static_cast<std::uint64_t>(e));
      ToyExample ex{Vec(pc.context_dim), CodeTensor(sched.n_codebooks, sched.cells_h, sched.cells_a)};
      for (int i = 0; i < pc.context_dim; ++i) ex.context(i) = gaussian(rng);
      for (auto& c : ex.codes.indices) c = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(pc.codebook_size)));
      corpus.push_back(std::move(ex));
    }
    ToyPolicy policy(pc, a.seed);
    ToyTrainOptions to;
    to.steps = a.policy_steps;
    to.seed = a.seed;
    const double initial = policy.loss_value(corpus, sched, mode);
    const auto curve = toy_policy_train(policy, corpus, sched, mode, to);
    int exact = 0;
    for (const auto& ex : corpus) {
      const Rollout r = decode_rollout(policy, ex.context, sched, mode, Sampler{1, 1.0, 0});
      exact += r.codes == ex.codes ? 1 : 0;
    }
    report["policy"] = {{"examples", a.examples},
                        {"steps", a.policy_steps},
                        {"initial_loss", initial},
                        {"final_loss", policy.loss_value(corpus, sched, mode)},
                        {"last_train_loss", curve.back()},
                        {"greedy_exact", exact}};
  }

  const std::string text = report.dump(2);
  if (!a.report.empty()) {
    std::ofstream os(a.report);
    if (!os) throw RuntimeFailure("cannot write " + a.report);
    os << text << "\n";
  }
  std::printf("%s\n", text.c_str());
  return 0;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string profile = "smooth";
  int count = 100;
  int horizon = 20;
  int dims = 7;
  std::uint64_t seed = 0;
  std::string embodiment = "synthetic";
  std::string out;
  std::string manifest;
};

int cmd_synth(const SynthArgs& a) {
  SynthOptions so;
  so.seed = a.seed;
  so.count = a.count;
  so.horizon = a.horizon;
  so.dims = a.dims;
  so.profile = parse_profile(a.profile);
  so.embodiment_tag = a.embodiment;
  std::vector<RawTrajectory> trajs;
  for (const auto& c : synth_corpus(so)) trajs.push_back(chunk_as_trajectory(c));
  write_trajectories(a.out, trajs);
  if (!a.manifest.empty()) {
    const ManifestEntry entry{fs::absolute(a.out), a.embodiment};
    write_manifest(a.manifest, std::span<const ManifestEntry>(&entry, 1));
  }
  std::fprintf(stderr, "wrote %d %s chunks to %s\n", a.count, a.profile.c_str(), a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"actcodec: residual-VQ action codec (patchify, transformer autoencoder, RVQ) with BAR tools"};
  app.require_subcommand(1);
  const std::string command = join_args(argc, argv);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a codec on a dataset");
  add_config_options(c_train, train.cfg);
  c_train->add_option("--data", train.data, "Trajectory container or manifest");
  c_train->add_option("--out", train.out, "Output directory (checkpoints, metrics.jsonl, resolved.conf)");
  c_train->add_option("--norm-stats", train.norm_stats, "Normalization stats file (fitted when absent)");
  c_train->add_option("--chunk-size", train.chunk_size, "Chunk horizon H");
  c_train->add_option("--stride", train.stride, "Chunk stride");
  c_train->add_flag("--no-resume", train.no_resume, "Start fresh even if latest.ckpt exists");
  c_train->add_option("--log-every", train.log_every, "Progress line interval in steps (0 = quiet)");

  CodecArgs enc;
  auto* c_enc = app.add_subcommand("encode", "Encode chunks into a code file");
  add_config_options(c_enc, enc.cfg);
  c_enc->add_option("--ckpt", enc.ckpt, "Codec checkpoint")->required();
  c_enc->add_option("--data", enc.data, "Trajectory container or manifest")->required();
  c_enc->add_option("--out", enc.out, "Output code file")->required();
  c_enc->add_option("--norm-stats", enc.norm_stats, "Normalization stats (omit for normalized data with norm_scope = none)");
  c_enc->add_option("--stride", enc.stride, "Chunk stride (default: chunk size)");

  CodecArgs dec;
  auto* c_dec = app.add_subcommand("decode", "Decode a code file into trajectories");
  add_config_options(c_dec, dec.cfg);
  c_dec->add_option("--ckpt", dec.ckpt, "Codec checkpoint")->required();
  c_dec->add_option("--codes", dec.codes, "Code file")->required();
  c_dec->add_option("--out", dec.out, "Output trajectory container")->required();
  c_dec->add_option("--norm-stats", dec.norm_stats, "Denormalize outputs with these stats");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "VRR sweep, compression and code statistics vs a binning baseline");
  add_config_options(c_eval, ev.cfg);
  c_eval->add_option("--ckpt", ev.ckpt, "Codec checkpoint")->required();
  c_eval->add_option("--data", ev.data, "Trajectory container or manifest")->required();
  c_eval->add_option("--out", ev.out, "Output directory")->required();
  c_eval->add_option("--norm-stats", ev.norm_stats, "Normalization stats");
  c_eval->add_option("--sigmas", ev.sigmas, "Comma-separated tolerances in normalized units");
  c_eval->add_option("--vrr-mode", ev.vrr_mode, "timestep (L1 over each action vector) or scalar");
  c_eval->add_option("--bins", ev.bins, "Bins per dimension for the binning baseline");
  c_eval->add_option("--label", ev.label, "Series label for the codec");

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "Merge eval outputs into plot tables");
  c_rep->add_option("inputs", rep.inputs, "Eval output directories or report.json files")->required();
  c_rep->add_option("--out", rep.out, "Output directory")->required();

  StatsArgs st;
  auto* c_stats = app.add_subcommand("stats", "Vocabulary statistics of code files");
  c_stats->add_option("codes", st.codes, "Code files")->required();
  c_stats->add_option("--thresholds", st.thresholds, "Relative-frequency thresholds");
  c_stats->add_flag("--shared-vocab", st.shared_vocab, "Count all stages in one K-sized vocabulary");

  BarArgs bar;
  auto* c_bar = app.add_subcommand("bar-sim", "Block schedule, pass count and latency accounting");
  c_bar->add_option("--schedule", bar.schedule, "Suite name or n_codebooks/cells_h/cells_a/block_size");
  c_bar->add_option("--mode", bar.mode, "ar or bar");
  c_bar->add_option("--report", bar.report, "Write the JSON report here");
  c_bar->add_option("--per-pass-ms", bar.per_pass_ms, "Forward pass cost (default 7.4 bar, 6.4 ar)");
  c_bar->add_option("--image-ms", bar.image_ms, "Image encoding cost");
  c_bar->add_option("--observation-ms", bar.observation_ms, "Observation prefill cost");
  c_bar->add_option("--detok-ms", bar.detok_ms, "Detokenization cost");
  c_bar->add_option("--policy-steps", bar.policy_steps, "Also train a toy policy for this many steps");
  c_bar->add_option("--examples", bar.examples, "Toy policy corpus size");
  c_bar->add_option("--codebook-size", bar.codebook_size, "Toy policy vocabulary K");
  c_bar->add_option("--seed", bar.seed, "Seed");

  SynthArgs sy;
  auto* c_synth = app.add_subcommand("synth", "Write a synthetic normalized corpus");
  c_synth->add_option("--profile", sy.profile, "smooth, piecewise or gripper-binary");
  c_synth->add_option("--count", sy.count, "Number of chunks");
  c_synth->add_option("--horizon", sy.horizon, "Chunk horizon");
  c_synth->add_option("--dims", sy.dims, "Action dimensions");
  c_synth->add_option("--seed", sy.seed, "Seed");
  c_synth->add_option("--embodiment", sy.embodiment, "Embodiment tag");
  c_synth->add_option("--out", sy.out, "Output trajectory container")->required();
  c_synth->add_option("--manifest", sy.manifest, "Also write a one-line manifest here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_train->parsed()) return cmd_train(train, command);
    if (c_enc->parsed()) return cmd_encode(enc, command);
    if (c_dec->parsed()) return cmd_decode(dec, command);
    if (c_eval->parsed()) return cmd_eval(ev, command);
    if (c_rep->parsed()) return cmd_report(rep);
    if (c_stats->parsed()) return cmd_stats(st);
    if (c_bar->parsed()) return cmd_bar_sim(bar);
    if (c_synth->parsed()) return cmd_synth(sy);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 2;
}
