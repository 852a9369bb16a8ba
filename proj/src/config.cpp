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

#include "actcodec/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace actcodec {

namespace {

// Defaults: Libero-shaped grid, desk-scale TAAE, optimizer constants from the
// reference training recipe.
const std::vector<std::pair<std::string, std::string>>& default_pairs() {
  static const std::vector<std::pair<std::string, std::string>> d = {
      {"suite", "libero"},
      {"horizon", "20"},
      {"dims", "7"},
      {"patch", "per-dim"},
      {"time_groups", "1"},
      {"d_latent", "16"},
      {"d_model", "64"},
      {"enc_layers", "2"},
      {"dec_layers", "2"},
      {"heads", "4"},
      {"conv_kernel", "3"},
      {"cells_h", "1"},
      {"cells_a", "7"},
      {"mlp_ratio", "2"},
      {"activation", "gelu"},
      {"stages", "3"},
      {"codebook_size", "256"},
      {"ema_decay", "0.99"},
      {"ema_epsilon", "1e-05"},
      {"dead_threshold", "1"},
      {"lr", "0.0001"},
      {"weight_decay", "0.1"},
      {"beta1", "0.9"},
      {"beta2", "0.95"},
      {"adam_eps", "1e-08"},
      {"warmup_steps", "1000"},
      {"total_steps", "20000"},
      {"grad_clip", "1"},
      {"batch_size", "32"},
      {"commit_weight", "0.25"},
      {"seed", "0"},
      {"checkpoint_every", "1000"},
      {"block_size", "7"},
      {"stride", "20"},
      {"pad_tail", "true"},
      {"norm_scope", "per-embodiment"},
      {"norm_stats", ""},
      {"data", ""},
      {"out", ""},
  };
  return d;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<SuitePreset>& suite_presets() {
  // Block size 8 for the bimanual and whole-body suites, 7 for single arm.
  static const std::vector<SuitePreset> p = {
      {"libero", 7, 20, 7, 1, 3, 7, 1},   {"simpler", 6, 10, 7, 1, 3, 7, 2},  {"vlabench", 7, 10, 7, 1, 3, 7, 1},
      {"galaxea", 14, 32, 14, 2, 3, 8, 2}, {"xarm", 7, 20, 7, 1, 3, 7, 1},     {"r1lite", 21, 32, 21, 2, 3, 8, 2},
      {"bridge", 6, 10, 7, 1, 3, 7, 2},   {"droid", 7, 20, 7, 1, 3, 7, 1},
  };
  return p;
}

const SuitePreset& find_suite(const std::string& name) {
  for (const auto& s : suite_presets()) {
    if (s.name == name) return s;
  }
  std::string known;
  for (const auto& s : suite_presets()) known += (known.empty() ? "" : ", ") + s.name;
  throw InputError("unknown suite '" + name + "' (known: " + known + ")");
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [key, value] : default_pairs()) out.push_back(key);
    return out;
  }();
  return k;
}

RunConfig::RunConfig() {
  for (const auto& [k, v] : default_pairs()) values_[k] = v;
}

void RunConfig::apply_suite(const std::string& name) {
  const SuitePreset& s = find_suite(name);
  values_["suite"] = s.name;
  values_["dims"] = std::to_string(s.dims);
  values_["horizon"] = std::to_string(s.horizon);
  values_["stride"] = std::to_string(s.horizon);
  values_["cells_a"] = std::to_string(s.cells_a);
  values_["cells_h"] = std::to_string(s.cells_h);
  values_["stages"] = std::to_string(s.stages);
  values_["block_size"] = std::to_string(s.block_size);
  values_["time_groups"] = std::to_string(s.time_groups);
  values_["patch"] = "per-dim";
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (values_.count(key) == 0) throw InputError("unknown config key '" + key + "'");
  if (key == "suite") {
    apply_suite(value);
    return;
  }
  values_[key] = value;
}

void RunConfig::load_text(const std::string& text, const std::string& source) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (values_.count(key) == 0) {
      throw InputError(source + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
    }
    pairs.emplace_back(key, trim(line.substr(eq + 1)));
  }
  for (const auto& [k, v] : pairs) {
    if (k == "suite") apply_suite(v);
  }
  for (const auto& [k, v] : pairs) {
    if (k != "suite") values_[k] = v;
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path.string());
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InputError("unknown config key '" + key + "'");
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  const auto& v = get(key);
  try {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw InputError("config key '" + key + "' expects an integer, got '" + v + "'");
}

double RunConfig::get_double(const std::string& key) const {
  const auto& v = get(key);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw InputError("config key '" + key + "' expects a number, got '" + v + "'");
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("config key '" + key + "' expects true/false, got '" + v + "'");
}

CodecConfig RunConfig::codec_config() const {
  CodecConfig c;
  c.patch = resolve_patch_spec(get("patch"), get_int("horizon"), get_int("dims"), get_int("time_groups"));
  c.taae.d_latent = get_int("d_latent");
  c.taae.d_model = get_int("d_model");
  c.taae.enc_layers = get_int("enc_layers");
  c.taae.dec_layers = get_int("dec_layers");
  c.taae.heads = get_int("heads");
  c.taae.conv_kernel = get_int("conv_kernel");
  c.taae.cells_h = get_int("cells_h");
  c.taae.cells_a = get_int("cells_a");
  c.taae.mlp_ratio = get_int("mlp_ratio");
  c.taae.activation = parse_activation(get("activation"));
  c.rvq.stages = get_int("stages");
  c.rvq.codebook_size = get_int("codebook_size");
  c.rvq.dim = c.taae.d_latent;
  c.rvq.decay = get_double("ema_decay");
  c.rvq.epsilon = get_double("ema_epsilon");
  c.rvq.dead_threshold = get_double("dead_threshold");
  c.validate();
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.lr = get_double("lr");
  t.weight_decay = get_double("weight_decay");
  t.beta1 = get_double("beta1");
  t.beta2 = get_double("beta2");
  t.adam_eps = get_double("adam_eps");
  t.warmup_steps = get_int("warmup_steps");
  t.total_steps = get_int("total_steps");
  t.grad_clip = get_double("grad_clip");
  t.batch_size = get_int("batch_size");
  t.commit_weight = get_double("commit_weight");
  const auto& seed = get("seed");
  try {
    t.seed = std::stoull(seed);
  } catch (const std::exception&) {
    throw InputError("config key 'seed' expects a non-negative integer, got '" + seed + "'");
  }
  t.checkpoint_every = get_int("checkpoint_every");
  t.validate();
  return t;
}

BlockSchedule RunConfig::schedule() const {
  return build_schedule(get_int("stages"), get_int("cells_h"), get_int("cells_a"), get_int("block_size"));
}

ChunkOptions RunConfig::chunk_options() const {
  ChunkOptions o;
  o.horizon = get_int("horizon");
  o.stride = get_int("stride");
  o.pad_tail = get_bool("pad_tail");
  require(o.horizon >= 1 && o.stride >= 1, "horizon and stride must be at least 1");
  return o;
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

void RunConfig::write_snapshot(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw RuntimeFailure("cannot write config snapshot " + path.string());
  os << "# resolved configuration\n" << to_text();
}

std::filesystem::path default_config_dir() {
  const char* env = std::getenv("ACTCODEC_CONFIG_DIR");
  return env ? std::filesystem::path(env) : std::filesystem::path();
}

std::filesystem::path resolve_config_path(const std::string& ref) {
  const std::filesystem::path p(ref);
  if (std::filesystem::exists(p)) return p;
  const auto dir = default_config_dir();
  if (!dir.empty() && p.is_relative()) {
    if (std::filesystem::exists(dir / p)) return dir / p;
    if (std::filesystem::exists(dir / (ref + ".conf"))) return dir / (ref + ".conf");
  }
  throw InputError("config file not found: " + ref);
}

}  // namespace actcodec
