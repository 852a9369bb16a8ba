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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "actcodec/bar.hpp"
#include "actcodec/codec.hpp"
#include "actcodec/training.hpp"

namespace actcodec {

/// Suite table: action DoF, chunk size, latent grid, codebooks, BAR block.
struct SuitePreset {
  std::string name;
  int dims;
  int horizon;
  int cells_a;
  int cells_h;
  int stages;
  int block_size;
  int time_groups;
};

const std::vector<SuitePreset>& suite_presets();
const SuitePreset& find_suite(const std::string& name);

/// Flat key/value run configuration. Resolution order: built-in defaults,
/// then a suite preset, then config-file lines, then explicit overrides.
/// File syntax: "key = value" per line, '#' starts a comment.
class RunConfig {
 public:
  RunConfig();

  void apply_suite(const std::string& name);
  /// Applies `suite` first if the file names one, then the remaining keys.
  void load_file(const std::filesystem::path& path);
  void load_text(const std::string& text, const std::string& source);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  CodecConfig codec_config() const;
  TrainConfig train_config() const;
  BlockSchedule schedule() const;
  ChunkOptions chunk_options() const;

  /// Resolved snapshot, one "key = value" per line in key order.
  std::string to_text() const;
  void write_snapshot(const std::filesystem::path& path) const;

  static const std::vector<std::string>& keys();

 private:
  std::map<std::string, std::string> values_;
};

/// Directory searched for relative config names: $ACTCODEC_CONFIG_DIR, or
/// empty when unset.
std::filesystem::path default_config_dir();

/// Returns `ref` if it names an existing file, otherwise the same name under
/// default_config_dir() (with and without a ".conf" suffix).
std::filesystem::path resolve_config_path(const std::string& ref);

}  // namespace actcodec
