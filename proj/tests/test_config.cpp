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

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "actcodec/codefile.hpp"
#include "actcodec/config.hpp"

using namespace actcodec;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "actcodec_test_config";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("suite presets shape the codec") {
  RunConfig rc;
  rc.apply_suite("libero");
  const auto cc = rc.codec_config();
  CHECK(cc.tokens_per_chunk() == 21);
  CHECK(cc.patch.horizon == 20);
  CHECK(cc.patch.dims == 7);
  CHECK(rc.schedule().n_blocks == 3);

  rc.set("suite", "r1lite");
  CHECK(rc.codec_config().tokens_per_chunk() == 126);
  CHECK(rc.schedule().block_size == 8);
  CHECK(rc.schedule().n_blocks == 16);
  CHECK_THROWS_AS(rc.apply_suite("mars"), InputError);
}

TEST_CASE("config text parsing") {
  RunConfig rc;
  rc.load_text("# desk run\nsuite = simpler\nlr = 3e-4  # faster\ncodebook_size=512\n", "inline");
  CHECK(rc.get("horizon") == "10");
  CHECK(rc.train_config().lr == 3e-4);
  CHECK(rc.codec_config().rvq.codebook_size == 512);
  CHECK_THROWS_AS(rc.load_text("no_such_key = 1\n", "inline"), InputError);
  CHECK_THROWS_AS(rc.load_text("lr 3\n", "inline"), InputError);
  RunConfig bad;
  bad.set("lr", "fast");
  CHECK_THROWS_AS(bad.train_config(), InputError);
}

TEST_CASE("snapshots reload to the same configuration") {
  RunConfig rc;
  rc.apply_suite("galaxea");
  rc.set("seed", "42");
  rc.write_snapshot(scratch("snap.conf"));
  RunConfig back;
  back.load_file(scratch("snap.conf"));
  CHECK(back.to_text() == rc.to_text());
}

TEST_CASE("config references resolve through the config directory") {
  std::ofstream(scratch("named.conf")) << "suite = bridge\n";
  ::setenv("ACTCODEC_CONFIG_DIR", scratch("").c_str(), 1);
  CHECK(resolve_config_path("named") == scratch("named.conf"));
  CHECK(resolve_config_path(scratch("named.conf").string()) == scratch("named.conf"));
  CHECK_THROWS_AS(resolve_config_path("absent"), InputError);
}

TEST_CASE("code files round-trip") {
  CodeFile f{3, 1, 7, 256, {}};
  for (int r = 0; r < 4; ++r) {
    CodeTensor c(3, 1, 7);
    for (std::size_t i = 0; i < c.size(); ++i) c.indices[i] = static_cast<int>((i * 37 + r) % 256);
    f.records.push_back({r % 2 ? "left" : "right", std::vector<std::uint8_t>(20, 1), c});
  }
  write_code_file(scratch("c.codes"), f);
  const auto back = read_code_file(scratch("c.codes"));
  REQUIRE(back.records.size() == 4);
  CHECK(back.records[3].codes == f.records[3].codes);
  CHECK(back.records[1].embodiment_tag == "left");
  CHECK(back.codebook_size == 256);
}

TEST_CASE("empty and corrupt code files") {
  std::ofstream(scratch("empty.codes")).close();
  CHECK(read_code_file(scratch("empty.codes")).records.empty());
  std::ofstream(scratch("bad.codes")) << "ACTCODE1garbage";
  CHECK_THROWS_AS(read_code_file(scratch("bad.codes")), InputError);
  CHECK_THROWS_AS(read_code_file(scratch("missing.codes")), InputError);
}
