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

#include "actcodec/codefile.hpp"

#include <fstream>

#include "actcodec/io.hpp"

namespace actcodec {

namespace {
constexpr char kCodeMagic[9] = "ACTCODE1";
}  // namespace

void write_code_file(const std::filesystem::path& path, const CodeFile& file) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeFailure("cannot open " + path.string() + " for writing");
  io::write_magic(os, kCodeMagic);
  io::write_u32(os, kCodeFileVersion);
  io::write_u32(os, static_cast<std::uint32_t>(file.stages));
  io::write_u32(os, static_cast<std::uint32_t>(file.cells_h));
  io::write_u32(os, static_cast<std::uint32_t>(file.cells_a));
  io::write_u32(os, static_cast<std::uint32_t>(file.codebook_size));
  io::write_u32(os, static_cast<std::uint32_t>(file.records.size()));
  for (std::size_t r = 0; r < file.records.size(); ++r) {
    const auto& rec = file.records[r];
    require(rec.codes.stages == file.stages && rec.codes.cells_h == file.cells_h && rec.codes.cells_a == file.cells_a,
            "code record " + std::to_string(r) + " does not match the file header shape");
    io::write_string(os, rec.embodiment_tag);
    io::write_u32(os, static_cast<std::uint32_t>(rec.valid.size()));
    os.write(reinterpret_cast<const char*>(rec.valid.data()), static_cast<std::streamsize>(rec.valid.size()));
    for (auto idx : rec.codes.indices) io::write_i32(os, idx);
  }
  os.flush();
  if (!os) throw RuntimeFailure("write failed for " + path.string());
}

CodeFile read_code_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open code file " + path.string());
  CodeFile f;
  if (is.peek() == std::char_traits<char>::eof()) return f;
  io::expect_magic(is, kCodeMagic, "code file " + path.string());
  const auto version = io::read_u32(is);
  require(version == kCodeFileVersion, "code file " + path.string() + " has version " + std::to_string(version) +
                                           ", this build reads version " + std::to_string(kCodeFileVersion));
  f.stages = static_cast<int>(io::read_u32(is));
  f.cells_h = static_cast<int>(io::read_u32(is));
  f.cells_a = static_cast<int>(io::read_u32(is));
  f.codebook_size = static_cast<int>(io::read_u32(is));
  require(f.stages >= 1 && f.cells_h >= 1 && f.cells_a >= 1 && f.codebook_size >= 1 &&
              static_cast<std::int64_t>(f.stages) * f.cells_h * f.cells_a <= (1 << 20),
          "code file " + path.string() + " has an invalid header");
  const auto count = io::read_u32(is);
  for (std::uint32_t r = 0; r < count; ++r) {
    try {
      CodeRecord rec;
      rec.embodiment_tag = io::read_string(is);
      const auto h = io::read_u32(is);
      require(h <= (1u << 20), "horizon out of range");
      rec.valid.resize(h);
      is.read(reinterpret_cast<char*>(rec.valid.data()), static_cast<std::streamsize>(h));
      require(is.gcount() == static_cast<std::streamsize>(h), "unexpected end of file");
      rec.codes = CodeTensor(f.stages, f.cells_h, f.cells_a);
      for (auto& idx : rec.codes.indices) idx = io::read_i32(is);
      f.records.push_back(std::move(rec));
    } catch (const InputError& e) {
      throw InputError("code file " + path.string() + ", record " + std::to_string(r) + ": " + e.what());
    }
  }
  return f;
}

}  // namespace actcodec
