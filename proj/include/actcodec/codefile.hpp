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
#include <filesystem>
#include <string>
#include <vector>

#include "actcodec/rvq.hpp"

namespace actcodec {

/// One encoded chunk.
struct CodeRecord {
  std::string embodiment_tag;
  std::vector<std::uint8_t> valid;  ///< per-timestep validity of the source chunk
  CodeTensor codes;
};

struct CodeFile {
  int stages = 0;
  int cells_h = 0;
  int cells_a = 0;
  int codebook_size = 0;
  std::vector<CodeRecord> records;
};

// Code file: magic "ACTCODE1", u32 version, u32 N_c, u32 C_h, u32 C_a, u32 K,
// u32 record count, then per record: string embodiment, u32 H, H validity
// bytes, N_c*C_h*C_a little-endian i32 indices (stage-major, then h, then a).
// A zero-byte file reads as an empty CodeFile.
inline constexpr std::uint32_t kCodeFileVersion = 1;

void write_code_file(const std::filesystem::path& path, const CodeFile& file);
/// Indices are not range-checked here; decoding reports bad records.
CodeFile read_code_file(const std::filesystem::path& path);

}  // namespace actcodec
