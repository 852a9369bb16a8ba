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

// Little-endian binary helpers shared by the trajectory, checkpoint and code
// file formats.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "actcodec/common.hpp"

namespace actcodec::io {

void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_i32(std::ostream& os, std::int32_t v);
void write_i64(std::ostream& os, std::int64_t v);
void write_f32(std::ostream& os, float v);
void write_f64(std::ostream& os, double v);
void write_string(std::ostream& os, const std::string& s);
void write_mat_f64(std::ostream& os, const Mat& m);

std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
std::int32_t read_i32(std::istream& is);
std::int64_t read_i64(std::istream& is);
float read_f32(std::istream& is);
double read_f64(std::istream& is);
std::string read_string(std::istream& is, std::size_t max_len = 1u << 24);
Mat read_mat_f64(std::istream& is);

void write_magic(std::ostream& os, const char (&magic)[9]);
/// Throws InputError naming `what` if the next 8 bytes differ from `magic`.
void expect_magic(std::istream& is, const char (&magic)[9], const std::string& what);

}  // namespace actcodec::io
