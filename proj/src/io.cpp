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

#include "actcodec/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>

namespace actcodec::io {
namespace {

template <typename T>
void put(std::ostream& os, T v) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
  if (!os) throw RuntimeFailure("write failed");
}

template <typename T>
T get(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw InputError("unexpected end of file");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T v;
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

}  // namespace

void write_u32(std::ostream& os, std::uint32_t v) { put(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { put(os, v); }
void write_i32(std::ostream& os, std::int32_t v) { put(os, v); }
void write_i64(std::ostream& os, std::int64_t v) { put(os, v); }
void write_f32(std::ostream& os, float v) { put(os, v); }
void write_f64(std::ostream& os, double v) { put(os, v); }

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_mat_f64(std::ostream& os, const Mat& m) {
  write_u32(os, static_cast<std::uint32_t>(m.rows()));
  write_u32(os, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) write_f64(os, m.data()[i]);
}

std::uint32_t read_u32(std::istream& is) { return get<std::uint32_t>(is); }
std::uint64_t read_u64(std::istream& is) { return get<std::uint64_t>(is); }
std::int32_t read_i32(std::istream& is) { return get<std::int32_t>(is); }
std::int64_t read_i64(std::istream& is) { return get<std::int64_t>(is); }
float read_f32(std::istream& is) { return get<float>(is); }
double read_f64(std::istream& is) { return get<double>(is); }

std::string read_string(std::istream& is, std::size_t max_len) {
  const std::uint32_t n = read_u32(is);
  if (n > max_len) throw InputError("string length out of range");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (is.gcount() != static_cast<std::streamsize>(n)) throw InputError("unexpected end of file");
  return s;
}

Mat read_mat_f64(std::istream& is) {
  const std::uint32_t r = read_u32(is);
  const std::uint32_t c = read_u32(is);
  if (static_cast<std::uint64_t>(r) * c > (1ull << 28)) throw InputError("matrix too large");
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = read_f64(is);
  return m;
}

void write_magic(std::ostream& os, const char (&magic)[9]) { os.write(magic, 8); }

void expect_magic(std::istream& is, const char (&magic)[9], const std::string& what) {
  char buf[8] = {};
  is.read(buf, 8);
  if (is.gcount() != 8 || std::memcmp(buf, magic, 8) != 0) {
    throw InputError("not a " + what + " file (bad magic)");
  }
}

}  // namespace actcodec::io
