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

#include "actcodec/common.hpp"

namespace actcodec {

/// Orthonormal DCT-II along the time axis (rows) of an H x D signal,
/// applied by direct matrix product.
class DctPlan {
 public:
  explicit DctPlan(int length);

  int length() const { return length_; }
  /// basis(k, n) = alpha_k cos(pi (2n + 1) k / 2N); rows are the DCT-II basis.
  const Mat& basis() const { return basis_; }

  Mat forward(const Mat& signal) const;
  Mat inverse(const Mat& coeffs) const;

 private:
  int length_;
  Mat basis_;
};

}  // namespace actcodec
