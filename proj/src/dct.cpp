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

#include "actcodec/dct.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace actcodec {

DctPlan::DctPlan(int length) : length_(length) {
  require(length >= 1, "DCT length must be >= 1");
  basis_.resize(length, length);
  const double n = length;
  for (int k = 0; k < length; ++k) {
    const double alpha = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int t = 0; t < length; ++t) {
      basis_(k, t) = alpha * std::cos(std::numbers::pi * (2.0 * t + 1.0) * k / (2.0 * n));
    }
  }
}

Mat DctPlan::forward(const Mat& signal) const {
  require(signal.rows() == length_, "DCT length mismatch: plan " + std::to_string(length_) +
                                        ", signal " + std::to_string(signal.rows()));
  return basis_ * signal;
}

Mat DctPlan::inverse(const Mat& coeffs) const {
  require(coeffs.rows() == length_, "DCT length mismatch: plan " + std::to_string(length_) +
                                        ", coefficients " + std::to_string(coeffs.rows()));
  return basis_.transpose() * coeffs;
}

}  // namespace actcodec
