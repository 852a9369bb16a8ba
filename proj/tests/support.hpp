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

// Central finite-difference oracle shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "actcodec/autograd.hpp"

namespace actcodec::testing {

using Build = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

struct GradCheck {
  double max_rel = 0.0;   ///< worst |g - fd| / max(|g|, |fd|, floor)
  std::size_t checked = 0;
  std::size_t worst_input = 0;
  double worst_grad = 0.0;
  double worst_fd = 0.0;
};

/// Compares reverse-mode gradients of the scalar built by `f` against central
/// differences for every entry of every input. Entries are probed with
/// stride `every` to bound the cost on larger parameter sets.
inline GradCheck grad_check(const std::vector<Mat>& inputs, const Build& f, double h = 1e-6,
                            double floor = 1e-7, std::size_t every = 1) {
  std::vector<Mat> grads;
  {
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (const auto& m : inputs) leaves.push_back(tape.leaf(m));
    const ad::Var out = f(tape, leaves);
    tape.backward(out);
    for (const auto& l : leaves) grads.push_back(tape.grad(l.id));
  }
  auto eval = [&](const std::vector<Mat>& xs) {
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (const auto& m : xs) leaves.push_back(tape.constant(m));
    return f(tape, leaves).scalar();
  };
  GradCheck res;
  std::vector<Mat> probe = inputs;
  std::size_t counter = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (Eigen::Index e = 0; e < inputs[i].size(); ++e) {
      if (counter++ % every != 0) continue;
      const double x0 = inputs[i].data()[e];
      probe[i].data()[e] = x0 + h;
      const double up = eval(probe);
      probe[i].data()[e] = x0 - h;
      const double down = eval(probe);
      probe[i].data()[e] = x0;
      const double fd = (up - down) / (2.0 * h);
      const double g = grads[i].data()[e];
      const double denom = std::max({std::abs(g), std::abs(fd), floor});
      if (std::abs(g - fd) / denom > res.max_rel) {
        res.max_rel = std::abs(g - fd) / denom;
        res.worst_input = i;
        res.worst_grad = g;
        res.worst_fd = fd;
      }
      ++res.checked;
    }
  }
  return res;
}

inline Mat random_mat(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double scale = 1.0) {
  auto rng = make_rng(seed, 0x7E57);
  Mat m(r, c);
  for (auto& v : m.reshaped()) v = scale * gaussian(rng);
  return m;
}

}  // namespace actcodec::testing
