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

// Minimal tape-based reverse-mode differentiation over dense row-major
// matrices. Batched sequence ops treat the row dimension as `blocks`
// contiguous groups of equal length (one group per example).

#include <functional>
#include <string>
#include <vector>

#include "actcodec/common.hpp"

namespace actcodec::ad {

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Mat& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const { return value()(0, 0); }
};

class Tape {
 public:
  Var leaf(Mat value, bool requires_grad = true);
  Var constant(Mat value) { return leaf(std::move(value), false); }

  /// Seeds d(out)/d(out) = 1 for a 1x1 node (scaled by `seed`) and runs the
  /// recorded backward closures in reverse order.
  void backward(Var out, double seed = 1.0);

  const Mat& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  /// Gradient accumulated on a node; zero matrix if nothing flowed into it.
  Mat grad(int id) const;
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Used by op implementations.
  using Backward = std::function<void(Tape&, int self)>;
  Var push(Mat value, std::initializer_list<Var> inputs, Backward bw);
  Mat& grad_ref(int id);
  const Mat& upstream(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Linear algebra.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);                   ///< elementwise
Var scale(Var a, double s);
Var add_row(Var a, Var row);             ///< a + broadcast 1 x n row
Var add_tiled(Var a, Var tile);          ///< a (blocks*L x n) + tile (L x n) per block
Var block_left(Var x, const Mat& p);     ///< per block: out_b = p * x_b

// Pointwise.
Var tanh(Var a);
Var gelu(Var a);                         ///< tanh approximation

Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

/// Depthwise 1-D convolution along rows inside each block, zero "same"
/// padding. kernel is kw x C (kw odd).
Var depthwise_conv(Var x, Var kernel, int blocks);

/// Rotary position embedding on each head's (2i, 2i+1) pairs.
/// positions is blocks x S.
Var rope(Var x, const Eigen::MatrixXi& positions, int heads, double base = 10000.0);

/// Multi-head scaled dot-product attention per block. mask(i, j) true means
/// query i may attend key j.
Var attention(Var q, Var k, Var v, int heads, const BoolMat& mask, int blocks);

/// out.data()[i] = x.data()[index[i]], or 0 where index[i] < 0.
Var gather(Var x, const std::vector<int>& index, Eigen::Index rows, Eigen::Index cols);
/// Row lookup: out.row(i) = table.row(ids[i]).
Var embedding(Var table, const std::vector<int>& ids);
/// Per block, rows of a (La per block) followed by rows of b (Lb per block).
Var concat_blocks(Var a, Var b, int blocks);

/// Forward value z_q; gradient passes to z unchanged.
Var straight_through(Var z, const Mat& z_q);

// Scalar reductions (1x1 outputs).
Var l1_mean(Var a, Var b, const Mat& weights);     ///< sum w|a - b| / sum w
Var sq_mean(Var a, const Mat& target);             ///< mean (a - target)^2, target detached
/// Mean cross-entropy over rows with target >= 0.
Var cross_entropy(Var logits, const std::vector<int>& targets);

/// Named parameter tensors in a fixed registration order.
class ParamSet {
 public:
  int add(std::string name, Mat value);
  int index(const std::string& name) const;
  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Mat& value(std::size_t i) { return values_[i]; }
  const Mat& value(std::size_t i) const { return values_[i]; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t scalar_count() const;
  /// One leaf per parameter, in registration order.
  std::vector<Var> bind(Tape& tape, bool requires_grad) const;

  bool operator==(const ParamSet&) const;

 private:
  std::vector<std::string> names_;
  std::vector<Mat> values_;
};

}  // namespace actcodec::ad
