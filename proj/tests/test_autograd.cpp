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

#include "actcodec/autograd.hpp"
#include "support.hpp"

using namespace actcodec;
using actcodec::testing::grad_check;
using actcodec::testing::random_mat;
namespace ad = actcodec::ad;

namespace {

constexpr double kTol = 1e-4;

// Reduces any matrix to a scalar with a non-trivial weighting.
ad::Var reduce(ad::Tape& t, ad::Var x) {
  const Mat w = random_mat(x.rows(), x.cols(), 77);
  return ad::sq_mean(ad::add(x, t.constant(w)), Mat::Zero(x.rows(), x.cols()));
}

}  // namespace

TEST_CASE("linear algebra ops") {
  const auto a = random_mat(3, 4, 1), b = random_mat(4, 2, 2), c = random_mat(3, 4, 3);
  CHECK(grad_check({a, b}, [](ad::Tape& t, const auto& x) { return reduce(t, ad::matmul(x[0], x[1])); }).max_rel < kTol);
  CHECK(grad_check({a, c}, [](ad::Tape& t, const auto& x) { return reduce(t, ad::mul(ad::sub(x[0], x[1]), ad::add(x[0], x[1]))); }).max_rel < kTol);
  CHECK(grad_check({a}, [](ad::Tape& t, const auto& x) { return reduce(t, ad::scale(x[0], -2.5)); }).max_rel < kTol);
  const auto row = random_mat(1, 4, 4);
  CHECK(grad_check({a, row}, [](ad::Tape& t, const auto& x) { return reduce(t, ad::add_row(x[0], x[1])); }).max_rel < kTol);
  const auto stacked = random_mat(6, 4, 5), tile = random_mat(2, 4, 6);
  CHECK(grad_check({stacked, tile}, [](ad::Tape& t, const auto& x) { return reduce(t, ad::add_tiled(x[0], x[1])); }).max_rel < kTol);
  const Mat p = random_mat(1, 2, 7);
  CHECK(grad_check({stacked}, [&](ad::Tape& t, const auto& x) { return reduce(t, ad::block_left(x[0], p)); }).max_rel < kTol);
}

TEST_CASE("pointwise and normalization ops") {
  const auto a = random_mat(4, 6, 8);
  CHECK(grad_check({a}, [](ad::Tape& t, const auto& x) { return reduce(t, ad::tanh(x[0])); }).max_rel < kTol);
  CHECK(grad_check({a}, [](ad::Tape& t, const auto& x) { return reduce(t, ad::gelu(x[0])); }).max_rel < kTol);
  const auto g = random_mat(1, 6, 9), b = random_mat(1, 6, 10);
  CHECK(grad_check({a, g, b}, [](ad::Tape& t, const auto& x) { return reduce(t, ad::layer_norm(x[0], x[1], x[2])); }).max_rel < kTol);
}

TEST_CASE("sequence ops") {
  const auto x = random_mat(10, 4, 11), k = random_mat(3, 4, 12);
  CHECK(grad_check({x, k}, [](ad::Tape& t, const auto& v) { return reduce(t, ad::depthwise_conv(v[0], v[1], 2)); }).max_rel < kTol);

  Eigen::MatrixXi pos(2, 5);
  pos << 0, 1, 3, 4, 6, 0, 2, 4, 6, 8;
  CHECK(grad_check({x}, [&](ad::Tape& t, const auto& v) { return reduce(t, ad::rope(v[0], pos, 2)); }).max_rel < kTol);

  BoolMat mask = BoolMat::Constant(5, 5, true);
  mask(0, 3) = mask(1, 4) = false;
  const auto q = random_mat(10, 4, 13), kk = random_mat(10, 4, 14), vv = random_mat(10, 4, 15);
  CHECK(grad_check({q, kk, vv}, [&](ad::Tape& t, const auto& v) { return reduce(t, ad::attention(v[0], v[1], v[2], 2, mask, 2)); }).max_rel < kTol);

  const std::vector<int> idx = {3, -1, 0, 3, 7, 2};
  CHECK(grad_check({random_mat(2, 4, 16)}, [&](ad::Tape& t, const auto& v) { return reduce(t, ad::gather(v[0], idx, 3, 2)); }).max_rel < kTol);
  const std::vector<int> ids = {2, 0, 2, 1};
  CHECK(grad_check({random_mat(3, 5, 17)}, [&](ad::Tape& t, const auto& v) { return reduce(t, ad::embedding(v[0], ids)); }).max_rel < kTol);
  CHECK(grad_check({random_mat(4, 3, 18), random_mat(6, 3, 19)},
                   [](ad::Tape& t, const auto& v) { return reduce(t, ad::concat_blocks(v[0], v[1], 2)); }).max_rel < kTol);
}

TEST_CASE("loss reductions") {
  const auto a = random_mat(5, 3, 20), b = random_mat(5, 3, 21);
  Mat w = Mat::Ones(5, 3);
  w.row(4).setZero();
  CHECK(grad_check({a}, [&](ad::Tape& t, const auto& v) { return ad::l1_mean(v[0], t.constant(b), w); }).max_rel < kTol);
  CHECK(grad_check({a}, [&](ad::Tape&, const auto& v) { return ad::sq_mean(v[0], b); }).max_rel < kTol);
  const std::vector<int> targets = {0, 2, -1, 1, 2};
  CHECK(grad_check({a}, [&](ad::Tape&, const auto& v) { return ad::cross_entropy(v[0], targets); }).max_rel < kTol);
}

TEST_CASE("l1 and cross-entropy values") {
  ad::Tape t;
  Mat a(2, 1), b(2, 1);
  a << 0.5, -0.5;
  b << 0.0, 0.0;
  CHECK(ad::l1_mean(t.constant(a), t.constant(b), Mat::Ones(2, 1)).scalar() == 0.5);
  const ad::Var ce = ad::cross_entropy(t.constant(Mat::Zero(3, 8)), {1, 4, 7});
  CHECK(ce.scalar() == Catch::Approx(std::log(8.0)).epsilon(1e-14));
}

TEST_CASE("straight-through passes gradients to z and nowhere else") {
  const auto z = random_mat(3, 4, 22), zq = random_mat(3, 4, 23), target = random_mat(3, 4, 24);
  ad::Tape t;
  const ad::Var zv = t.leaf(z);
  const ad::Var s = ad::straight_through(zv, zq);
  CHECK(s.value() == zq);
  t.backward(ad::sq_mean(s, target));
  // d/dz equals the gradient of the same loss evaluated with z_q as input.
  const Mat expect = 2.0 * (zq - target) / 12.0;
  CHECK((t.grad(zv.id) - expect).cwiseAbs().maxCoeff() < 1e-15);

  ad::Tape t0;
  const ad::Var z0 = t0.leaf(z);
  t0.backward(ad::sq_mean(ad::straight_through(z0, zq), target), 0.0);
  CHECK(t0.grad(z0.id).isZero());
}

TEST_CASE("doubling the loss doubles every gradient") {
  const auto a = random_mat(4, 4, 25), w = random_mat(4, 4, 26);
  auto grads = [&](double factor) {
    ad::Tape t;
    const ad::Var x = t.leaf(a), y = t.leaf(w);
    t.backward(ad::scale(reduce(t, ad::gelu(ad::matmul(x, y))), factor));
    return std::pair{t.grad(x.id), t.grad(y.id)};
  };
  const auto [g1x, g1y] = grads(1.0);
  const auto [g2x, g2y] = grads(2.0);
  CHECK(g2x == 2.0 * g1x);
  CHECK(g2y == 2.0 * g1y);
}

TEST_CASE("param set binding and equality") {
  ad::ParamSet ps;
  ps.add("w", random_mat(2, 3, 1));
  ps.add("b", Mat::Zero(1, 3));
  CHECK(ps.index("b") == 1);
  CHECK(ps.scalar_count() == 9);
  CHECK_THROWS_AS(ps.add("w", Mat::Zero(1, 1)), std::logic_error);
  ad::Tape t;
  const auto vars = ps.bind(t, true);
  REQUIRE(vars.size() == 2);
  CHECK(vars[0].value() == ps.value(0));
  ad::ParamSet copy = ps;
  CHECK(copy == ps);
  copy.value(1)(0, 2) = 1e-300;
  CHECK_FALSE(copy == ps);
}
