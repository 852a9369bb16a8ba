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

#include "actcodec/autograd.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace actcodec::ad {

const Mat& Var::value() const { return tape->value(id); }

Var Tape::leaf(Mat value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Mat(), requires_grad, nullptr});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::push(Mat value, std::initializer_list<Var> inputs, Backward bw) {
  bool rg = false;
  for (const Var& v : inputs) {
    if (v.tape != this) throw std::logic_error("ad: mixing variables from different tapes");
    rg = rg || requires_grad(v.id);
  }
  nodes_.push_back(Node{std::move(value), Mat(), rg, rg ? std::move(bw) : nullptr});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Mat& Tape::grad_ref(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Mat Tape::grad(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) return Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var out, double seed) {
  if (out.rows() != 1 || out.cols() != 1) throw std::logic_error("ad: backward needs a scalar output");
  grad_ref(out.id)(0, 0) += seed;
  for (int i = out.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.requires_grad && n.backward && n.grad.size() != 0) n.backward(*this, i);
  }
}

namespace {

void check(bool cond, const char* op, const std::string& what) {
  if (!cond) throw std::invalid_argument(std::string("ad::") + op + ": " + what);
}

std::string shape(const Mat& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

bool rg(Tape& t, Var v) { return t.requires_grad(v.id); }

}  // namespace

Var matmul(Var a, Var b) {
  check(a.cols() == b.rows(), "matmul", shape(a.value()) + " * " + shape(b.value()));
  return a.tape->push(a.value() * b.value(), {a, b}, [a, b](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    if (rg(t, a)) t.grad_ref(a.id).noalias() += g * t.value(b.id).transpose();
    if (rg(t, b)) t.grad_ref(b.id).noalias() += t.value(a.id).transpose() * g;
  });
}

Var add(Var a, Var b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(), "add", shape(a.value()) + " + " + shape(b.value()));
  return a.tape->push(a.value() + b.value(), {a, b}, [a, b](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    if (rg(t, a)) t.grad_ref(a.id) += g;
    if (rg(t, b)) t.grad_ref(b.id) += g;
  });
}

Var sub(Var a, Var b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(), "sub", shape(a.value()) + " - " + shape(b.value()));
  return a.tape->push(a.value() - b.value(), {a, b}, [a, b](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    if (rg(t, a)) t.grad_ref(a.id) += g;
    if (rg(t, b)) t.grad_ref(b.id) -= g;
  });
}

Var mul(Var a, Var b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(), "mul", shape(a.value()) + " .* " + shape(b.value()));
  return a.tape->push(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    if (rg(t, a)) t.grad_ref(a.id) += g.cwiseProduct(t.value(b.id));
    if (rg(t, b)) t.grad_ref(b.id) += g.cwiseProduct(t.value(a.id));
  });
}

Var scale(Var a, double s) {
  return a.tape->push(a.value() * s, {a}, [a, s](Tape& t, int self) {
    t.grad_ref(a.id) += t.upstream(self) * s;
  });
}

Var add_row(Var a, Var row) {
  check(row.rows() == 1 && row.cols() == a.cols(), "add_row", shape(a.value()) + " + " + shape(row.value()));
  Mat out = a.value();
  out.rowwise() += row.value().row(0);
  return a.tape->push(std::move(out), {a, row}, [a, row](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    if (rg(t, a)) t.grad_ref(a.id) += g;
    if (rg(t, row)) t.grad_ref(row.id) += g.colwise().sum();
  });
}

Var add_tiled(Var a, Var tile) {
  const Eigen::Index l = tile.rows();
  check(l > 0 && a.rows() % l == 0 && a.cols() == tile.cols(), "add_tiled",
        shape(a.value()) + " + tiled " + shape(tile.value()));
  const Eigen::Index blocks = a.rows() / l;
  Mat out = a.value();
  for (Eigen::Index b = 0; b < blocks; ++b) out.middleRows(b * l, l) += tile.value();
  return a.tape->push(std::move(out), {a, tile}, [a, tile, l, blocks](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    if (rg(t, a)) t.grad_ref(a.id) += g;
    if (rg(t, tile)) {
      Mat& gt = t.grad_ref(tile.id);
      for (Eigen::Index b = 0; b < blocks; ++b) gt += g.middleRows(b * l, l);
    }
  });
}

Var block_left(Var x, const Mat& p) {
  const Eigen::Index lin = p.cols();
  const Eigen::Index lout = p.rows();
  check(lin > 0 && x.rows() % lin == 0, "block_left", shape(p) + " applied to " + shape(x.value()));
  const Eigen::Index blocks = x.rows() / lin;
  Mat out(blocks * lout, x.cols());
  for (Eigen::Index b = 0; b < blocks; ++b) out.middleRows(b * lout, lout).noalias() = p * x.value().middleRows(b * lin, lin);
  auto pp = std::make_shared<const Mat>(p);
  return x.tape->push(std::move(out), {x}, [x, pp, lin, lout, blocks](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    Mat& gx = t.grad_ref(x.id);
    for (Eigen::Index b = 0; b < blocks; ++b) {
      gx.middleRows(b * lin, lin).noalias() += pp->transpose() * g.middleRows(b * lout, lout);
    }
  });
}

Var tanh(Var a) {
  Mat y = a.value().array().tanh().matrix();
  return a.tape->push(std::move(y), {a}, [a](Tape& t, int self) {
    const Mat& y = t.value(self);
    t.grad_ref(a.id).array() += t.upstream(self).array() * (1.0 - y.array().square());
  });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var gelu(Var a) {
  const auto& x = a.value().array();
  Mat y = (0.5 * x * (1.0 + (kGeluC * (x + kGeluA * x.cube())).tanh())).matrix();
  return a.tape->push(std::move(y), {a}, [a](Tape& t, int self) {
    const auto x = t.value(a.id).array();
    const auto th = (kGeluC * (x + kGeluA * x.cube())).tanh();
    const auto d = 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th.square()) * kGeluC * (1.0 + 3.0 * kGeluA * x.square());
    t.grad_ref(a.id).array() += t.upstream(self).array() * d;
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Eigen::Index c = x.cols();
  check(gamma.rows() == 1 && gamma.cols() == c && beta.rows() == 1 && beta.cols() == c, "layer_norm",
        "affine parameters must be 1x" + std::to_string(c));
  const Mat& xv = x.value();
  auto xhat = std::make_shared<Mat>(xv.rows(), c);
  auto inv_std = std::make_shared<Vec>(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const double mu = xv.row(r).mean();
    const double var = (xv.row(r).array() - mu).square().mean();
    (*inv_std)(r) = 1.0 / std::sqrt(var + eps);
    xhat->row(r) = (xv.row(r).array() - mu) * (*inv_std)(r);
  }
  Mat y = xhat->array().rowwise() * gamma.value().row(0).array();
  y.rowwise() += beta.value().row(0);
  return x.tape->push(std::move(y), {x, gamma, beta}, [x, gamma, beta, xhat, inv_std](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    if (rg(t, gamma)) t.grad_ref(gamma.id) += g.cwiseProduct(*xhat).colwise().sum();
    if (rg(t, beta)) t.grad_ref(beta.id) += g.colwise().sum();
    if (rg(t, x)) {
      Mat dxhat = g.array().rowwise() * t.value(gamma.id).row(0).array();
      Mat& gx = t.grad_ref(x.id);
      const double n = static_cast<double>(g.cols());
      for (Eigen::Index r = 0; r < g.rows(); ++r) {
        const double m1 = dxhat.row(r).sum() / n;
        const double m2 = dxhat.row(r).dot(xhat->row(r)) / n;
        gx.row(r).array() += (*inv_std)(r) * (dxhat.row(r).array() - m1 - xhat->row(r).array() * m2);
      }
    }
  });
}

Var depthwise_conv(Var x, Var kernel, int blocks) {
  const Eigen::Index kw = kernel.rows();
  const Eigen::Index c = x.cols();
  check(kernel.cols() == c && kw % 2 == 1, "depthwise_conv", "kernel " + shape(kernel.value()) + " for width " + std::to_string(c));
  check(blocks > 0 && x.rows() % blocks == 0, "depthwise_conv", "rows not divisible by blocks");
  const Eigen::Index len = x.rows() / blocks;
  const Eigen::Index half = kw / 2;
  const Mat& xv = x.value();
  const Mat& kv = kernel.value();
  Mat out = Mat::Zero(xv.rows(), c);
  for (int b = 0; b < blocks; ++b) {
    const Eigen::Index base = b * len;
    for (Eigen::Index i = 0; i < len; ++i) {
      for (Eigen::Index k = 0; k < kw; ++k) {
        const Eigen::Index src = i + k - half;
        if (src < 0 || src >= len) continue;
        out.row(base + i) += kv.row(k).cwiseProduct(xv.row(base + src));
      }
    }
  }
  return x.tape->push(std::move(out), {x, kernel}, [x, kernel, blocks, len, half, kw](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    const Mat& xv = t.value(x.id);
    const Mat& kv = t.value(kernel.id);
    const bool gx_on = rg(t, x);
    const bool gk_on = rg(t, kernel);
    Mat* gx = gx_on ? &t.grad_ref(x.id) : nullptr;
    Mat* gk = gk_on ? &t.grad_ref(kernel.id) : nullptr;
    for (int b = 0; b < blocks; ++b) {
      const Eigen::Index base = b * len;
      for (Eigen::Index i = 0; i < len; ++i) {
        for (Eigen::Index k = 0; k < kw; ++k) {
          const Eigen::Index src = i + k - half;
          if (src < 0 || src >= len) continue;
          if (gx_on) gx->row(base + src) += g.row(base + i).cwiseProduct(kv.row(k));
          if (gk_on) gk->row(k) += g.row(base + i).cwiseProduct(xv.row(base + src));
        }
      }
    }
  });
}

namespace {

void rope_apply(const Mat& in, Mat& out, const Eigen::MatrixXi& positions, int heads, double base, bool inverse) {
  const Eigen::Index s = positions.cols();
  const Eigen::Index dh = in.cols() / heads;
  for (Eigen::Index b = 0; b < positions.rows(); ++b) {
    for (Eigen::Index i = 0; i < s; ++i) {
      const Eigen::Index r = b * s + i;
      const double p = positions(b, i);
      for (int h = 0; h < heads; ++h) {
        for (Eigen::Index k = 0; k + 1 < dh; k += 2) {
          const double theta = p * std::pow(base, -static_cast<double>(k) / static_cast<double>(dh));
          const double cs = std::cos(theta);
          const double sn = inverse ? -std::sin(theta) : std::sin(theta);
          const Eigen::Index c0 = h * dh + k;
          const double x0 = in(r, c0);
          const double x1 = in(r, c0 + 1);
          out(r, c0) = x0 * cs - x1 * sn;
          out(r, c0 + 1) = x0 * sn + x1 * cs;
        }
      }
    }
  }
}

}  // namespace

Var rope(Var x, const Eigen::MatrixXi& positions, int heads, double base) {
  check(heads > 0 && x.cols() % heads == 0, "rope", "width not divisible by heads");
  check(positions.rows() * positions.cols() == x.rows(), "rope", "position count does not match rows");
  Mat out = x.value();
  rope_apply(x.value(), out, positions, heads, base, false);
  auto pos = std::make_shared<const Eigen::MatrixXi>(positions);
  return x.tape->push(std::move(out), {x}, [x, pos, heads, base](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    Mat back = g;
    rope_apply(g, back, *pos, heads, base, true);
    t.grad_ref(x.id) += back;
  });
}

Var attention(Var q, Var k, Var v, int heads, const BoolMat& mask, int blocks) {
  const Eigen::Index d = q.cols();
  check(k.cols() == d && v.cols() == d && q.rows() == k.rows() && q.rows() == v.rows(), "attention", "q/k/v shapes differ");
  check(heads > 0 && d % heads == 0, "attention", "width not divisible by heads");
  check(blocks > 0 && q.rows() % blocks == 0, "attention", "rows not divisible by blocks");
  const Eigen::Index s = q.rows() / blocks;
  check(mask.rows() == s && mask.cols() == s, "attention", "mask must be " + std::to_string(s) + "x" + std::to_string(s));
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  auto probs = std::make_shared<std::vector<Mat>>(static_cast<std::size_t>(blocks * heads));
  const Mat& qv = q.value();
  const Mat& kv = k.value();
  const Mat& vv = v.value();
  Mat out(q.rows(), d);
  for (int b = 0; b < blocks; ++b) {
    for (int h = 0; h < heads; ++h) {
      const auto qb = qv.block(b * s, h * dh, s, dh);
      const auto kb = kv.block(b * s, h * dh, s, dh);
      const auto vb = vv.block(b * s, h * dh, s, dh);
      Mat sc = (qb * kb.transpose()) * scale;
      Mat& p = (*probs)[static_cast<std::size_t>(b * heads + h)];
      p.resize(s, s);
      for (Eigen::Index i = 0; i < s; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < s; ++j) {
          if (mask(i, j)) mx = std::max(mx, sc(i, j));
        }
        double z = 0.0;
        for (Eigen::Index j = 0; j < s; ++j) {
          p(i, j) = mask(i, j) ? std::exp(sc(i, j) - mx) : 0.0;
          z += p(i, j);
        }
        check(z > 0.0, "attention", "query row with no visible keys");
        p.row(i) /= z;
      }
      out.block(b * s, h * dh, s, dh).noalias() = p * vb;
    }
  }
  return q.tape->push(std::move(out), {q, k, v}, [q, k, v, probs, heads, blocks, s, dh, scale](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    const Mat& qv = t.value(q.id);
    const Mat& kv = t.value(k.id);
    const Mat& vv = t.value(v.id);
    const bool gq_on = rg(t, q), gk_on = rg(t, k), gv_on = rg(t, v);
    Mat* gq = gq_on ? &t.grad_ref(q.id) : nullptr;
    Mat* gk = gk_on ? &t.grad_ref(k.id) : nullptr;
    Mat* gv = gv_on ? &t.grad_ref(v.id) : nullptr;
    for (int b = 0; b < blocks; ++b) {
      for (int h = 0; h < heads; ++h) {
        const Mat& p = (*probs)[static_cast<std::size_t>(b * heads + h)];
        const auto gb = g.block(b * s, h * dh, s, dh);
        if (gv_on) gv->block(b * s, h * dh, s, dh).noalias() += p.transpose() * gb;
        Mat dp = gb * vv.block(b * s, h * dh, s, dh).transpose();
        Mat ds(s, s);
        for (Eigen::Index i = 0; i < s; ++i) {
          const double dot = dp.row(i).dot(p.row(i));
          ds.row(i) = p.row(i).array() * (dp.row(i).array() - dot);
        }
        ds *= scale;
        if (gq_on) gq->block(b * s, h * dh, s, dh).noalias() += ds * kv.block(b * s, h * dh, s, dh);
        if (gk_on) gk->block(b * s, h * dh, s, dh).noalias() += ds.transpose() * qv.block(b * s, h * dh, s, dh);
      }
    }
  });
}

Var gather(Var x, const std::vector<int>& index, Eigen::Index rows, Eigen::Index cols) {
  check(static_cast<Eigen::Index>(index.size()) == rows * cols, "gather", "index size does not match output shape");
  Mat out(rows, cols);
  const Eigen::Index n = x.value().size();
  for (std::size_t i = 0; i < index.size(); ++i) {
    check(index[i] < n, "gather", "index out of range");
    out.data()[i] = index[i] >= 0 ? x.value().data()[index[i]] : 0.0;
  }
  auto idx = std::make_shared<const std::vector<int>>(index);
  return x.tape->push(std::move(out), {x}, [x, idx](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    Mat& gx = t.grad_ref(x.id);
    for (std::size_t i = 0; i < idx->size(); ++i) {
      if ((*idx)[i] >= 0) gx.data()[(*idx)[i]] += g.data()[i];
    }
  });
}

Var embedding(Var table, const std::vector<int>& ids) {
  Mat out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    check(ids[i] >= 0 && ids[i] < table.rows(), "embedding", "id " + std::to_string(ids[i]) + " out of range");
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(ids[i]);
  }
  auto idp = std::make_shared<const std::vector<int>>(ids);
  return table.tape->push(std::move(out), {table}, [table, idp](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    Mat& gt = t.grad_ref(table.id);
    for (std::size_t i = 0; i < idp->size(); ++i) gt.row((*idp)[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var concat_blocks(Var a, Var b, int blocks) {
  check(blocks > 0 && a.rows() % blocks == 0 && b.rows() % blocks == 0 && a.cols() == b.cols(), "concat_blocks",
        shape(a.value()) + " with " + shape(b.value()));
  const Eigen::Index la = a.rows() / blocks;
  const Eigen::Index lb = b.rows() / blocks;
  Mat out(a.rows() + b.rows(), a.cols());
  for (int i = 0; i < blocks; ++i) {
    out.middleRows(i * (la + lb), la) = a.value().middleRows(i * la, la);
    out.middleRows(i * (la + lb) + la, lb) = b.value().middleRows(i * lb, lb);
  }
  return a.tape->push(std::move(out), {a, b}, [a, b, blocks, la, lb](Tape& t, int self) {
    const Mat& g = t.upstream(self);
    for (int i = 0; i < blocks; ++i) {
      if (rg(t, a)) t.grad_ref(a.id).middleRows(i * la, la) += g.middleRows(i * (la + lb), la);
      if (rg(t, b)) t.grad_ref(b.id).middleRows(i * lb, lb) += g.middleRows(i * (la + lb) + la, lb);
    }
  });
}

Var straight_through(Var z, const Mat& z_q) {
  check(z.rows() == z_q.rows() && z.cols() == z_q.cols(), "straight_through", shape(z.value()) + " vs " + shape(z_q));
  return z.tape->push(z_q, {z}, [z](Tape& t, int self) { t.grad_ref(z.id) += t.upstream(self); });
}

Var l1_mean(Var a, Var b, const Mat& weights) {
  check(a.rows() == b.rows() && a.cols() == b.cols() && weights.rows() == a.rows() && weights.cols() == a.cols(),
        "l1_mean", "shape mismatch");
  const double wsum = weights.sum();
  check(wsum > 0.0, "l1_mean", "all weights are zero");
  const Mat diff = a.value() - b.value();
  Mat out(1, 1);
  out(0, 0) = weights.cwiseProduct(diff.cwiseAbs()).sum() / wsum;
  auto w = std::make_shared<const Mat>(weights);
  return a.tape->push(std::move(out), {a, b}, [a, b, w, wsum](Tape& t, int self) {
    const double g = t.upstream(self)(0, 0);
    const Mat sg = (t.value(a.id) - t.value(b.id)).array().sign().matrix().cwiseProduct(*w) * (g / wsum);
    if (rg(t, a)) t.grad_ref(a.id) += sg;
    if (rg(t, b)) t.grad_ref(b.id) -= sg;
  });
}

Var sq_mean(Var a, const Mat& target) {
  check(a.rows() == target.rows() && a.cols() == target.cols(), "sq_mean", "shape mismatch");
  const double n = static_cast<double>(a.value().size());
  Mat out(1, 1);
  out(0, 0) = (a.value() - target).squaredNorm() / n;
  auto tp = std::make_shared<const Mat>(target);
  return a.tape->push(std::move(out), {a}, [a, tp, n](Tape& t, int self) {
    t.grad_ref(a.id) += (t.value(a.id) - *tp) * (2.0 * t.upstream(self)(0, 0) / n);
  });
}

Var cross_entropy(Var logits, const std::vector<int>& targets) {
  check(static_cast<Eigen::Index>(targets.size()) == logits.rows(), "cross_entropy", "one target per row required");
  const Mat& lv = logits.value();
  auto probs = std::make_shared<Mat>(lv.rows(), lv.cols());
  double total = 0.0;
  int count = 0;
  for (Eigen::Index r = 0; r < lv.rows(); ++r) {
    const double mx = lv.row(r).maxCoeff();
    probs->row(r) = (lv.row(r).array() - mx).exp();
    const double z = probs->row(r).sum();
    probs->row(r) /= z;
    const int tgt = targets[static_cast<std::size_t>(r)];
    if (tgt < 0) continue;
    check(tgt < lv.cols(), "cross_entropy", "target out of range");
    total -= (lv(r, tgt) - mx) - std::log(z);
    ++count;
  }
  check(count > 0, "cross_entropy", "no target rows");
  Mat out(1, 1);
  out(0, 0) = total / count;
  auto tg = std::make_shared<const std::vector<int>>(targets);
  return logits.tape->push(std::move(out), {logits}, [logits, probs, tg, count](Tape& t, int self) {
    const double g = t.upstream(self)(0, 0) / count;
    Mat& gl = t.grad_ref(logits.id);
    for (Eigen::Index r = 0; r < probs->rows(); ++r) {
      const int tgt = (*tg)[static_cast<std::size_t>(r)];
      if (tgt < 0) continue;
      gl.row(r) += probs->row(r) * g;
      gl(r, tgt) -= g;
    }
  });
}

int ParamSet::add(std::string name, Mat value) {
  for (const auto& n : names_) {
    if (n == name) throw std::logic_error("duplicate parameter name " + name);
  }
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return static_cast<int>(values_.size()) - 1;
}

int ParamSet::index(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  throw std::out_of_range("no parameter named " + name);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

std::vector<Var> ParamSet::bind(Tape& tape, bool requires_grad) const {
  std::vector<Var> out;
  out.reserve(values_.size());
  for (const auto& v : values_) out.push_back(tape.leaf(v, requires_grad));
  return out;
}

bool ParamSet::operator==(const ParamSet& o) const {
  if (names_ != o.names_) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i].rows() != o.values_[i].rows() || values_[i].cols() != o.values_[i].cols()) return false;
    if (values_[i] != o.values_[i]) return false;
  }
  return true;
}

}  // namespace actcodec::ad
