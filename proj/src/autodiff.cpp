/*
 * Copyright 2026 The fairspectral Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fairspectral/autodiff.hpp"

#include <cmath>
#include <string>

namespace fairspectral::ad {
namespace {

void Accumulate(Tape& t, std::size_t id, const Matrix& g) {
  Tape::Node& node = t.node(id);
  if (node.requires_grad) node.grad += g;
}

void RequireSameTape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw InvalidArgument("autodiff: operands live on different tapes");
  }
}

void RequireShape(bool ok, const char* op) {
  if (!ok) throw InvalidArgument(std::string("autodiff: shape mismatch in ") + op);
}

}  // namespace

const Matrix& Var::value() const { return tape_->node(id_).value; }
const Matrix& Var::grad() const { return tape_->node(id_).grad; }
bool Var::requires_grad() const { return tape_->node(id_).requires_grad; }

Var Tape::Constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, "constant", nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::Leaf(Matrix value) {
  Node node;
  node.grad = Matrix::Zero(value.rows(), value.cols());
  node.value = std::move(value);
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::Record(Matrix value, std::initializer_list<Var> parents, const char* op,
                 BackwardFn fn) {
  bool needs = false;
  for (const Var& p : parents) needs = needs || p.requires_grad();
  Node node;
  node.op = op;
  node.requires_grad = needs;
  if (needs) {
    node.grad = Matrix::Zero(value.rows(), value.cols());
    node.backward = std::move(fn);
  }
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::Backward(Var output) {
  Backward(output, Matrix::Ones(output.rows(), output.cols()));
}

void Tape::Backward(Var output, const Matrix& seed) {
  if (output.tape() != this) throw InvalidArgument("autodiff: output not on this tape");
  Node& out = nodes_[output.id()];
  if (!out.requires_grad) return;
  RequireShape(seed.rows() == out.value.rows() && seed.cols() == out.value.cols(), "seed");
  out.grad += seed;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || !node.backward) continue;
    if (!node.grad.allFinite()) {
      throw NumericalError(std::string("autodiff: non-finite gradient flowing into ") + node.op);
    }
    node.backward(*this, i);
  }
}

Var MatMul(Var a, Var b) {
  RequireSameTape(a, b);
  RequireShape(a.cols() == b.rows(), "matmul");
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return a.tape()->Record(a.value() * b.value(), {a, b}, "matmul",
                          [ia, ib](Tape& t, std::size_t self) {
                            const Matrix& g = t.node(self).grad;
                            if (t.node(ia).requires_grad) {
                              t.node(ia).grad.noalias() += g * t.node(ib).value.transpose();
                            }
                            if (t.node(ib).requires_grad) {
                              t.node(ib).grad.noalias() += t.node(ia).value.transpose() * g;
                            }
                          });
}

Var MatMul(const Matrix& a, Var b) {
  RequireShape(a.cols() == b.rows(), "matmul");
  const std::size_t ib = b.id();
  return b.tape()->Record(a * b.value(), {b}, "matmul", [&a, ib](Tape& t, std::size_t self) {
    t.node(ib).grad.noalias() += a.transpose() * t.node(self).grad;
  });
}

Var MatMul(Var a, const Matrix& b) {
  RequireShape(a.cols() == b.rows(), "matmul");
  const std::size_t ia = a.id();
  return a.tape()->Record(a.value() * b, {a}, "matmul", [&b, ia](Tape& t, std::size_t self) {
    t.node(ia).grad.noalias() += t.node(self).grad * b.transpose();
  });
}

Var MatMulTransposed(const Matrix& a, Var b) {
  RequireShape(a.rows() == b.rows(), "matmul_transposed");
  const std::size_t ib = b.id();
  return b.tape()->Record(a.transpose() * b.value(), {b}, "matmul_transposed",
                          [&a, ib](Tape& t, std::size_t self) {
                            t.node(ib).grad.noalias() += a * t.node(self).grad;
                          });
}

Var SpMatMul(const CsrMatrix& a, Var b) {
  RequireShape(a.cols == static_cast<std::size_t>(b.rows()), "spmm");
  const std::size_t ib = b.id();
  return b.tape()->Record(a.multiply(b.value()), {b}, "spmm", [&a, ib](Tape& t, std::size_t self) {
    t.node(ib).grad += a.multiply(t.node(self).grad);
  });
}

Var Add(Var a, Var b) {
  RequireSameTape(a, b);
  RequireShape(a.rows() == b.rows() && a.cols() == b.cols(), "add");
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return a.tape()->Record(a.value() + b.value(), {a, b}, "add",
                          [ia, ib](Tape& t, std::size_t self) {
                            const Matrix& g = t.node(self).grad;
                            Accumulate(t, ia, g);
                            Accumulate(t, ib, g);
                          });
}

Var AddRowVector(Var a, Var row) {
  RequireSameTape(a, row);
  RequireShape(row.rows() == 1 && row.cols() == a.cols(), "add_row");
  const std::size_t ia = a.id();
  const std::size_t ir = row.id();
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return a.tape()->Record(std::move(out), {a, row}, "add_row",
                          [ia, ir](Tape& t, std::size_t self) {
                            const Matrix& g = t.node(self).grad;
                            Accumulate(t, ia, g);
                            if (t.node(ir).requires_grad) t.node(ir).grad += g.colwise().sum();
                          });
}

Var Scale(Var a, double c) {
  const std::size_t ia = a.id();
  return a.tape()->Record(c * a.value(), {a}, "scale", [ia, c](Tape& t, std::size_t self) {
    t.node(ia).grad += c * t.node(self).grad;
  });
}

Var Mul(Var a, Var b) {
  RequireSameTape(a, b);
  RequireShape(a.rows() == b.rows() && a.cols() == b.cols(), "mul");
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return a.tape()->Record(a.value().cwiseProduct(b.value()), {a, b}, "mul",
                          [ia, ib](Tape& t, std::size_t self) {
                            const Matrix& g = t.node(self).grad;
                            if (t.node(ia).requires_grad) {
                              t.node(ia).grad += g.cwiseProduct(t.node(ib).value);
                            }
                            if (t.node(ib).requires_grad) {
                              t.node(ib).grad += g.cwiseProduct(t.node(ia).value);
                            }
                          });
}

Var ScaleRows(Var a, Var s) {
  RequireSameTape(a, s);
  RequireShape(s.cols() == 1 && s.rows() == a.rows(), "scale_rows");
  const std::size_t ia = a.id();
  const std::size_t is = s.id();
  Matrix out = s.value().col(0).asDiagonal() * a.value();
  return a.tape()->Record(std::move(out), {a, s}, "scale_rows",
                          [ia, is](Tape& t, std::size_t self) {
                            const Matrix& g = t.node(self).grad;
                            if (t.node(ia).requires_grad) {
                              t.node(ia).grad += t.node(is).value.col(0).asDiagonal() * g;
                            }
                            if (t.node(is).requires_grad) {
                              t.node(is).grad +=
                                  g.cwiseProduct(t.node(ia).value).rowwise().sum();
                            }
                          });
}

Var ConcatCols(Var a, Var b) { return ConcatCols(std::vector<Var>{a, b}); }

Var ConcatCols(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidArgument("autodiff: concat of nothing");
  Tape* tape = parts.front().tape();
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  std::vector<std::size_t> ids;
  std::vector<Eigen::Index> widths;
  for (const Var& p : parts) {
    RequireSameTape(parts.front(), p);
    RequireShape(p.rows() == rows, "concat");
    cols += p.cols();
    ids.push_back(p.id());
    widths.push_back(p.cols());
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  // Record takes an initializer list; route the parent check manually.
  Var result = tape->Record(std::move(out), {}, "concat", nullptr);
  Tape::Node& node = tape->node(result.id());
  for (std::size_t id : ids) node.requires_grad = node.requires_grad || tape->node(id).requires_grad;
  if (node.requires_grad) {
    node.grad = Matrix::Zero(rows, cols);
    node.backward = [ids, widths](Tape& t, std::size_t self) {
      Eigen::Index offset = 0;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (t.node(ids[k]).requires_grad) {
          t.node(ids[k]).grad += t.node(self).grad.middleCols(offset, widths[k]);
        }
        offset += widths[k];
      }
    };
  }
  return result;
}

Var SliceCols(Var a, Eigen::Index start, Eigen::Index count) {
  RequireShape(start >= 0 && count >= 0 && start + count <= a.cols(), "slice");
  const std::size_t ia = a.id();
  return a.tape()->Record(a.value().middleCols(start, count), {a}, "slice",
                          [ia, start, count](Tape& t, std::size_t self) {
                            t.node(ia).grad.middleCols(start, count) += t.node(self).grad;
                          });
}

Var Transpose(Var a) {
  const std::size_t ia = a.id();
  return a.tape()->Record(a.value().transpose(), {a}, "transpose",
                          [ia](Tape& t, std::size_t self) {
                            t.node(ia).grad += t.node(self).grad.transpose();
                          });
}

Var Relu(Var a) {
  const std::size_t ia = a.id();
  return a.tape()->Record(a.value().cwiseMax(0.0), {a}, "relu", [ia](Tape& t, std::size_t self) {
    const Matrix& x = t.node(ia).value;
    t.node(ia).grad += (x.array() > 0.0).select(t.node(self).grad, 0.0);
  });
}

Var SoftmaxRows(Var a) {
  const std::size_t ia = a.id();
  Matrix y = a.value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    y.row(r).array() -= y.row(r).maxCoeff();
    y.row(r) = y.row(r).array().exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return a.tape()->Record(std::move(y), {a}, "softmax", [ia](Tape& t, std::size_t self) {
    const Matrix& y = t.node(self).value;
    const Matrix& g = t.node(self).grad;
    const Vector dot = g.cwiseProduct(y).rowwise().sum();
    t.node(ia).grad += y.cwiseProduct(g - dot.replicate(1, g.cols()));
  });
}

Var LayerNormRows(Var x, Var gamma, Var beta, double eps) {
  RequireSameTape(x, gamma);
  RequireSameTape(x, beta);
  RequireShape(gamma.rows() == 1 && beta.rows() == 1 && gamma.cols() == x.cols() &&
                   beta.cols() == x.cols(),
               "layer_norm");
  const Eigen::Index c = x.cols();
  const Matrix& xv = x.value();
  Matrix xhat(xv.rows(), c);
  Vector inv_sd(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const double mu = xv.row(r).mean();
    const double var = (xv.row(r).array() - mu).square().mean();
    inv_sd(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (xv.row(r).array() - mu) * inv_sd(r);
  }
  Matrix out = xhat.array().rowwise() * gamma.value().row(0).array();
  out.rowwise() += beta.value().row(0);
  const std::size_t ix = x.id();
  const std::size_t ig = gamma.id();
  const std::size_t ib = beta.id();
  return x.tape()->Record(
      std::move(out), {x, gamma, beta}, "layer_norm",
      [ix, ig, ib, xhat = std::move(xhat), inv_sd = std::move(inv_sd)](Tape& t, std::size_t self) {
        const Matrix& g = t.node(self).grad;
        if (t.node(ig).requires_grad) t.node(ig).grad += g.cwiseProduct(xhat).colwise().sum();
        if (t.node(ib).requires_grad) t.node(ib).grad += g.colwise().sum();
        if (!t.node(ix).requires_grad) return;
        const Matrix dxhat = g.array().rowwise() * t.node(ig).value.row(0).array();
        const double width = static_cast<double>(dxhat.cols());
        for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
          const double m1 = dxhat.row(r).sum() / width;
          const double m2 = dxhat.row(r).dot(xhat.row(r)) / width;
          t.node(ix).grad.row(r).array() +=
              inv_sd(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
        }
      });
}

Var Sum(Var a) {
  const std::size_t ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->Record(std::move(out), {a}, "sum", [ia](Tape& t, std::size_t self) {
    t.node(ia).grad.array() += t.node(self).grad(0, 0);
  });
}

Var MaskedCrossEntropy(Var logits, const std::vector<int>& labels, const Mask& mask) {
  const Matrix& z = logits.value();
  RequireShape(static_cast<std::size_t>(z.rows()) == labels.size() && labels.size() == mask.size(),
               "cross_entropy");
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) rows.push_back(static_cast<Eigen::Index>(i));
  }
  if (rows.empty()) throw InvalidArgument("cross-entropy over an empty mask");
  const double m = static_cast<double>(rows.size());
  double total = 0.0;
  // Softmax minus one-hot, already divided by the mask size.
  Matrix dz = Matrix::Zero(z.rows(), z.cols());
  for (Eigen::Index r : rows) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= z.cols()) throw InvalidArgument("cross-entropy: label out of range");
    const double mx = z.row(r).maxCoeff();
    const Eigen::RowVectorXd e = (z.row(r).array() - mx).exp().matrix();
    const double se = e.sum();
    total += mx + std::log(se) - z(r, y);
    dz.row(r) = e / se / m;
    dz(r, y) -= 1.0 / m;
  }
  Matrix out(1, 1);
  out(0, 0) = total / m;
  const std::size_t il = logits.id();
  return logits.tape()->Record(std::move(out), {logits}, "cross_entropy",
                               [il, dz = std::move(dz)](Tape& t, std::size_t self) {
                                 t.node(il).grad += t.node(self).grad(0, 0) * dz;
                               });
}

}  // namespace fairspectral::ad
