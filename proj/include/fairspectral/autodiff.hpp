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

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "fairspectral/common.hpp"
#include "fairspectral/graph.hpp"
#include "fairspectral/sparse.hpp"

namespace fairspectral::ad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records a forward computation and replays it in reverse. Nodes live in a
// deque, so references to values stay valid while new nodes are recorded.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  struct Node {
    Matrix value;
    Matrix grad;  // allocated only when requires_grad
    bool requires_grad = false;
    const char* op = "leaf";
    BackwardFn backward;
  };

  Var Constant(Matrix value);
  // Leaf whose gradient is accumulated by Backward.
  Var Leaf(Matrix value);

  // Internal hook for op implementations. The node requires a gradient when
  // any parent does; `fn` is dropped otherwise.
  Var Record(Matrix value, std::initializer_list<Var> parents, const char* op,
             BackwardFn fn);

  // Seeds d(output) = seed (ones for a 1x1 output) and propagates to every
  // node recorded before it. Throws NumericalError naming the op that
  // produced a non-finite gradient.
  void Backward(Var output);
  void Backward(Var output, const Matrix& seed);

  Node& node(std::size_t id) { return nodes_[id]; }
  const Node& node(std::size_t id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::deque<Node> nodes_;
};

Var MatMul(Var a, Var b);
// Constant factors are held by reference until the tape is discarded.
Var MatMul(const Matrix& a, Var b);
Var MatMul(Var a, const Matrix& b);
Var MatMulTransposed(const Matrix& a, Var b);  // a^T b
// Sparse constant left factor; `a` must be symmetric, since the backward
// pass multiplies by it again in place of a^T.
Var SpMatMul(const CsrMatrix& a, Var b);
Var Add(Var a, Var b);
Var AddRowVector(Var a, Var row);  // a + 1 row, row is 1 x cols
Var Scale(Var a, double c);
Var Mul(Var a, Var b);             // elementwise
Var ScaleRows(Var a, Var s);       // row k of a times s(k); s is rows x 1
Var ConcatCols(Var a, Var b);
Var ConcatCols(const std::vector<Var>& parts);
Var SliceCols(Var a, Eigen::Index start, Eigen::Index count);
Var Transpose(Var a);
Var Relu(Var a);
Var SoftmaxRows(Var a);
Var LayerNormRows(Var x, Var gamma, Var beta, double eps);
Var Sum(Var a);
// Mean softmax cross-entropy over rows selected by `mask`.
Var MaskedCrossEntropy(Var logits, const std::vector<int>& labels, const Mask& mask);

}  // namespace fairspectral::ad
