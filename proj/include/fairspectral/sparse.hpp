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
#include <cstdint>
#include <span>
#include <vector>

#include "fairspectral/common.hpp"

namespace fairspectral {

// Compressed sparse row matrix with 32-bit column indices.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }

  // y = A x. Rows are reduced left to right, so results do not depend on
  // anything but the stored order.
  void multiply(std::span<const double> x, std::span<double> y) const;
  Vector multiply(const Vector& x) const;
  // Y = A X for a dense right-hand side.
  Matrix multiply(const Matrix& x) const;

  Matrix to_dense() const;
  bool is_symmetric(double tol = 0.0) const;
  bool has_diagonal_entries() const;

  // Entries with |a_ij| <= drop are skipped.
  static CsrMatrix from_dense(const Matrix& dense, double drop = 0.0);

  // Builds from (row, col, value) triplets; duplicates are summed.
  struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double value;
  };
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols,
                                 std::vector<Triplet> triplets);

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

}  // namespace fairspectral
