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

#include "fairspectral/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace fairspectral {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols || y.size() != rows) {
    throw InvalidArgument("CsrMatrix::multiply: dimension mismatch");
  }
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      acc += values[k] * x[col_idx[k]];
    }
    y[i] = acc;
  }
}

Vector CsrMatrix::multiply(const Vector& x) const {
  Vector y(static_cast<Eigen::Index>(rows));
  multiply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
           std::span<double>(y.data(), rows));
  return y;
}

Matrix CsrMatrix::multiply(const Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != cols) {
    throw InvalidArgument("CsrMatrix::multiply: dimension mismatch");
  }
  const Eigen::Index w = x.cols();
  // Row-major staging keeps the inner loop contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xr = x;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> yr =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(
          static_cast<Eigen::Index>(rows), w);
  for (std::size_t i = 0; i < rows; ++i) {
    double* out = yr.data() + i * static_cast<std::size_t>(w);
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const double a = values[k];
      const double* in = xr.data() + std::size_t{col_idx[k]} * static_cast<std::size_t>(w);
      for (Eigen::Index c = 0; c < w; ++c) out[c] += a * in[c];
    }
  }
  return yr;
}

Matrix CsrMatrix::to_dense() const {
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(rows),
                          static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      d(static_cast<Eigen::Index>(i), col_idx[k]) += values[k];
    }
  }
  return d;
}

bool CsrMatrix::is_symmetric(double tol) const {
  if (rows != cols) return false;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const std::size_t j = col_idx[k];
      const auto begin = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[j]);
      const auto end = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[j + 1]);
      const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(i));
      if (it == end || *it != i) return false;
      const double mirrored = values[static_cast<std::size_t>(it - col_idx.begin())];
      if (std::abs(mirrored - values[k]) > tol) return false;
    }
  }
  return true;
}

bool CsrMatrix::has_diagonal_entries() const {
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (col_idx[k] == i) return true;
    }
  }
  return false;
}

CsrMatrix CsrMatrix::from_dense(const Matrix& dense, double drop) {
  CsrMatrix m;
  m.rows = static_cast<std::size_t>(dense.rows());
  m.cols = static_cast<std::size_t>(dense.cols());
  m.row_ptr.assign(1, 0);
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      const double v = dense(i, j);
      if (std::abs(v) > drop) {
        m.col_idx.push_back(static_cast<std::uint32_t>(j));
        m.values.push_back(v);
      }
    }
    m.row_ptr.push_back(m.values.size());
  }
  return m;
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                   std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  bool have_prev = false;
  Triplet prev{};
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw InvalidArgument("CsrMatrix::from_triplets: index out of range");
    }
    if (have_prev && t.row == prev.row && t.col == prev.col) {
      m.values.back() += t.value;
      continue;
    }
    m.col_idx.push_back(t.col);
    m.values.push_back(t.value);
    ++m.row_ptr[t.row + 1];
    prev = t;
    have_prev = true;
  }
  for (std::size_t i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

}  // namespace fairspectral
