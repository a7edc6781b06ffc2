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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fairspectral/eigensolver.hpp"

namespace fairspectral {
namespace {

// Householder reduction of the symmetric matrix held in v (column-major, so
// v(k, j) with k running is contiguous) to tridiagonal form. On exit v holds
// the accumulated orthogonal transform, d the diagonal and e the
// subdiagonal in e[1..n-1].
void Tridiagonalize(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
  const Eigen::Index n = v.rows();
  for (Eigen::Index j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (Eigen::Index i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (Eigen::Index k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (Eigen::Index j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (Eigen::Index k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (Eigen::Index j = 0; j < i; ++j) e[j] = 0.0;

      // e = A u, using the lower triangle.
      for (Eigen::Index j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        double* col = &v(0, j);
        for (Eigen::Index k = j + 1; k <= i - 1; ++k) {
          g += col[k] * d[k];
          e[k] += col[k] * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (Eigen::Index j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (Eigen::Index j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        double* col = &v(0, j);
        for (Eigen::Index k = j; k <= i - 1; ++k) col[k] -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  // Accumulate transformations.
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    double* next = &v(0, i + 1);
    if (h != 0.0) {
      for (Eigen::Index k = 0; k <= i; ++k) d[k] = next[k] / h;
      for (Eigen::Index j = 0; j <= i; ++j) {
        double* col = &v(0, j);
        double g = 0.0;
        for (Eigen::Index k = 0; k <= i; ++k) g += next[k] * col[k];
        for (Eigen::Index k = 0; k <= i; ++k) col[k] -= g * d[k];
      }
    }
    for (Eigen::Index k = 0; k <= i; ++k) next[k] = 0.0;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL with Wilkinson-style shifts on the tridiagonal (d, e),
// rotating the columns of v along.
void TridiagonalQl(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
  const Eigen::Index n = v.rows();
  for (Eigen::Index i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (Eigen::Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    Eigen::Index m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 60) throw NumericalError("tridiagonal QL failed to converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (Eigen::Index i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0;
        double c2 = c;
        double c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0;
        double s2 = 0.0;
        for (Eigen::Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          double* a = &v(0, i);
          double* b = &v(0, i + 1);
          for (Eigen::Index k = 0; k < n; ++k) {
            const double t = b[k];
            b[k] = s * a[k] + c * t;
            a[k] = c * a[k] - s * t;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

DenseEigen SymmetricEigenAscending(const Matrix& s) {
  if (s.rows() != s.cols()) throw InvalidArgument("eigendecomposition needs a square matrix");
  const Eigen::Index n = s.rows();
  DenseEigen out;
  if (n == 0) return out;
  if (!s.allFinite()) throw NumericalError("eigendecomposition input is not finite");
  Matrix v = s;
  std::vector<double> d(static_cast<std::size_t>(n));
  std::vector<double> e(static_cast<std::size_t>(n));
  Tridiagonalize(v, d, e);
  TridiagonalQl(v, d, e);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return d[a] < d[b]; });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = d[order[k]];
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

void SortByMagnitude(Vector& values, Matrix& vectors) {
  const Eigen::Index k = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(values(a)) > std::abs(values(b));
  });
  // Magnitudes equal up to rounding count as ties: positive value first.
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const double x = values(order[i]);
    const double y = values(order[i + 1]);
    const double scale = std::max(std::abs(x), 1.0);
    if (std::abs(std::abs(x) - std::abs(y)) <= 1e-12 * scale && y > x) {
      std::swap(order[i], order[i + 1]);
    }
  }
  Vector v2(k);
  Matrix p2(vectors.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    v2(i) = values(order[i]);
    p2.col(i) = vectors.col(order[i]);
  }
  values = std::move(v2);
  vectors = std::move(p2);
}

void CanonicalizeSigns(Matrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    if (vectors.rows() == 0) continue;
    const double top = vectors.col(c).cwiseAbs().maxCoeff();
    Eigen::Index best = 0;
    while (std::abs(vectors(best, c)) < top * (1.0 - 1e-12)) ++best;
    if (vectors(best, c) < 0) vectors.col(c) *= -1.0;
  }
}

DenseEigen FullDenseEigendecomposition(const Matrix& s, std::size_t dense_limit) {
  if (static_cast<std::size_t>(s.rows()) > dense_limit) {
    throw Error(ErrorKind::kLimitExceeded,
                "dense eigendecomposition refused: n = " + std::to_string(s.rows()) +
                    " exceeds the dense limit of " + std::to_string(dense_limit));
  }
  DenseEigen e = SymmetricEigenAscending(s);
  SortByMagnitude(e.values, e.vectors);
  CanonicalizeSigns(e.vectors);
  return e;
}

SpectralBasis DenseTopK(const NormalizedOperator& s, std::size_t k, std::size_t dense_limit) {
  const std::size_t n = s.n();
  if (k < 1 || k > n) throw InvalidArgument("K must lie in [1, n]");
  if (n > dense_limit) {
    throw Error(ErrorKind::kLimitExceeded,
                "dense eigendecomposition refused: n = " + std::to_string(n) +
                    " exceeds the dense limit of " + std::to_string(dense_limit));
  }
  const DenseEigen full = FullDenseEigendecomposition(s.matrix.to_dense(), dense_limit);
  SpectralBasis b;
  b.mode = s.mode;
  const auto kk = static_cast<Eigen::Index>(k);
  b.eigenvalues = full.values.head(kk);
  b.eigenvectors = full.vectors.leftCols(kk);
  b.residuals.resize(kk);
  for (Eigen::Index i = 0; i < kk; ++i) {
    const Vector p = b.eigenvectors.col(i);
    b.residuals(i) = (s.matrix.multiply(p) - b.eigenvalues(i) * p).norm();
  }
  return b;
}

double OrthonormalityError(const Matrix& p) {
  const Matrix g = p.transpose() * p - Matrix::Identity(p.cols(), p.cols());
  return g.cwiseAbs().maxCoeff();
}

double SubspaceAngle(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw InvalidArgument("SubspaceAngle: row mismatch");
  // sin of the largest angle is ||(I - A A^T) B||_2 for orthonormal A, B.
  const Matrix r = b - a * (a.transpose() * b);
  const DenseEigen e = SymmetricEigenAscending(r.transpose() * r);
  const double top = e.values.size() > 0 ? std::max(0.0, e.values(e.values.size() - 1)) : 0.0;
  return std::asin(std::min(1.0, std::sqrt(top)));
}

}  // namespace fairspectral
