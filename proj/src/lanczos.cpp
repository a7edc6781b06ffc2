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
#include <random>
#include <vector>

#include "fairspectral/eigensolver.hpp"

namespace fairspectral {
namespace {

struct RitzPairs {
  Vector values;
  Matrix vectors;
  Vector estimates;  // residual estimates from the Lanczos recurrence
  bool converged = false;
};

// Two passes of classical Gram-Schmidt against the columns of `basis`
// (first `cols` of them) and of `locked`. Returns the accumulated
// coefficients against `basis`.
Vector Reorthogonalize(const Matrix& basis, Eigen::Index cols, const Matrix& locked,
                       Vector& w) {
  Vector h = Vector::Zero(cols);
  for (int pass = 0; pass < 2; ++pass) {
    if (locked.cols() > 0) w.noalias() -= locked * (locked.transpose() * w);
    if (cols > 0) {
      const Vector c = basis.leftCols(cols).transpose() * w;
      w.noalias() -= basis.leftCols(cols) * c;
      h += c;
    }
  }
  return h;
}

Vector RandomUnitVector(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = unif(rng);
  return v;
}

// Fresh direction orthogonal to everything seen so far; zero if the
// complement is numerically empty.
Vector FreshDirection(const Matrix& basis, Eigen::Index cols, const Matrix& locked,
                      std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 5; ++attempt) {
    Vector w = RandomUnitVector(basis.rows(), rng);
    const double before = w.norm();
    Reorthogonalize(basis, cols, locked, w);
    const double after = w.norm();
    if (after > 1e-8 * before) return w / after;
  }
  return Vector::Zero(basis.rows());
}

// Thick-restart Lanczos restricted to the orthogonal complement of `locked`.
// Returns the `want` largest-magnitude Ritz pairs.
RitzPairs RestartedLanczos(const CsrMatrix& a, std::size_t want, const Matrix& locked,
                           double tol, std::size_t& budget, std::size_t subspace,
                           std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(a.rows);
  const Eigen::Index dim = n - locked.cols();
  const auto k = static_cast<Eigen::Index>(want);
  Eigen::Index m = subspace > 0 ? static_cast<Eigen::Index>(subspace)
                                : std::max<Eigen::Index>(2 * k + 10, k + 20);
  m = std::clamp<Eigen::Index>(m, std::min(k + 1, dim), dim);

  Matrix v(n, m);
  Matrix t = Matrix::Zero(m, m);
  Vector start = RandomUnitVector(n, rng);
  Reorthogonalize(v, 0, locked, start);
  v.col(0) = start / start.norm();

  const double eps = std::numeric_limits<double>::epsilon();
  double anorm = 0.0;
  Eigen::Index kept = 0;
  RitzPairs out;
  Vector residual(n);
  for (;;) {
    double beta = 0.0;
    Eigen::Index built = m;
    for (Eigen::Index j = kept; j < m; ++j) {
      if (budget == 0) {
        built = j;
        break;
      }
      --budget;
      Vector w = a.multiply(Vector(v.col(j)));
      const Vector h = Reorthogonalize(v, j + 1, locked, w);
      for (Eigen::Index i = 0; i <= j; ++i) {
        t(i, j) = h(i);
        t(j, i) = h(i);
      }
      beta = w.norm();
      anorm = std::max(anorm, std::sqrt(h.squaredNorm() + beta * beta));
      if (j + 1 == m) {
        residual = w;
        break;
      }
      if (beta <= 1e-10 * std::max(anorm, eps)) {
        // Invariant subspace: continue from a fresh orthogonal direction
        // with zero coupling.
        v.col(j + 1) = FreshDirection(v, j + 1, locked, rng);
        beta = 0.0;
      } else {
        v.col(j + 1) = w / beta;
      }
    }

    if (built < m) {
      // Budget ran out mid-cycle: report the Ritz pairs of the partial
      // block, unconverged.
      DenseEigen e = SymmetricEigenAscending(t.topLeftCorner(built, built));
      SortByMagnitude(e.values, e.vectors);
      const Eigen::Index take = std::min(k, built);
      out.values = e.values.head(take);
      out.vectors = v.leftCols(built) * e.vectors.leftCols(take);
      out.estimates = Vector::Constant(take, std::numeric_limits<double>::infinity());
      out.converged = false;
      return out;
    }

    const DenseEigen ritz = [&] {
      DenseEigen e = SymmetricEigenAscending(t);
      SortByMagnitude(e.values, e.vectors);
      return e;
    }();
    const Eigen::Index take = std::min(k, m);
    Vector estimates(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      estimates(i) = std::abs(beta * ritz.vectors(m - 1, i));
    }
    const double floor = std::sqrt(eps) * std::max(std::abs(ritz.values(0)), eps);
    bool converged = true;
    for (Eigen::Index i = 0; i < take; ++i) {
      if (estimates(i) > tol * std::max(std::abs(ritz.values(i)), floor)) converged = false;
    }
    if (m == dim) converged = true;  // the whole complement was spanned

    if (converged || budget == 0) {
      out.values = ritz.values.head(take);
      out.vectors = v.leftCols(m) * ritz.vectors.leftCols(take);
      out.estimates = estimates.head(take);
      out.converged = converged;
      return out;
    }

    // Thick restart: keep the leading Ritz vectors and continue the
    // recurrence from the normalized residual.
    kept = std::min<Eigen::Index>(m - 1, k + std::max<Eigen::Index>(1, (m - k) / 2));
    const Matrix rotated = v.leftCols(m) * ritz.vectors.leftCols(kept);
    v.leftCols(kept) = rotated;
    t.setZero();
    for (Eigen::Index i = 0; i < kept; ++i) t(i, i) = ritz.values(i);
    if (beta > 1e-10 * std::max(anorm, eps)) {
      Vector r = residual;
      Reorthogonalize(v, kept, locked, r);
      const double rn = r.norm();
      v.col(kept) = rn > 0 ? Vector(r / rn) : FreshDirection(v, kept, locked, rng);
    } else {
      v.col(kept) = FreshDirection(v, kept, locked, rng);
    }
  }
}

}  // namespace

SpectralBasis TopKEigenpairs(const CsrMatrix& s, const LanczosOptions& options) {
  const std::size_t n = s.rows;
  if (s.rows != s.cols) throw InvalidArgument("eigensolver needs a square operator");
  if (options.k < 1 || options.k > n) {
    throw InvalidArgument("K = " + std::to_string(options.k) + " must lie in [1, n = " +
                          std::to_string(n) + "]");
  }
  if (!(options.tol > 0.0)) throw InvalidArgument("tol must be positive");

  std::mt19937_64 rng(options.seed);
  std::size_t budget = options.max_iter;
  const auto k = static_cast<Eigen::Index>(options.k);

  RitzPairs main = RestartedLanczos(s, options.k, Matrix(static_cast<Eigen::Index>(n), 0),
                                    options.tol, budget, options.subspace, rng);
  Vector values = main.values;
  Matrix vectors = main.vectors;
  bool converged = main.converged;

  // A single Krylov sequence sees one vector per eigenspace, so repeated
  // eigenvalues can hide behind the ones found. Probe the complement of the
  // current set; anything larger in magnitude than the K-th value swaps in.
  while (converged && static_cast<std::size_t>(vectors.cols()) < n) {
    RitzPairs probe = RestartedLanczos(s, 1, vectors, options.tol, budget, 0, rng);
    if (!probe.converged) {
      converged = false;
      break;
    }
    const double mu = probe.values(0);
    const double smallest = std::abs(values(k - 1));
    if (std::abs(mu) <= smallest * (1.0 + 1e-12) + options.tol * 1e-3) break;
    Vector v2(k + 1);
    v2 << values, mu;
    Matrix p2(vectors.rows(), k + 1);
    p2 << vectors, probe.vectors.col(0);
    SortByMagnitude(v2, p2);
    values = v2.head(k);
    vectors = p2.leftCols(k);
  }

  SpectralBasis basis;
  basis.eigenvalues = values;
  basis.eigenvectors = vectors;
  SortByMagnitude(basis.eigenvalues, basis.eigenvectors);
  CanonicalizeSigns(basis.eigenvectors);
  basis.residuals.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Vector p = basis.eigenvectors.col(i);
    basis.residuals(i) = (s.multiply(p) - basis.eigenvalues(i) * p).norm();
  }
  if (!converged) {
    throw NoConvergence("Lanczos did not converge within " + std::to_string(options.max_iter) +
                            " operator applications",
                        std::vector<double>(basis.residuals.data(),
                                            basis.residuals.data() + basis.residuals.size()));
  }
  return basis;
}

SpectralBasis TopKEigenpairs(const NormalizedOperator& s, const LanczosOptions& options) {
  SpectralBasis b = TopKEigenpairs(s.matrix, options);
  b.mode = s.mode;
  return b;
}

}  // namespace fairspectral
