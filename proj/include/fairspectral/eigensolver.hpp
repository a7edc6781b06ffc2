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
#include <filesystem>
#include <string>

#include "fairspectral/common.hpp"
#include "fairspectral/graph.hpp"
#include "fairspectral/sparse.hpp"

namespace fairspectral {

// K eigenpairs ordered by descending |lambda| (positive first on ties), unit
// columns, each column signed so its largest-magnitude entry is positive.
struct SpectralBasis {
  Vector eigenvalues;
  Matrix eigenvectors;  // n x K
  Vector residuals;     // ||S p_i - lambda_i p_i||
  OperatorMode mode = OperatorMode::kSymNormalized;

  std::size_t n() const { return static_cast<std::size_t>(eigenvectors.rows()); }
  std::size_t k() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

struct DenseEigen {
  Vector values;
  Matrix vectors;
};

inline constexpr std::size_t kDefaultDenseLimit = 2000;

// All eigenpairs of a dense symmetric matrix by Householder reduction to
// tridiagonal form followed by implicit QL. Sorted and signed like
// SpectralBasis.
DenseEigen FullDenseEigendecomposition(const Matrix& s,
                                       std::size_t dense_limit = kDefaultDenseLimit);

// Same reduction without sorting or the size guard; ascending order.
DenseEigen SymmetricEigenAscending(const Matrix& s);

// Reorders eigenpairs by descending magnitude, positive value first on ties.
void SortByMagnitude(Vector& values, Matrix& vectors);

// Flips each column so that its largest |entry| (lowest index on ties) is
// non-negative.
void CanonicalizeSigns(Matrix& vectors);

struct LanczosOptions {
  std::size_t k = 8;
  double tol = 1e-10;
  // Budget of operator applications across all restarts.
  std::size_t max_iter = 20000;
  std::uint64_t seed = 0;
  // Krylov subspace size per restart cycle; 0 picks max(2K + 10, K + 20).
  std::size_t subspace = 0;
};

// Largest-magnitude eigenpairs of a sparse symmetric matrix: thick-restart
// Lanczos with full reorthogonalization, followed by a deflated probe that
// catches eigenvalue copies a single Krylov sequence cannot see.
SpectralBasis TopKEigenpairs(const CsrMatrix& s, const LanczosOptions& options);
SpectralBasis TopKEigenpairs(const NormalizedOperator& s, const LanczosOptions& options);

// The K leading pairs of a full dense decomposition, packaged as a basis.
SpectralBasis DenseTopK(const NormalizedOperator& s, std::size_t k,
                        std::size_t dense_limit = kDefaultDenseLimit);

// max_ij |(P^T P - I)_ij|
double OrthonormalityError(const Matrix& p);

// Largest principal angle (radians) between the column spans of a and b.
double SubspaceAngle(const Matrix& a, const Matrix& b);

// Binary container: "FSB1", u64 n, u64 K, K eigenvalues, then the n x K
// eigenvectors column-major; all little-endian.
void WriteBasisBinary(const SpectralBasis& basis, const std::filesystem::path& path);
SpectralBasis ReadBasisBinary(const std::filesystem::path& path);
std::string BasisToJson(const SpectralBasis& basis, bool include_vectors);

}  // namespace fairspectral
