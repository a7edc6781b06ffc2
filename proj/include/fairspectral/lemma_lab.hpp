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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairspectral/common.hpp"
#include "fairspectral/sparse.hpp"

namespace fairspectral {

// cos<S^l h, h>, computed with l sparse products and the iterate
// renormalized after each one. Empty when S^l h vanishes.
std::optional<double> ConvolutionSimilarity(const CsrMatrix& s, const Vector& h, std::size_t l);

// The same quantity for every l in [0, l_max], from a single sweep.
std::vector<std::optional<double>> ConvolutionSimilaritySeries(const CsrMatrix& s,
                                                               const Vector& h,
                                                               std::size_t l_max);

// alpha_i = h^T p_i for each column p_i of `vectors`.
Vector ProjectionWeights(const Matrix& vectors, const Vector& h);

struct LemmaReport {
  int lemma_id = 0;
  // (l, measured value) with l strictly increasing.
  std::vector<std::pair<std::size_t, double>> measured;
  // Oracle-side counterpart of `measured`, when it varies with l.
  std::vector<std::pair<std::size_t, double>> predicted_series;
  double predicted = 0.0;
  double measured_final = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool passed = false;

  std::size_t n = 0;
  double spectral_gap = 0.0;  // |lambda_1| / |lambda_{j+1}|
  std::uint64_t seed = 0;
  std::map<std::string, double> extras;
  std::string note;
};

std::string LemmaReportToJson(const LemmaReport& report);
LemmaReport LemmaReportFromJson(const std::string& json);

// S = P diag(lambda) P^T with a seeded random orthogonal P.
Matrix SymmetricFromSpectrum(const Vector& eigenvalues, std::uint64_t seed);

struct Lemma1Options {
  double tolerance = 1e-6;
  // Verify the even-l subsequence; needed when lambda_1 < 0.
  bool even_only = false;
};

// Single dominant eigenvalue: cos<S^l h, h> -> |alpha_1| / ||alpha||.
LemmaReport CheckLemma1(const Matrix& s, const Vector& h, std::size_t l_max,
                        const Lemma1Options& options = {});

// Random instance whose dominant eigenvalue is positive and exceeds every
// other in magnitude by exactly `gap`. The seed fixes the eigenvectors, h and
// the shape of the trailing spectrum, so varying only `gap` rescales it.
struct Lemma1Instance {
  Matrix s;
  Vector h;
};
Lemma1Instance MakeLemma1Instance(std::size_t n, double gap, std::uint64_t seed,
                                  bool negative_top = false);

LemmaReport VerifyLemma1(std::size_t n, double gap_min, std::size_t l_max,
                         std::uint64_t seed, const Lemma1Options& options = {});

// j-fold dominant eigenvalue: the limit sqrt(sum_{i<=j} alpha_i^2)/||alpha||
// bounds (1/sqrt j) sum_{i<=j} cos<h, p_i> from above.
LemmaReport CheckLemma2(const Matrix& s, const Vector& h, std::size_t j, std::size_t l_max,
                        double tolerance = 1e-6);

// With `equal_alpha`, h is built from the oracle's cluster basis so that
// every alpha_i (i <= j) is the same, which makes the bound tight.
LemmaReport VerifyLemma2(std::size_t n, std::size_t j, std::size_t l_max, std::uint64_t seed,
                         bool equal_alpha = false);

// Decay of the contribution of a non-principal eigenvector: the measured
// alpha_i * p_i^T (S/lambda_1)^l h is fitted on log scale against l and the
// slope compared with log|lambda_i / lambda_1|. `index` is 1-based.
LemmaReport CheckLemma3(const Matrix& s, const Vector& h, std::size_t index,
                        const std::vector<std::size_t>& l_values, double tolerance = 1e-3);

LemmaReport VerifyLemma3(std::size_t n, const std::vector<std::size_t>& l_values,
                         std::uint64_t seed, std::size_t index = 2);

}  // namespace fairspectral
