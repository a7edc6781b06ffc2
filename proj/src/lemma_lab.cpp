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

#include "fairspectral/lemma_lab.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fairspectral/eigensolver.hpp"
#include "json.hpp"

namespace fairspectral {
namespace {

Vector GaussianVector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gauss(rng);
  return v;
}

Matrix RandomOrthogonal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) g(r, c) = gauss(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  // Fix the column signs so the draw is Haar distributed.
  const Matrix rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < n; ++c) {
    if (rmat(c, c) < 0) q.col(c) *= -1.0;
  }
  return q;
}

double LeastSquaresSlope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// Dominance ratio |lambda_1| / |lambda_{j+1}| from oracle values.
double DominanceRatio(const Vector& values, std::size_t j) {
  if (static_cast<Eigen::Index>(j) >= values.size()) return INFINITY;
  const double next = std::abs(values(static_cast<Eigen::Index>(j)));
  return next == 0.0 ? INFINITY : std::abs(values(0)) / next;
}

}  // namespace

std::vector<std::optional<double>> ConvolutionSimilaritySeries(const CsrMatrix& s,
                                                               const Vector& h,
                                                               std::size_t l_max) {
  if (static_cast<std::size_t>(h.size()) != s.cols) {
    throw InvalidArgument("convolution_similarity: length of h does not match S");
  }
  const double hn = h.norm();
  if (hn == 0.0) throw InvalidArgument("convolution_similarity: h must be non-zero");
  std::vector<std::optional<double>> out;
  out.reserve(l_max + 1);
  out.emplace_back(1.0);
  Vector x = h / hn;
  for (std::size_t l = 1; l <= l_max; ++l) {
    x = s.multiply(x);
    const double xn = x.norm();
    if (xn == 0.0 || !std::isfinite(xn)) {
      out.resize(l_max + 1);  // S^l h = 0 stays zero for larger l
      return out;
    }
    x /= xn;
    out.emplace_back(x.dot(h) / hn);
  }
  return out;
}

std::optional<double> ConvolutionSimilarity(const CsrMatrix& s, const Vector& h, std::size_t l) {
  return ConvolutionSimilaritySeries(s, h, l).back();
}

Vector ProjectionWeights(const Matrix& vectors, const Vector& h) {
  if (vectors.rows() != h.size()) throw InvalidArgument("projection_weights: length mismatch");
  return vectors.transpose() * h;
}

Matrix SymmetricFromSpectrum(const Vector& eigenvalues, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Matrix p = RandomOrthogonal(eigenvalues.size(), rng);
  Matrix s = p * eigenvalues.asDiagonal() * p.transpose();
  return 0.5 * (s + s.transpose());
}

LemmaReport CheckLemma1(const Matrix& s, const Vector& h, std::size_t l_max,
                        const Lemma1Options& options) {
  const DenseEigen oracle = FullDenseEigendecomposition(s, static_cast<std::size_t>(s.rows()));
  const Vector alpha = ProjectionWeights(oracle.vectors, h);

  LemmaReport r;
  r.lemma_id = 1;
  r.n = static_cast<std::size_t>(s.rows());
  r.spectral_gap = DominanceRatio(oracle.values, 1);
  r.tolerance = options.tolerance;
  r.predicted = std::abs(alpha(0)) / alpha.norm();
  r.extras["alpha_1"] = alpha(0);
  r.extras["lambda_1"] = oracle.values(0);
  r.extras["parseval_rel_error"] = std::abs(alpha.squaredNorm() - h.squaredNorm()) / h.squaredNorm();

  const auto series = ConvolutionSimilaritySeries(CsrMatrix::from_dense(s), h, l_max);
  for (std::size_t l = 0; l <= l_max; ++l) {
    if (options.even_only && l % 2 == 1) continue;
    if (!series[l]) {
      r.note = "S^l h vanished at l = " + std::to_string(l);
      return r;
    }
    r.measured.emplace_back(l, *series[l]);
  }
  r.measured_final = r.measured.back().second;
  r.gap = std::abs(r.measured_final - r.predicted);
  r.passed = r.gap <= options.tolerance && r.spectral_gap > 1.0;
  if (oracle.values(0) < 0 && !options.even_only) {
    r.note = "lambda_1 < 0: the sequence alternates; check the even subsequence";
    r.passed = false;
  }
  return r;
}

Lemma1Instance MakeLemma1Instance(std::size_t n, double gap, std::uint64_t seed,
                                  bool negative_top) {
  if (n < 2) throw InvalidArgument("lemma 1 instance needs n >= 2");
  if (!(gap > 1.0)) throw InvalidArgument("lemma 1 instance needs gap > 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto nn = static_cast<Eigen::Index>(n);
  // Trailing spectrum shape u in [-1, 1] with |u_2| = 1 exactly.
  Vector lambda(nn);
  lambda(0) = negative_top ? -1.0 : 1.0;
  lambda(1) = unif(rng) < 0 ? -1.0 : 1.0;
  for (Eigen::Index i = 2; i < nn; ++i) lambda(i) = unif(rng);
  lambda.tail(nn - 1) /= gap;

  Lemma1Instance inst;
  inst.s = SymmetricFromSpectrum(lambda, rng());
  inst.h = GaussianVector(nn, rng);
  return inst;
}

LemmaReport VerifyLemma1(std::size_t n, double gap_min, std::size_t l_max,
                         std::uint64_t seed, const Lemma1Options& options) {
  // alpha_1 close to zero makes the limit ill-conditioned; redraw.
  for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
    // Aim a hair above gap_min so rounding in the oracle cannot dip below it.
    const Lemma1Instance inst = MakeLemma1Instance(n, gap_min * (1.0 + 1e-9), seed + 7919 * attempt);
    const DenseEigen oracle = FullDenseEigendecomposition(inst.s, n);
    if (DominanceRatio(oracle.values, 1) < gap_min || oracle.values(0) <= 0) {
      continue;
    }
    const double a1 = std::abs(oracle.vectors.col(0).dot(inst.h));
    if (a1 < 1e-3 * inst.h.norm()) continue;
    LemmaReport r = CheckLemma1(inst.s, inst.h, l_max, options);
    r.seed = seed;
    return r;
  }
  throw NumericalError("lemma 1: could not draw an instance with the requested gap");
}

LemmaReport CheckLemma2(const Matrix& s, const Vector& h, std::size_t j, std::size_t l_max,
                        double tolerance) {
  if (j < 1 || j > static_cast<std::size_t>(s.rows())) {
    throw InvalidArgument("lemma 2: degeneracy j must lie in [1, n]");
  }
  const DenseEigen oracle = FullDenseEigendecomposition(s, static_cast<std::size_t>(s.rows()));
  const Vector alpha = ProjectionWeights(oracle.vectors, h);
  const auto jj = static_cast<Eigen::Index>(j);
  const double norm = alpha.norm();

  LemmaReport r;
  r.lemma_id = 2;
  r.n = static_cast<std::size_t>(s.rows());
  r.spectral_gap = DominanceRatio(oracle.values, j);
  r.tolerance = tolerance;
  const double limit = alpha.head(jj).norm() / norm;
  const double bound = alpha.head(jj).sum() / norm / std::sqrt(static_cast<double>(j));
  r.predicted = limit;
  r.extras["bound_rhs"] = bound;
  r.extras["margin"] = limit - bound;
  r.extras["j"] = static_cast<double>(j);
  r.extras["cluster_spread"] = std::abs(oracle.values(0) - oracle.values(jj - 1));

  const auto series = ConvolutionSimilaritySeries(CsrMatrix::from_dense(s), h, l_max);
  for (std::size_t l = 0; l <= l_max; ++l) {
    if (!series[l]) {
      r.note = "S^l h vanished at l = " + std::to_string(l);
      return r;
    }
    r.measured.emplace_back(l, *series[l]);
  }
  r.measured_final = r.measured.back().second;
  r.gap = std::abs(r.measured_final - limit);
  r.passed = r.gap <= tolerance && limit - bound >= -1e-12;
  return r;
}

LemmaReport VerifyLemma2(std::size_t n, std::size_t j, std::size_t l_max, std::uint64_t seed,
                         bool equal_alpha) {
  if (j < 1 || j >= n) throw InvalidArgument("lemma 2: need 1 <= j < n");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto nn = static_cast<Eigen::Index>(n);
  const auto jj = static_cast<Eigen::Index>(j);
  constexpr double kGap = 1.5;
  Vector lambda(nn);
  for (Eigen::Index i = 0; i < jj; ++i) lambda(i) = 1.0;
  for (Eigen::Index i = jj; i < nn; ++i) lambda(i) = unif(rng) / kGap;
  const Matrix s = SymmetricFromSpectrum(lambda, rng());

  Vector h = GaussianVector(nn, rng);
  if (equal_alpha) {
    // Equal weight on every oracle cluster vector plus noise orthogonal to
    // the cluster.
    const DenseEigen oracle = FullDenseEigendecomposition(s, n);
    const Matrix cluster = oracle.vectors.leftCols(jj);
    const Vector noise = h - cluster * (cluster.transpose() * h);
    h = 2.0 * cluster.rowwise().sum() + noise;
  }
  LemmaReport r = CheckLemma2(s, h, j, l_max);
  r.seed = seed;
  if (equal_alpha) {
    r.extras["equal_alpha"] = 1.0;
    r.passed = r.passed && std::abs(r.extras["margin"]) <= 1e-8;
  }
  return r;
}

LemmaReport CheckLemma3(const Matrix& s, const Vector& h, std::size_t index,
                        const std::vector<std::size_t>& l_values, double tolerance) {
  const auto n = static_cast<std::size_t>(s.rows());
  if (index < 2 || index > n) throw InvalidArgument("lemma 3: index must lie in [2, n]");
  if (l_values.size() < 2) throw InvalidArgument("lemma 3: need at least two l values");
  if (!std::is_sorted(l_values.begin(), l_values.end()) ||
      std::adjacent_find(l_values.begin(), l_values.end()) != l_values.end()) {
    throw InvalidArgument("lemma 3: l values must be strictly increasing");
  }
  const DenseEigen oracle = FullDenseEigendecomposition(s, n);
  const Vector alpha = ProjectionWeights(oracle.vectors, h);
  const auto i = static_cast<Eigen::Index>(index - 1);
  const double lambda_1 = oracle.values(0);
  const double ratio = oracle.values(i) / lambda_1;
  if (std::abs(alpha(i)) < 1e-12 * h.norm()) {
    throw NumericalError("lemma 3: alpha_i vanishes; redraw h");
  }

  LemmaReport r;
  r.lemma_id = 3;
  r.n = n;
  r.spectral_gap = DominanceRatio(oracle.values, 1);
  r.tolerance = tolerance;
  r.predicted = std::log(std::abs(ratio));
  r.extras["index"] = static_cast<double>(index);
  r.extras["lambda_ratio"] = ratio;

  // Walk (S / lambda_1)^l h and read off the component along p_i.
  const CsrMatrix sparse = CsrMatrix::from_dense(s);
  const Vector p_i = oracle.vectors.col(i);
  Vector x = h;
  std::size_t at = 0;
  std::vector<double> ls;
  std::vector<double> logs;
  for (std::size_t l : l_values) {
    while (at < l) {
      x = sparse.multiply(x) / lambda_1;
      ++at;
    }
    const double m = alpha(i) * p_i.dot(x);
    if (m == 0.0 || !std::isfinite(m)) {
      throw NumericalError("lemma 3: contribution underflowed at l = " + std::to_string(l));
    }
    r.measured.emplace_back(l, m);
    ls.push_back(static_cast<double>(l));
    logs.push_back(std::log(std::abs(m)));

    const double own = alpha(i) * alpha(i) * std::pow(ratio, static_cast<double>(l));
    r.predicted_series.emplace_back(l, own);
    // Oracle share c_i(l) of the numerator of cos<S^l h, h>.
    double total = 0.0;
    for (Eigen::Index k = 0; k < alpha.size(); ++k) {
      total += alpha(k) * alpha(k) * std::pow(oracle.values(k) / lambda_1, static_cast<double>(l));
    }
    r.extras[ls.size() == 1 ? "contribution_first" : "contribution_last"] = own / total;
  }
  const double slope = LeastSquaresSlope(ls, logs);
  r.extras["fitted_slope"] = slope;
  r.measured_final = slope;
  r.gap = std::abs(slope - r.predicted);
  r.passed = r.gap <= tolerance;
  return r;
}

LemmaReport VerifyLemma3(std::size_t n, const std::vector<std::size_t>& l_values,
                         std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto nn = static_cast<Eigen::Index>(n);
  constexpr double kGap = 1.5;
  Vector lambda(nn);
  lambda(0) = 1.0;
  lambda(1) = (unif(rng) < 0 ? -1.0 : 1.0) / kGap;
  for (Eigen::Index k = 2; k < nn; ++k) lambda(k) = unif(rng) / kGap;
  const Matrix s = SymmetricFromSpectrum(lambda, rng());
  for (int attempt = 0; attempt < 16; ++attempt) {
    const Vector h = GaussianVector(nn, rng);
    const DenseEigen oracle = FullDenseEigendecomposition(s, n);
    const double a = std::abs(oracle.vectors.col(static_cast<Eigen::Index>(index - 1)).dot(h));
    if (a < 1e-2 * h.norm() / std::sqrt(static_cast<double>(n))) continue;
    LemmaReport r = CheckLemma3(s, h, index, l_values);
    r.seed = seed;
    return r;
  }
  throw NumericalError("lemma 3: could not draw h with a usable alpha_i");
}

std::string LemmaReportToJson(const LemmaReport& r) {
  nlohmann::ordered_json j;
  j["lemma_id"] = r.lemma_id;
  j["n"] = r.n;
  j["seed"] = r.seed;
  j["spectral_gap"] = r.spectral_gap;
  j["tolerance"] = r.tolerance;
  j["predicted"] = r.predicted;
  j["measured_final"] = r.measured_final;
  j["gap"] = r.gap;
  j["verdict"] = r.passed ? "pass" : "fail";
  auto pairs = [](const std::vector<std::pair<std::size_t, double>>& v) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& [l, x] : v) a.push_back({l, x});
    return a;
  };
  j["measured"] = pairs(r.measured);
  j["predicted_series"] = pairs(r.predicted_series);
  j["extras"] = r.extras;
  j["note"] = r.note;
  return j.dump();
}

LemmaReport LemmaReportFromJson(const std::string& text) {
  LemmaReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.lemma_id = j.at("lemma_id").get<int>();
    r.n = j.at("n").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.spectral_gap = j.at("spectral_gap").is_null() ? INFINITY : j.at("spectral_gap").get<double>();
    r.tolerance = j.at("tolerance").get<double>();
    r.predicted = j.at("predicted").get<double>();
    r.measured_final = j.at("measured_final").get<double>();
    r.gap = j.at("gap").get<double>();
    r.passed = j.at("verdict").get<std::string>() == "pass";
    for (const auto& p : j.at("measured")) r.measured.emplace_back(p[0].get<std::size_t>(), p[1].get<double>());
    for (const auto& p : j.at("predicted_series")) {
      r.predicted_series.emplace_back(p[0].get<std::size_t>(), p[1].get<double>());
    }
    r.extras = j.at("extras").get<std::map<std::string, double>>();
    r.note = j.at("note").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("lemma report JSON: ") + e.what());
  }
  return r;
}

}  // namespace fairspectral
