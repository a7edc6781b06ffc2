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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/SVD>

#include "fairspectral/eigensolver.hpp"
#include "fairspectral/lemma_lab.hpp"
#include "fairspectral/metrics.hpp"
#include "fairspectral/model.hpp"
#include "fairspectral/pipeline.hpp"
#include "fairspectral/trainer.hpp"
#include "test_util.hpp"

using namespace fairspectral;

namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void Run(int id, const char* title, const std::function<Outcome()>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = body();
  } catch (const std::exception& e) {
    o.passed = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.passed) ++failures;
  std::printf("criterion %2d %s  %s (%s) [%.1f s]\n", id, o.passed ? "PASS" : "FAIL", title,
              o.detail.c_str(), Since(t0));
  std::fflush(stdout);
}

std::string Fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome EigensolverOracle() {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::size_t> size(50, 300);
  std::uniform_int_distribution<std::size_t> kdist(1, 10);
  double worst_rel = 0.0;
  double worst_angle = 0.0;
  double worst_orth = 0.0;
  const auto t0 = Clock::now();
  for (std::uint64_t i = 0; i < 20; ++i) {
    const std::size_t n = size(rng);
    const std::size_t k = kdist(rng);
    const CsrMatrix s = testing::RandomSparseSymmetric(n, 6.0, 100 + i);
    LanczosOptions opt;
    opt.k = k;
    opt.seed = i;
    const SpectralBasis b = TopKEigenpairs(s, opt);
    const DenseEigen ref = FullDenseEigendecomposition(s.to_dense());
    const auto kk = static_cast<Eigen::Index>(k);
    for (Eigen::Index j = 0; j < kk; ++j) {
      worst_rel = std::max(worst_rel, std::abs(b.eigenvalues(j) - ref.values(j)) / std::abs(ref.values(j)));
    }
    worst_angle = std::max(worst_angle, SubspaceAngle(b.eigenvectors, ref.vectors.leftCols(kk)));
    worst_orth = std::max(worst_orth, OrthonormalityError(b.eigenvectors));
  }
  const double secs = Since(t0);
  Outcome o;
  o.passed = worst_rel <= 1e-8 && worst_angle <= 1e-6 && worst_orth <= 1e-8 && secs < 10.0;
  o.detail = "max rel " + Fmt("%.2e", worst_rel) + ", max angle " + Fmt("%.2e", worst_angle) +
             ", orthonormality " + Fmt("%.2e", worst_orth) + ", " + Fmt("%.2f s", secs);
  return o;
}

Outcome Lemma1() {
  double worst = 0.0;
  bool all = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LemmaReport r = VerifyLemma1(100, 1.5, 200, seed);
    all = all && r.passed && r.spectral_gap >= 1.5 && r.extras.at("lambda_1") > 0.0;
    worst = std::max(worst, r.gap);
  }
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 1.0;
  Vector h = Vector::Ones(2) / std::sqrt(2.0);
  const auto series = ConvolutionSimilaritySeries(CsrMatrix::from_dense(d), h, 40);
  double closed = 0.0;
  for (std::size_t l = 0; l <= 40; ++l) {
    const double p = std::pow(2.0, static_cast<double>(l));
    closed = std::max(closed, std::abs(*series[l] - (p + 1.0) / std::sqrt(2.0 * (p * p + 1.0))));
  }
  Outcome o;
  o.passed = all && worst <= 1e-6 && closed <= 1e-9;
  o.detail = "worst gap over 10 instances " + Fmt("%.2e", worst) + ", diag(2,1) closed form " +
             Fmt("%.2e", closed);
  return o;
}

Outcome Lemma2() {
  double min_margin = INFINITY;
  double tight = 0.0;
  bool all = true;
  for (std::size_t j : {2u, 3u}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const LemmaReport r = VerifyLemma2(60, j, 200, seed);
      all = all && r.passed;
      min_margin = std::min(min_margin, r.extras.at("margin"));
      const LemmaReport e = VerifyLemma2(60, j, 200, seed, true);
      all = all && e.passed;
      tight = std::max(tight, std::abs(e.extras.at("margin")));
    }
  }
  Outcome o;
  o.passed = all && min_margin >= 0.0 && tight <= 1e-8;
  o.detail = "smallest margin " + Fmt("%.3e", min_margin) + ", equal-alpha |margin| " + Fmt("%.2e", tight);
  return o;
}

Outcome Lemma3() {
  std::vector<std::size_t> ls;
  for (std::size_t l = 0; l <= 30; ++l) ls.push_back(l);
  double worst = 0.0;
  bool all = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LemmaReport r = VerifyLemma3(80, ls, seed);
    all = all && r.passed;
    worst = std::max(worst, r.gap);
  }
  Outcome o;
  o.passed = all && worst <= 1e-3;
  o.detail = "worst slope error " + Fmt("%.2e", worst);
  return o;
}

Outcome Gradients() {
  const auto t0 = Clock::now();
  SbmConfig sc;
  sc.n = 30;
  sc.p_in = 0.2;
  sc.p_out = 0.02;
  sc.d = 4;
  Graph g = GenerateSbm(sc);
  g.masks = MakeSplits(g, 0);
  const NormalizedOperator op = Normalize(g, OperatorMode::kSymNormalized);
  const SpectralBasis b = DenseTopK(op, 3);
  ModelConfig mc;
  mc.input_dim = g.feature_dim();
  mc.layers = 2;
  mc.d_e = 8;
  const ModelParams p = InitParams(mc);
  const ForwardInputs in{&g.features, &b, &op.matrix};
  double worst = 0.0;
  std::string where;
  for (const auto& e : CheckGradients(in, p, g.labels, g.masks.train)) {
    if (e.max_rel_error >= worst) {
      worst = e.max_rel_error;
      where = e.tensor;
    }
  }
  const double secs = Since(t0);
  Outcome o;
  o.passed = worst <= 1e-4 && secs < 30.0;
  o.detail = "max relative error " + Fmt("%.2e", worst) + " in " + where + ", " + Fmt("%.2f s", secs);
  return o;
}

Outcome MetricsOracle() {
  const std::vector<int> s = {0, 0, 0, 1, 1, 1};
  const std::vector<int> y = {1, 1, 0, 1, 0, 1};
  const Mask all(6, true);
  int mismatches = 0;
  for (int pattern = 0; pattern < 64; ++pattern) {
    std::vector<int> pred(6);
    for (int i = 0; i < 6; ++i) pred[i] = (pattern >> i) & 1;
    // Direct enumeration of the four conditional counts.
    int acc[2] = {0, 0};
    int size[2] = {0, 0};
    int tp[2] = {0, 0};
    int pos[2] = {0, 0};
    for (int i = 0; i < 6; ++i) {
      ++size[s[i]];
      acc[s[i]] += pred[i];
      if (y[i] == 1) {
        ++pos[s[i]];
        tp[s[i]] += pred[i];
      }
    }
    const double sp = std::abs(static_cast<double>(acc[0]) / size[0] - static_cast<double>(acc[1]) / size[1]);
    const double eo = std::abs(static_cast<double>(tp[0]) / pos[0] - static_cast<double>(tp[1]) / pos[1]);
    if (*DeltaSp(pred, s, all) != sp || *DeltaEo(pred, y, s, all) != eo) ++mismatches;
  }
  Outcome o;
  o.passed = mismatches == 0;
  o.detail = std::to_string(64 - mismatches) + " of 64 patterns match exactly";
  return o;
}

Outcome TransformIdentities() {
  double identity = 0.0;
  double rank_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::Index n = 40;
    const DenseEigen e = FullDenseEigendecomposition(testing::RandomSymmetric(n, seed));
    Matrix h(n, 5);
    for (Eigen::Index c = 0; c < 5; ++c) h.col(c) = testing::RandomVector(n, 50 + seed * 5 + c);
    identity = std::max(identity, (SpectralTransform(e.vectors, Vector::Ones(n), h) - h).cwiseAbs().maxCoeff());
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(seed % 4);
    const Matrix out = SpectralTransform(e.vectors.leftCols(k), testing::RandomVector(k, seed + 7), h);
    const Vector sv = Eigen::JacobiSVD<Matrix>(out).singularValues();
    for (Eigen::Index i = k; i < sv.size(); ++i) rank_ratio = std::max(rank_ratio, sv(i) / sv(0));
  }
  Outcome o;
  o.passed = identity <= 1e-9 && rank_ratio <= 1e-8;
  o.detail = "unit filter " + Fmt("%.2e", identity) + ", trailing singular ratio " + Fmt("%.2e", rank_ratio);
  return o;
}

// Shared state for the trade-off, K-sweep and runtime criteria.
struct Desk {
  Graph g;
  NormalizedOperator op;
  SpectralBasis full;  // dense, all n pairs
  double dense_seconds = 0.0;
};

ExperimentConfig DefaultExperiment(ModelKind kind) {
  ExperimentConfig cfg;
  cfg.model.kind = kind;
  return cfg;
}

MultiSeedReport Seeds(const Desk& d, const SpectralBasis* basis, ModelKind kind) {
  std::vector<RunResult> runs;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    runs.push_back(RunSeed(d.g, d.op, basis, DefaultExperiment(kind), seed));
  }
  return Summarize(std::move(runs));
}

SpectralBasis Leading(const SpectralBasis& full, std::size_t k) {
  SpectralBasis b;
  b.mode = full.mode;
  const auto kk = static_cast<Eigen::Index>(k);
  b.eigenvalues = full.eigenvalues.head(kk);
  b.eigenvectors = full.eigenvectors.leftCols(kk);
  b.residuals = full.residuals.head(kk);
  return b;
}

Outcome TradeOff(const Desk& d, MultiSeedReport* fugnn_out) {
  const auto t0 = Clock::now();
  BasisOptions bo;
  bo.k = 8;
  bo.method = EigenMethod::kLanczos;
  const SpectralBasis basis = ComputeBasis(d.op, bo);
  const MultiSeedReport f = Seeds(d, &basis, ModelKind::kFugnn);
  const MultiSeedReport b = Seeds(d, nullptr, ModelKind::kBaseline);
  const double secs = Since(t0);
  *fugnn_out = f;
  const double ratio = f.delta_sp.mean / b.delta_sp.mean;
  Outcome o;
  o.passed = f.delta_sp.runs == 5 && b.delta_sp.runs == 5 && ratio <= 0.5 &&
             f.accuracy.mean >= b.accuracy.mean - 0.02 && secs < 300.0;
  o.detail = "FUGNN acc " + Fmt("%.4f", f.accuracy.mean) + " dSP " + Fmt("%.4f", f.delta_sp.mean) +
             "; baseline acc " + Fmt("%.4f", b.accuracy.mean) + " dSP " + Fmt("%.4f", b.delta_sp.mean) +
             "; dSP ratio " + Fmt("%.3f", ratio) + " (needs <= 0.5), " + Fmt("%.0f s", secs);
  return o;
}

Outcome KSweep(const Desk& d) {
  double small = 0.0;
  std::ostringstream per_k;
  for (std::size_t k = 1; k <= 10; ++k) {
    const SpectralBasis b = Leading(d.full, k);
    const double v = Seeds(d, &b, ModelKind::kFugnn).delta_sp.mean;
    per_k << k << ":" << Fmt("%.3f", v) << " ";
    small += v / 10.0;
  }
  double large = 0.0;
  for (std::size_t k : {std::size_t{100}, d.g.n}) {
    const SpectralBasis b = Leading(d.full, k);
    const double v = Seeds(d, &b, ModelKind::kFugnn).delta_sp.mean;
    per_k << k << ":" << Fmt("%.3f", v) << " ";
    large += v / 2.0;
  }
  Outcome o;
  o.passed = small < large;
  o.detail = "mean dSP K<=10 " + Fmt("%.4f", small) + " vs K in {100,n} " + Fmt("%.4f", large) +
             "; per K " + per_k.str();
  return o;
}

Outcome Runtime(const Desk& d) {
  SbmConfig big;
  big.n = 20000;
  big.p_in = 2.0 * 11.0 / (1.1 * 20000.0);
  big.p_out = big.p_in / 10.0;
  const NormalizedOperator op20k = Normalize(GenerateSbm(big), OperatorMode::kSymNormalized);
  LanczosOptions lo;
  lo.k = 8;
  auto t0 = Clock::now();
  (void)TopKEigenpairs(op20k, lo);
  const double fes20k = Since(t0);
  t0 = Clock::now();
  (void)TopKEigenpairs(d.op, lo);
  const double fes2k = Since(t0);
  Outcome o;
  o.passed = fes20k < 30.0 && d.full.k() == d.g.n && fes2k < d.dense_seconds;
  o.detail = "FES n=20000 " + Fmt("%.2f s", fes20k) + ", FES n=2000 " + Fmt("%.3f s", fes2k) +
             ", WE n=2000 " + Fmt("%.2f s", d.dense_seconds);
  return o;
}

Outcome Determinism(const Desk& d, const MultiSeedReport& earlier) {
  BasisOptions bo;
  bo.k = 8;
  bo.method = EigenMethod::kLanczos;
  const SpectralBasis a = ComputeBasis(d.op, bo);
  const SpectralBasis b = ComputeBasis(d.op, bo);
  const bool basis_same = a.eigenvalues == b.eigenvalues && a.eigenvectors == b.eigenvectors &&
                          a.residuals == b.residuals;
  const RunResult r = RunSeed(d.g, d.op, &a, DefaultExperiment(ModelKind::kFugnn), 0);
  const RunResult& first = earlier.runs.front();
  const bool history_same = HistoryToJsonLines(r.history) == HistoryToJsonLines(first.history) &&
                            r.history.snapshot_id == first.history.snapshot_id;
  const bool report_same = FairnessReportToJson(r.test) == FairnessReportToJson(first.test);
  Outcome o;
  o.passed = basis_same && history_same && report_same;
  o.detail = std::string("basis ") + (basis_same ? "identical" : "differs") + ", history " +
             (history_same ? "identical" : "differs") + ", report " + (report_same ? "identical" : "differs");
  return o;
}

}  // namespace

int main() {
  Run(1, "eigensolver oracle equivalence", EigensolverOracle);
  Run(2, "lemma 1 limit", Lemma1);
  Run(3, "lemma 2 bound", Lemma2);
  Run(4, "lemma 3 decay", Lemma3);
  Run(5, "gradient correctness", Gradients);
  Run(6, "metric oracle equivalence", MetricsOracle);
  Run(7, "spectral transform identities", TransformIdentities);

  Desk d;
  d.g = GenerateSbm(SbmConfig{});
  d.op = Normalize(d.g, OperatorMode::kSymNormalized);
  const auto t0 = Clock::now();
  d.full = DenseTopK(d.op, d.g.n);
  d.dense_seconds = Since(t0);

  MultiSeedReport fugnn;
  Run(8, "fairness/utility trade-off", [&] { return TradeOff(d, &fugnn); });
  Run(9, "K-sweep shape", [&] { return KSweep(d); });
  Run(10, "runtime ordering", [&] { return Runtime(d); });
  Run(11, "determinism", [&] {
    if (fugnn.runs.empty()) return Outcome{false, "trade-off runs unavailable"};
    return Determinism(d, fugnn);
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
