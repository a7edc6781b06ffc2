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

#include <cmath>
#include <numeric>

#include <Eigen/SVD>

#include "doctest.h"
#include "fairspectral/eigensolver.hpp"
#include "fairspectral/lemma_lab.hpp"
#include "fairspectral/model.hpp"
#include "test_util.hpp"

using namespace fairspectral;
using fairspectral::testing::RandomVector;
using fairspectral::testing::TempDir;

namespace {

Matrix Rand(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = u(rng);
  return m;
}

Matrix RandomOrthonormal(Eigen::Index n, Eigen::Index k, std::uint64_t seed) {
  Eigen::HouseholderQR<Matrix> qr(Rand(n, k, seed));
  return qr.householderQ() * Matrix::Identity(n, k);
}

ModelConfig SmallConfig(std::size_t input_dim) {
  ModelConfig c;
  c.input_dim = input_dim;
  c.width = 6;
  c.d_e = 8;
  c.heads = 2;
  c.seed = 3;
  return c;
}

Graph SmallSbm(std::size_t n, std::uint64_t seed) {
  SbmConfig cfg;
  cfg.n = n;
  cfg.p_in = 0.1;
  cfg.p_out = 0.01;
  cfg.seed = seed;
  return GenerateSbm(cfg);
}

}  // namespace

TEST_SUITE("sinusoidal encoding") {

TEST_CASE("zero eigenvalue gives alternating zeros and ones") {
  const Matrix e = SinusoidalEncode(Vector::Zero(1), 6);
  for (Eigen::Index d = 0; d < 6; ++d) CHECK(e(0, d) == (d % 2 == 0 ? 0.0 : 1.0));
}

TEST_CASE("lambda = 1 with width 2") {
  const Matrix e = SinusoidalEncode(Vector::Ones(1), 2);
  CHECK(e(0, 0) == doctest::Approx(0.8414709848).epsilon(1e-10));
  CHECK(e(0, 1) == doctest::Approx(0.5403023059).epsilon(1e-10));
}

TEST_CASE("frequencies follow the 10000 base") {
  Vector lam(2);
  lam << 0.3, -0.7;
  const Matrix e = SinusoidalEncode(lam, 8);
  for (Eigen::Index k = 0; k < 2; ++k) {
    for (int i = 0; i < 4; ++i) {
      const double f = lam(k) / std::pow(10000.0, 2.0 * i / 8.0);
      CHECK(e(k, 2 * i) == doctest::Approx(std::sin(f)).epsilon(1e-15));
      CHECK(e(k, 2 * i + 1) == doctest::Approx(std::cos(f)).epsilon(1e-15));
    }
  }
  CHECK(e.cwiseAbs().maxCoeff() <= 1.0);
}

}  // TEST_SUITE

TEST_SUITE("oed block") {

TEST_CASE("single token gives a finite scalar") {
  ModelParams p = InitParams(SmallConfig(3));
  const Vector e = OedForward(SinusoidalEncode(Vector::Constant(1, 0.9), 8), p);
  CHECK(e.size() == 1);
  CHECK(std::isfinite(e(0)));
}

TEST_CASE("zero parameters except the projection bias") {
  ModelParams p = InitParams(SmallConfig(3));
  for (auto& [name, m] : p.named()) {
    if (name.rfind("oed.", 0) == 0) m->setZero();
  }
  p.tensors.oed.proj_b(0, 0) = 0.37;
  Vector lam(5);
  lam << 1.0, 0.8, -0.6, 0.3, 0.1;
  const Vector e = OedForward(SinusoidalEncode(lam, 8), p);
  for (Eigen::Index k = 0; k < 5; ++k) CHECK(e(k) == 0.37);
}

TEST_CASE("permuting tokens permutes the outputs") {
  ModelParams p = InitParams(SmallConfig(3));
  Vector lam(6);
  lam << 1.0, 0.9, -0.8, 0.5, 0.4, -0.2;
  const std::vector<Eigen::Index> perm = {3, 0, 5, 1, 4, 2};
  Vector permuted(6);
  for (Eigen::Index k = 0; k < 6; ++k) permuted(k) = lam(perm[k]);
  const Vector a = OedForward(SinusoidalEncode(lam, 8), p);
  const Vector b = OedForward(SinusoidalEncode(permuted, 8), p);
  for (Eigen::Index k = 0; k < 6; ++k) CHECK(std::abs(b(k) - a(perm[k])) <= 1e-12);
}

TEST_CASE("baseline has no attention block") {
  ModelConfig c = SmallConfig(3);
  c.kind = ModelKind::kBaseline;
  const ModelParams p = InitParams(c);
  CHECK_THROWS_AS(OedForward(SinusoidalEncode(Vector::Ones(2), 8), p), Error);
  for (const auto& [name, m] : p.named()) CHECK(name.rfind("conv.", 0) == 0);
}

}  // TEST_SUITE

TEST_SUITE("spectral transform") {

TEST_CASE("complete basis with unit filter is the identity") {
  const DenseEigen e = FullDenseEigendecomposition(fairspectral::testing::RandomSymmetric(30, 2));
  const Matrix h = Rand(30, 4, 3);
  const Matrix out = SpectralTransform(e.vectors, Vector::Ones(30), h);
  CHECK((out - h).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("zero filter gives zero") {
  const Matrix p = RandomOrthonormal(20, 4, 1);
  CHECK(SpectralTransform(p, Vector::Zero(4), Rand(20, 3, 2)).isZero(0.0));
}

TEST_CASE("rank-one filter") {
  const Matrix p = RandomOrthonormal(15, 1, 4);
  const Matrix h = Rand(15, 3, 5);
  const Matrix out = SpectralTransform(p, Vector::Constant(1, 2.5), h);
  const Matrix expect = 2.5 * p.col(0) * (p.col(0).transpose() * h);
  CHECK((out - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("output rank stays within K") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix p = RandomOrthonormal(40, 3, seed);
    const Matrix out = SpectralTransform(p, RandomVector(3, seed + 10), Rand(40, 8, seed + 20));
    Eigen::JacobiSVD<Matrix> svd(out);
    const Vector sv = svd.singularValues();
    for (Eigen::Index i = 3; i < sv.size(); ++i) CHECK(sv(i) <= 1e-8 * sv(0));
  }
}

TEST_CASE("unit filter is idempotent") {
  const Matrix p = RandomOrthonormal(25, 5, 6);
  const Matrix h = Rand(25, 4, 7);
  const Matrix once = SpectralTransform(p, Vector::Ones(5), h);
  const Matrix twice = SpectralTransform(p, Vector::Ones(5), once);
  CHECK((once - twice).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("truncated projection keeps more of h than repeated convolution") {
  // Reported margin, not a theorem: compares the unit-filtered projection
  // onto K leading eigenvectors with ten rounds of the full operator.
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Graph g = SmallSbm(200, seed);
    const NormalizedOperator op = Normalize(g, OperatorMode::kSymNormalized);
    const SpectralBasis b = DenseTopK(op, 8);
    Vector h(static_cast<Eigen::Index>(g.n));
    for (std::size_t i = 0; i < g.n; ++i) h(static_cast<Eigen::Index>(i)) = g.sensitive[i];
    const Vector proj = SpectralTransform(b.eigenvectors, Vector::Ones(8), h);
    const double lhs = proj.dot(h) / (proj.norm() * h.norm());
    const double rhs = *ConvolutionSimilarity(op.matrix, h, 10);
    MESSAGE("seed " << seed << " margin " << lhs - rhs);
    CHECK(std::isfinite(lhs - rhs));
  }
}

TEST_CASE("shape errors") {
  CHECK_THROWS_AS(SpectralTransform(Matrix::Zero(4, 2), Vector::Ones(3), Matrix::Zero(4, 1)), Error);
  CHECK_THROWS_AS(SpectralTransform(Matrix::Zero(4, 2), Vector::Ones(2), Matrix::Zero(5, 1)), Error);
}

}  // TEST_SUITE

TEST_SUITE("convolution layer") {

TEST_CASE("selector weights pass non-negative H through") {
  const Matrix h = Rand(5, 3, 1).cwiseAbs();
  Matrix w = Matrix::Zero(6, 3);
  w.topRows(3) = Matrix::Identity(3, 3);
  CHECK(FugnnLayer(h, Rand(5, 3, 2), w) == h);
}

TEST_CASE("stacked halves with H' = H give ReLU(H)") {
  Matrix h(2, 2);
  h << 1.0, -2.0, -0.5, 3.0;
  Matrix w(4, 2);
  w << 0.5, 0, 0, 0.5, 0.5, 0, 0, 0.5;
  Matrix expect(2, 2);
  expect << 1.0, 0.0, 0.0, 3.0;
  CHECK(FugnnLayer(h, h, w) == expect);
}

TEST_CASE("zero weights give zero") {
  CHECK(FugnnLayer(Rand(4, 2, 1), Rand(4, 2, 2), Matrix::Zero(4, 3)).isZero(0.0));
  CHECK_THROWS_AS(FugnnLayer(Rand(4, 2, 1), Rand(4, 2, 2), Matrix::Zero(3, 3)), Error);
}

}  // TEST_SUITE

TEST_SUITE("baseline propagation") {

TEST_CASE("zero steps return H0") {
  const CsrMatrix s = fairspectral::testing::RandomSparseSymmetric(10, 3.0, 1);
  const Matrix h0 = Rand(10, 2, 2);
  CHECK(BaselinePropagate(s, h0, 0.1, 0) == h0);
}

TEST_CASE("identity operator is a fixed point") {
  const CsrMatrix s = CsrMatrix::from_dense(Matrix::Identity(6, 6));
  const Matrix h0 = Rand(6, 3, 3);
  CHECK((BaselinePropagate(s, h0, 0.3, 25) - h0).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("two-node hand computation") {
  Matrix sd(2, 2);
  sd << 0.5, 0.5, 0.5, 0.5;
  Matrix h0(2, 1);
  h0 << 1.0, 3.0;
  const Matrix h1 = BaselinePropagate(CsrMatrix::from_dense(sd), h0, 0.5, 1);
  // 0.5 * (2, 2) + 0.5 * (1, 3)
  CHECK(h1(0, 0) == 1.5);
  CHECK(h1(1, 0) == 2.5);
}

TEST_CASE("theta outside (0, 1)") {
  const CsrMatrix s = CsrMatrix::from_dense(Matrix::Identity(2, 2));
  CHECK_THROWS_AS(BaselinePropagate(s, Matrix::Ones(2, 1), 0.0, 1), Error);
  CHECK_THROWS_AS(BaselinePropagate(s, Matrix::Ones(2, 1), 1.0, 1), Error);
}

}  // TEST_SUITE

TEST_SUITE("forward") {

TEST_CASE("config validation") {
  ModelConfig c = SmallConfig(3);
  CHECK_NOTHROW(c.validate());
  c.d_e = 7;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SmallConfig(3);
  c.heads = 3;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SmallConfig(3);
  c.theta = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SmallConfig(0);
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(ParseModelKind("baseline") == ModelKind::kBaseline);
  CHECK_THROWS_AS(ParseModelKind("gcn"), Error);
}

TEST_CASE("init shapes and ranges") {
  const ModelParams p = InitParams(SmallConfig(5));
  CHECK(p.tensors.conv.input_w.rows() == 5);
  CHECK(p.tensors.conv.input_w.cols() == 6);
  CHECK(p.tensors.conv.layers.size() == 2);
  CHECK(p.tensors.conv.layers[0].rows() == 12);
  CHECK(p.tensors.oed.ffn_w1.cols() == 32);
  CHECK(p.tensors.oed.ln1_gamma == Matrix::Ones(1, 8));
  const double bound = std::sqrt(6.0 / (5 + 6));
  CHECK(p.tensors.conv.input_w.cwiseAbs().maxCoeff() <= bound);
  CHECK(p.tensors.conv.input_b.isZero(0.0));
  const ModelParams q = InitParams(SmallConfig(5));
  CHECK(ParamsFingerprint(p) == ParamsFingerprint(q));
  ModelConfig other = SmallConfig(5);
  other.seed = 4;
  CHECK(ParamsFingerprint(InitParams(other)) != ParamsFingerprint(p));
}

TEST_CASE("zero layers reduce to the classifier on the input map") {
  const Graph g = SmallSbm(60, 1);
  ModelConfig c = SmallConfig(g.feature_dim());
  c.layers = 0;
  const ModelParams p = InitParams(c);
  const SpectralBasis b = DenseTopK(Normalize(g, OperatorMode::kSymNormalized), 3);
  ForwardInputs in{&g.features, &b, nullptr};
  const Matrix logits = Forward(in, p);
  const auto& t = p.tensors.conv;
  Matrix h = g.features * t.input_w;
  h.rowwise() += t.input_b.row(0);
  Matrix expect = h * t.classifier_w;
  expect.rowwise() += t.classifier_b.row(0);
  CHECK((logits - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("nodes swapped by an automorphism get equal logits") {
  // Path 0-1-2-3 with mirrored features; the full basis keeps every
  // eigenspace whole.
  Graph g;
  g.n = 4;
  std::vector<CsrMatrix::Triplet> t;
  for (std::uint32_t i = 0; i < 3; ++i) {
    t.push_back({i, i + 1, 1.0});
    t.push_back({i + 1, i, 1.0});
  }
  g.adjacency = CsrMatrix::from_triplets(4, 4, std::move(t));
  g.features = Matrix(4, 3);
  g.features << 0.2, -1.0, 0.5, 0.7, 0.3, -0.4, 0.7, 0.3, -0.4, 0.2, -1.0, 0.5;
  const NormalizedOperator op = Normalize(g, OperatorMode::kSymNormalized);
  const SpectralBasis b = DenseTopK(op, 4);
  for (ModelKind kind : {ModelKind::kFugnn, ModelKind::kBaseline}) {
    ModelConfig c = SmallConfig(3);
    c.kind = kind;
    const ModelParams p = InitParams(c);
    ForwardInputs in{&g.features, &b, &op.matrix};
    const Matrix logits = Forward(in, p);
    CHECK((logits.row(0) - logits.row(3)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((logits.row(1) - logits.row(2)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("default SBM gives finite logits after init") {
  SbmConfig sc;
  const Graph g = GenerateSbm(sc);
  const NormalizedOperator op = Normalize(g, OperatorMode::kSymNormalized);
  LanczosOptions lo;
  lo.k = 8;
  const SpectralBasis b = TopKEigenpairs(op, lo);
  ModelConfig c;
  c.input_dim = g.feature_dim();
  const ModelParams p = InitParams(c);
  ForwardInputs in{&g.features, &b, &op.matrix};
  const Matrix logits = Forward(in, p);
  CHECK(logits.rows() == 2000);
  CHECK(logits.cols() == 2);
  CHECK(logits.allFinite());
  c.kind = ModelKind::kBaseline;
  CHECK(Forward(in, InitParams(c)).allFinite());
}

TEST_CASE("missing inputs are rejected") {
  const Graph g = SmallSbm(40, 2);
  const ModelParams p = InitParams(SmallConfig(g.feature_dim()));
  ForwardInputs in{&g.features, nullptr, nullptr};
  CHECK_THROWS_AS(Forward(in, p), Error);
  ModelConfig c = SmallConfig(g.feature_dim() + 1);
  const SpectralBasis b = DenseTopK(Normalize(g, OperatorMode::kSymNormalized), 2);
  ForwardInputs in2{&g.features, &b, nullptr};
  CHECK_THROWS_AS(Forward(in2, InitParams(c)), Error);
}

}  // TEST_SUITE

TEST_SUITE("model io") {

TEST_CASE("binary round trip preserves every bit") {
  TempDir dir;
  for (ModelKind kind : {ModelKind::kFugnn, ModelKind::kBaseline}) {
    ModelConfig c = SmallConfig(4);
    c.kind = kind;
    c.layers = 3;
    const ModelParams p = InitParams(c);
    SaveParams(p, dir / "m.fsmp");
    const ModelParams q = LoadParams(dir / "m.fsmp");
    CHECK(q.config.kind == kind);
    CHECK(q.config.layers == 3);
    const auto a = p.named();
    const auto b = q.named();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].first == b[i].first);
      CHECK(*a[i].second == *b[i].second);
    }
    CHECK(ParamsFingerprint(p) == ParamsFingerprint(q));
  }
}

TEST_CASE("corrupt model files") {
  TempDir dir;
  fairspectral::testing::WriteFile(dir / "bad.fsmp", "FSMQ");
  CHECK_THROWS_AS(LoadParams(dir / "bad.fsmp"), Error);
  SaveParams(InitParams(SmallConfig(2)), dir / "ok.fsmp");
  const std::string bytes = fairspectral::testing::ReadFile(dir / "ok.fsmp");
  fairspectral::testing::WriteFile(dir / "cut.fsmp", bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(LoadParams(dir / "cut.fsmp"), Error);
  CHECK_THROWS_AS(LoadParams(dir / "absent.fsmp"), Error);
}

TEST_CASE("json export lists every tensor") {
  const ModelParams p = InitParams(SmallConfig(2));
  const std::string j = ParamsToJson(p, false);
  for (const auto& [name, m] : p.named()) CHECK(j.find("\"" + name + "\"") != std::string::npos);
}

}  // TEST_SUITE
