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

#include "doctest.h"
#include "fairspectral/eigensolver.hpp"
#include "fairspectral/metrics.hpp"
#include "fairspectral/trainer.hpp"

using namespace fairspectral;

namespace {

struct Fixture {
  Graph g;
  NormalizedOperator op;
  SpectralBasis basis;
  ForwardInputs in;
};

std::unique_ptr<Fixture> MakeFixture(std::size_t n, std::size_t k, std::uint64_t seed) {
  auto f = std::make_unique<Fixture>();
  SbmConfig cfg;
  cfg.n = n;
  cfg.p_in = std::min(1.0, 6.0 / static_cast<double>(n));
  cfg.p_out = cfg.p_in / 10.0;
  cfg.d = 4;
  cfg.seed = seed;
  f->g = GenerateSbm(cfg);
  f->g.masks = MakeSplits(f->g, seed);
  f->op = Normalize(f->g, OperatorMode::kSymNormalized);
  f->basis = DenseTopK(f->op, k);
  f->in = ForwardInputs{&f->g.features, &f->basis, &f->op.matrix};
  return f;
}

ModelConfig Config(const Graph& g, ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  c.input_dim = g.feature_dim();
  c.width = 8;
  c.layers = 2;
  c.d_e = 8;
  c.heads = 2;
  c.seed = 1;
  return c;
}

}  // namespace

TEST_SUITE("loss") {

TEST_CASE("saturated correct logits cost nothing") {
  Matrix l(1, 2);
  l << 1000, -1000;
  CHECK(Loss(l, {0}, Mask{true}) <= 1e-300);
}

TEST_CASE("uniform logits cost ln 2") {
  CHECK(Loss(Matrix::Zero(3, 2), {0, 1, 1}, Mask(3, true)) ==
        doctest::Approx(0.6931471806).epsilon(1e-10));
}

TEST_CASE("saturated wrong logits grow linearly and stay finite") {
  Matrix a(1, 2);
  a << 1000, -1000;
  Matrix b(1, 2);
  b << 2000, -2000;
  const double la = Loss(a, {1}, Mask{true});
  const double lb = Loss(b, {1}, Mask{true});
  CHECK(la == doctest::Approx(2000.0));
  CHECK(lb == doctest::Approx(4000.0));
}

TEST_CASE("empty mask") {
  CHECK_THROWS_AS(Loss(Matrix::Zero(2, 2), {0, 1}, Mask(2, false)), Error);
}

}  // TEST_SUITE

TEST_SUITE("gradients") {

TEST_CASE("finite differences agree on every tensor") {
  const auto f = MakeFixture(30, 3, 5);
  ModelConfig c = Config(f->g, ModelKind::kFugnn);
  const ModelParams p = InitParams(c);
  const auto entries = CheckGradients(f->in, p, f->g.labels, f->g.masks.train);
  CHECK(entries.size() == p.named().size());
  for (const auto& e : entries) {
    INFO(e.tensor);
    CHECK(e.max_rel_error <= 1e-4);
  }
}

TEST_CASE("baseline gradients") {
  const auto f = MakeFixture(30, 3, 6);
  const ModelParams p = InitParams(Config(f->g, ModelKind::kBaseline));
  for (const auto& e : CheckGradients(f->in, p, f->g.labels, f->g.masks.train)) {
    INFO(e.tensor);
    CHECK(e.max_rel_error <= 1e-4);
  }
}

TEST_CASE("gradient order follows named()") {
  const auto f = MakeFixture(30, 3, 7);
  const ModelParams p = InitParams(Config(f->g, ModelKind::kFugnn));
  const LossAndGrad lg = ComputeLossAndGrad(f->in, p, f->g.labels, f->g.masks.train);
  const auto named = p.named();
  REQUIRE(lg.grads.size() == named.size());
  for (std::size_t i = 0; i < named.size(); ++i) {
    CHECK(lg.grads[i].rows() == named[i].second->rows());
    CHECK(lg.grads[i].cols() == named[i].second->cols());
  }
  CHECK(std::isfinite(lg.loss));
}

}  // TEST_SUITE

TEST_SUITE("train") {

TEST_CASE("zero learning rate keeps the parameters") {
  const auto f = MakeFixture(60, 3, 1);
  const ModelParams p = InitParams(Config(f->g, ModelKind::kFugnn));
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.weight_decay = 0.0;
  cfg.epochs = 20;
  const TrainResult r = Train(f->g, f->in, p, cfg);
  CHECK(r.history.snapshot_id == ParamsFingerprint(p));
  const auto a = p.named();
  const auto b = r.params.named();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i].second == *b[i].second);
}

TEST_CASE("a 50-node graph is fit within 300 epochs") {
  auto f = MakeFixture(50, 5, 2);
  // Train and select on every node.
  f->g.masks.train = Mask(50, true);
  f->g.masks.val = Mask(50, true);
  const ModelParams p = InitParams(Config(f->g, ModelKind::kFugnn));
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.lr = 0.02;
  cfg.weight_decay = 0.0;
  cfg.patience = 300;
  const TrainResult r = Train(f->g, f->in, p, cfg);
  const std::vector<int> pred = Predict(Forward(f->in, r.params));
  const double acc = Accuracy(pred, f->g.labels, Mask(50, true));
  MESSAGE("train accuracy " << acc);
  CHECK(acc >= 0.98);
}

TEST_CASE("history bookkeeping") {
  const auto f = MakeFixture(120, 4, 3);
  const ModelParams p = InitParams(Config(f->g, ModelKind::kFugnn));
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.patience = 15;
  const TrainResult r = Train(f->g, f->in, p, cfg);
  const TrainHistory& h = r.history;
  REQUIRE_FALSE(h.epochs.empty());
  CHECK(h.epochs.size() <= 60);
  for (std::size_t i = 0; i < h.epochs.size(); ++i) CHECK(h.epochs[i].epoch == i);
  CHECK(h.best_epoch < h.epochs.size());
  for (const auto& e : h.epochs) CHECK(e.val_accuracy <= h.epochs[h.best_epoch].val_accuracy);
  CHECK(h.epochs[h.best_epoch].train_loss <= h.epochs[0].train_loss);
  if (h.epochs.size() < 60) CHECK(h.epochs.size() - 1 - h.best_epoch == 15);
  // Returned parameters reproduce the best epoch's validation accuracy.
  const double acc = Accuracy(Predict(Forward(f->in, r.params)), f->g.labels, f->g.masks.val);
  CHECK(acc == h.epochs[h.best_epoch].val_accuracy);
  CHECK_FALSE(h.diverged);
  const std::string lines = HistoryToJsonLines(h);
  CHECK(static_cast<std::size_t>(std::count(lines.begin(), lines.end(), '\n')) == h.epochs.size());
  CHECK(HistorySummaryJson(h).find(h.snapshot_id) != std::string::npos);
}

TEST_CASE("same seed gives the same history bits") {
  const auto f = MakeFixture(80, 4, 4);
  const ModelParams p = InitParams(Config(f->g, ModelKind::kFugnn));
  TrainConfig cfg;
  cfg.epochs = 40;
  const TrainResult a = Train(f->g, f->in, p, cfg);
  const TrainResult b = Train(f->g, f->in, p, cfg);
  CHECK(HistoryToJsonLines(a.history) == HistoryToJsonLines(b.history));
  CHECK(a.history.snapshot_id == b.history.snapshot_id);
  CHECK(a.history.best_epoch == b.history.best_epoch);
}

TEST_CASE("non-finite parameters abort with the history kept") {
  const auto f = MakeFixture(40, 3, 5);
  ModelParams p = InitParams(Config(f->g, ModelKind::kBaseline));
  p.tensors.conv.classifier_w(0, 0) = std::nan("");
  TrainConfig cfg;
  cfg.epochs = 10;
  const TrainResult r = Train(f->g, f->in, p, cfg);
  CHECK(r.history.diverged);
  CHECK_FALSE(r.history.divergence.empty());
  CHECK(r.history.epochs.empty());
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.lr = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

}  // TEST_SUITE
