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

#include "fairspectral/pipeline.hpp"

#include <cmath>

#include "json.hpp"

namespace fairspectral {

EigenMethod ParseEigenMethod(const std::string& name) {
  if (name == "auto") return EigenMethod::kAuto;
  if (name == "lanczos") return EigenMethod::kLanczos;
  if (name == "dense") return EigenMethod::kDense;
  throw InvalidArgument("unknown eigen method '" + name + "' (expected auto, lanczos or dense)");
}

SpectralBasis ComputeBasis(const NormalizedOperator& op, const BasisOptions& options) {
  const std::size_t n = op.n();
  if (options.k < 1 || options.k > n) {
    throw InvalidArgument("K = " + std::to_string(options.k) + " must lie in [1, " +
                          std::to_string(n) + "]");
  }
  EigenMethod method = options.method;
  if (method == EigenMethod::kAuto) {
    // A Krylov space of about 2K vectors stops paying off once it nears n.
    method = 4 * options.k >= n && n <= options.dense_limit ? EigenMethod::kDense
                                                            : EigenMethod::kLanczos;
  }
  if (method == EigenMethod::kDense) return DenseTopK(op, options.k, options.dense_limit);
  LanczosOptions lo;
  lo.k = options.k;
  lo.tol = options.tol;
  lo.max_iter = options.max_iter;
  lo.seed = options.seed;
  return TopKEigenpairs(op, lo);
}

RunResult RunSeed(const Graph& g, const NormalizedOperator& op, const SpectralBasis* basis,
                  const ExperimentConfig& cfg, std::uint64_t seed) {
  Graph local = g;
  if (!cfg.fixed_splits) local.masks = MakeSplits(g, seed);

  ModelConfig mc = cfg.model;
  mc.input_dim = g.feature_dim();
  mc.seed = seed;
  TrainConfig tc = cfg.train;
  tc.seed = seed;

  ForwardInputs in;
  in.features = &local.features;
  in.basis = basis;
  in.op = &op.matrix;

  RunResult r;
  r.seed = seed;
  TrainResult trained = Train(local, in, InitParams(mc), tc);
  r.params = std::move(trained.params);
  r.history = std::move(trained.history);
  r.test = Evaluate(Predict(Forward(in, r.params)), local, Split::kTest);
  return r;
}

Aggregate AggregateValues(const std::vector<std::optional<double>>& values) {
  Aggregate a;
  double sum = 0.0;
  for (const auto& v : values) {
    if (!v) {
      ++a.skipped;
      continue;
    }
    ++a.runs;
    sum += *v;
  }
  if (a.runs == 0) return a;
  a.mean = sum / static_cast<double>(a.runs);
  if (a.runs > 1) {
    double ss = 0.0;
    for (const auto& v : values) {
      if (v) ss += (*v - a.mean) * (*v - a.mean);
    }
    a.sd = std::sqrt(ss / static_cast<double>(a.runs - 1));
  }
  return a;
}

MultiSeedReport Summarize(std::vector<RunResult> runs) {
  MultiSeedReport rep;
  std::vector<std::optional<double>> acc;
  std::vector<std::optional<double>> sp;
  std::vector<std::optional<double>> eo;
  for (const RunResult& r : runs) {
    acc.emplace_back(r.test.accuracy);
    sp.push_back(r.test.delta_sp);
    eo.push_back(r.test.delta_eo);
  }
  rep.accuracy = AggregateValues(acc);
  rep.delta_sp = AggregateValues(sp);
  rep.delta_eo = AggregateValues(eo);
  rep.runs = std::move(runs);
  return rep;
}

std::string MultiSeedReportToJson(const MultiSeedReport& report) {
  auto agg = [](const Aggregate& a) {
    nlohmann::ordered_json j;
    j["mean"] = a.runs > 0 ? nlohmann::ordered_json(a.mean) : nlohmann::ordered_json(nullptr);
    j["sd"] = a.runs > 0 ? nlohmann::ordered_json(a.sd) : nlohmann::ordered_json(nullptr);
    j["runs"] = a.runs;
    j["skipped_undefined"] = a.skipped;
    return j;
  };
  nlohmann::ordered_json j;
  j["accuracy"] = agg(report.accuracy);
  j["delta_sp"] = agg(report.delta_sp);
  j["delta_eo"] = agg(report.delta_eo);
  auto runs = nlohmann::ordered_json::array();
  for (const RunResult& r : report.runs) {
    nlohmann::ordered_json one;
    one["seed"] = r.seed;
    one["test"] = nlohmann::ordered_json::parse(FairnessReportToJson(r.test));
    one["history"] = nlohmann::ordered_json::parse(HistorySummaryJson(r.history));
    runs.push_back(std::move(one));
  }
  j["per_seed"] = std::move(runs);
  return j.dump();
}

}  // namespace fairspectral
