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
#include <optional>
#include <string>
#include <vector>

#include "fairspectral/eigensolver.hpp"
#include "fairspectral/graph.hpp"
#include "fairspectral/metrics.hpp"
#include "fairspectral/model.hpp"
#include "fairspectral/trainer.hpp"

namespace fairspectral {

enum class EigenMethod {
  kAuto,     // dense when K is a large fraction of n, Lanczos otherwise
  kLanczos,
  kDense,
};

EigenMethod ParseEigenMethod(const std::string& name);

struct BasisOptions {
  std::size_t k = 8;
  double tol = 1e-10;
  std::size_t max_iter = 20000;
  std::uint64_t seed = 0;
  EigenMethod method = EigenMethod::kAuto;
  std::size_t dense_limit = kDefaultDenseLimit;
};

SpectralBasis ComputeBasis(const NormalizedOperator& op, const BasisOptions& options);

struct ExperimentConfig {
  ModelConfig model;  // input_dim is taken from the graph
  TrainConfig train;
  OperatorMode mode = OperatorMode::kSymNormalized;
  BasisOptions basis;
  // Use the masks stored on the graph instead of drawing per-seed splits.
  bool fixed_splits = false;
};

struct RunResult {
  std::uint64_t seed = 0;
  ModelParams params;
  TrainHistory history;
  FairnessReport test;
};

// Splits, initialization and training for one seed. The operator and basis
// are shared across seeds; `basis` may be null for the baseline.
RunResult RunSeed(const Graph& g, const NormalizedOperator& op, const SpectralBasis* basis,
                  const ExperimentConfig& cfg, std::uint64_t seed);

struct Aggregate {
  std::size_t runs = 0;     // values that entered the statistics
  std::size_t skipped = 0;  // runs where the metric was undefined
  double mean = 0.0;
  double sd = 0.0;          // sample standard deviation; 0 for a single run
};

Aggregate AggregateValues(const std::vector<std::optional<double>>& values);

struct MultiSeedReport {
  std::vector<RunResult> runs;
  Aggregate accuracy;
  Aggregate delta_sp;
  Aggregate delta_eo;
};

MultiSeedReport Summarize(std::vector<RunResult> runs);
std::string MultiSeedReportToJson(const MultiSeedReport& report);

}  // namespace fairspectral
