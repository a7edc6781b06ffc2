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
#include <vector>

#include "fairspectral/common.hpp"
#include "fairspectral/sparse.hpp"

namespace fairspectral {

using Mask = std::vector<bool>;

struct SplitMasks {
  Mask train;
  Mask val;
  Mask test;
};

enum class Split { kTrain, kVal, kTest };

const char* SplitName(Split split);
const Mask& MaskFor(const SplitMasks& masks, Split split);

// Undirected node-attributed graph. The adjacency is stored symmetric with
// unit weights and without self-loops; the sensitive attribute stays inside
// `features` at column `sensitive_column`.
struct Graph {
  std::size_t n = 0;
  CsrMatrix adjacency;
  Matrix features;
  std::vector<std::string> feature_names;
  std::size_t sensitive_column = 0;
  std::string sensitive_name;
  std::vector<int> sensitive;
  std::vector<int> labels;
  SplitMasks masks;

  std::size_t stored_entries() const { return adjacency.nnz(); }
  std::size_t undirected_edges() const { return adjacency.nnz() / 2; }
  std::size_t feature_dim() const {
    return static_cast<std::size_t>(features.cols());
  }

  // Throws InvalidArgument when any structural invariant is broken.
  void validate() const;
};

enum class OperatorMode { kRawAdjacency, kSymNormalized };

const char* OperatorModeName(OperatorMode mode);
OperatorMode ParseOperatorMode(const std::string& name);

struct NormalizedOperator {
  CsrMatrix matrix;
  OperatorMode mode = OperatorMode::kSymNormalized;

  std::size_t n() const { return matrix.rows; }
};

struct SbmConfig {
  std::size_t n = 2000;
  double p_in = 0.01;
  double p_out = 0.001;
  double sensitive_homophily = 0.9;
  double label_bias = 0.8;
  std::size_t d = 16;
  double noise_sd = 1.0;
  // Mean offset of the proxy feature columns between the two blocks.
  double proxy_shift = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Reads a `u v` edge list and a delimited node table (comma or tab, with a
// header row). Duplicate and reversed edges collapse into one undirected
// edge; self-loops are dropped. Label values greater than 1 are folded into
// class 1.
Graph LoadGraph(const std::filesystem::path& edge_list,
                const std::filesystem::path& node_table,
                const std::string& sensitive_column,
                const std::string& label_column);

// Writes the graph back out in the layout LoadGraph reads.
void SaveGraph(const Graph& g, const std::filesystem::path& edge_list,
               const std::filesystem::path& node_table);

NormalizedOperator Normalize(const Graph& g, OperatorMode mode);

// Label-stratified split: a quarter of every class to validation, a quarter
// to test, and min(half the class, 500) of the remainder to training.
SplitMasks MakeSplits(const Graph& g, std::uint64_t seed);

void SaveSplits(const SplitMasks& masks, const std::filesystem::path& path);
SplitMasks LoadSplits(const std::filesystem::path& path, std::size_t n);

// Two-block stochastic block model with a block-correlated sensitive
// attribute and partially biased labels.
Graph GenerateSbm(const SbmConfig& cfg);

}  // namespace fairspectral
