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

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fairspectral/common.hpp"
#include "fairspectral/graph.hpp"

namespace fairspectral {

// Row-wise argmax over two columns; exact ties go to class 0.
std::vector<int> Predict(const Matrix& logits);

double Accuracy(const std::vector<int>& pred, const std::vector<int>& y, const Mask& mask);

// |P(yhat=1 | s=0) - P(yhat=1 | s=1)| over the mask. Empty when either
// group is absent.
std::optional<double> DeltaSp(const std::vector<int>& pred, const std::vector<int>& s,
                              const Mask& mask);

// |P(yhat=1 | y=1, s=0) - P(yhat=1 | y=1, s=1)| over the mask. Empty when
// either group has no positive labels.
std::optional<double> DeltaEo(const std::vector<int>& pred, const std::vector<int>& y,
                              const std::vector<int>& s, const Mask& mask);

struct FairnessReport {
  double accuracy = 0.0;
  std::optional<double> delta_sp;
  std::optional<double> delta_eo;
  // counts[s][y][yhat]
  std::array<std::array<std::array<std::size_t, 2>, 2>, 2> counts{};
  std::size_t mask_size = 0;
  std::string mask_used;
};

FairnessReport Evaluate(const std::vector<int>& pred, const Graph& g, Split split);
FairnessReport Evaluate(const std::vector<int>& pred, const std::vector<int>& y,
                        const std::vector<int>& s, const Mask& mask, const std::string& name);

std::string FairnessReportToJson(const FairnessReport& report);

}  // namespace fairspectral
