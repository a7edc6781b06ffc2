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

#include "fairspectral/metrics.hpp"

#include <cmath>

#include "json.hpp"

namespace fairspectral {
namespace {

void RequireLengths(std::size_t n, std::initializer_list<std::size_t> others) {
  for (std::size_t m : others) {
    if (m != n) throw InvalidArgument("metrics: input lengths differ");
  }
}

// Positive-prediction rate difference between the s=0 and s=1 members of
// the rows accepted by `keep`.
template <class Keep>
std::optional<double> RateGap(const std::vector<int>& pred, const std::vector<int>& s,
                              const Mask& mask, Keep keep) {
  std::size_t total[2] = {0, 0};
  std::size_t positive[2] = {0, 0};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i] || !keep(i)) continue;
    const int g = s[i];
    ++total[g];
    positive[g] += pred[i] == 1 ? 1 : 0;
  }
  if (total[0] == 0 || total[1] == 0) return std::nullopt;
  const double r0 = static_cast<double>(positive[0]) / static_cast<double>(total[0]);
  const double r1 = static_cast<double>(positive[1]) / static_cast<double>(total[1]);
  return std::abs(r0 - r1);
}

}  // namespace

std::vector<int> Predict(const Matrix& logits) {
  if (logits.cols() != 2) throw InvalidArgument("predict: expected two logit columns");
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    out[static_cast<std::size_t>(r)] = logits(r, 1) > logits(r, 0) ? 1 : 0;
  }
  return out;
}

double Accuracy(const std::vector<int>& pred, const std::vector<int>& y, const Mask& mask) {
  RequireLengths(pred.size(), {y.size(), mask.size()});
  std::size_t hit = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    ++total;
    hit += pred[i] == y[i] ? 1 : 0;
  }
  if (total == 0) throw InvalidArgument("accuracy over an empty mask");
  return static_cast<double>(hit) / static_cast<double>(total);
}

std::optional<double> DeltaSp(const std::vector<int>& pred, const std::vector<int>& s,
                              const Mask& mask) {
  RequireLengths(pred.size(), {s.size(), mask.size()});
  return RateGap(pred, s, mask, [](std::size_t) { return true; });
}

std::optional<double> DeltaEo(const std::vector<int>& pred, const std::vector<int>& y,
                              const std::vector<int>& s, const Mask& mask) {
  RequireLengths(pred.size(), {y.size(), s.size(), mask.size()});
  return RateGap(pred, s, mask, [&](std::size_t i) { return y[i] == 1; });
}

FairnessReport Evaluate(const std::vector<int>& pred, const std::vector<int>& y,
                        const std::vector<int>& s, const Mask& mask, const std::string& name) {
  FairnessReport r;
  r.mask_used = name;
  r.accuracy = Accuracy(pred, y, mask);
  r.delta_sp = DeltaSp(pred, s, mask);
  r.delta_eo = DeltaEo(pred, y, s, mask);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    ++r.counts[s[i]][y[i]][pred[i]];
    ++r.mask_size;
  }
  return r;
}

FairnessReport Evaluate(const std::vector<int>& pred, const Graph& g, Split split) {
  return Evaluate(pred, g.labels, g.sensitive, MaskFor(g.masks, split), SplitName(split));
}

std::string FairnessReportToJson(const FairnessReport& r) {
  nlohmann::ordered_json j;
  j["mask"] = r.mask_used;
  j["mask_size"] = r.mask_size;
  j["accuracy"] = r.accuracy;
  j["delta_sp"] = r.delta_sp ? nlohmann::ordered_json(*r.delta_sp) : nullptr;
  j["delta_eo"] = r.delta_eo ? nlohmann::ordered_json(*r.delta_eo) : nullptr;
  auto cells = nlohmann::ordered_json::array();
  for (int s = 0; s < 2; ++s) {
    for (int y = 0; y < 2; ++y) {
      for (int p = 0; p < 2; ++p) {
        cells.push_back({{"s", s}, {"y", y}, {"pred", p}, {"count", r.counts[s][y][p]}});
      }
    }
  }
  j["group_counts"] = std::move(cells);
  return j.dump();
}

}  // namespace fairspectral
