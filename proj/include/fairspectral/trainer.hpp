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

#include "fairspectral/graph.hpp"
#include "fairspectral/model.hpp"

namespace fairspectral {

struct TrainConfig {
  std::size_t epochs = 1000;
  double lr = 0.01;
  // L2 penalty added to the gradient before the Adam moments.
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Stop after this many epochs without a better validation accuracy.
  std::size_t patience = 100;

  void validate() const;
};

// Metrics of epoch `epoch` are taken on the parameters before that epoch's
// update, so record 0 describes the initialization.
struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  std::optional<double> val_delta_sp;
  std::optional<double> val_delta_eo;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  std::string snapshot_id;  // fingerprint of the returned parameters
  bool diverged = false;
  std::string divergence;
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

// Mean cross-entropy of the masked rows, via a stable log-softmax.
double Loss(const Matrix& logits, const std::vector<int>& labels, const Mask& mask);

// Loss and its gradient for every tensor of `params`, in named() order.
struct LossAndGrad {
  double loss = 0.0;
  std::vector<Matrix> grads;
};
LossAndGrad ComputeLossAndGrad(const ForwardInputs& in, const ModelParams& params,
                               const std::vector<int>& labels, const Mask& mask);

// Full-batch Adam on the training mask. Returns the parameters of the epoch
// with the best validation accuracy (earliest on ties). A non-finite loss or
// gradient stops training and is reported in the history.
TrainResult Train(const Graph& g, const ForwardInputs& in, ModelParams params,
                  const TrainConfig& cfg);

struct GradientCheckEntry {
  std::string tensor;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

// Central differences on every scalar of every tensor. The relative error of
// one scalar is |a - f| / max(|a|, |f|, floor).
std::vector<GradientCheckEntry> CheckGradients(const ForwardInputs& in, const ModelParams& params,
                                               const std::vector<int>& labels, const Mask& mask,
                                               double step = 1e-5, double floor = 1e-2);

// One JSON object per epoch, newline separated.
std::string HistoryToJsonLines(const TrainHistory& history);
std::string HistorySummaryJson(const TrainHistory& history);

}  // namespace fairspectral
