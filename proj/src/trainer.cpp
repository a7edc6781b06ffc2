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

#include "fairspectral/trainer.hpp"

#include <cmath>

#include "fairspectral/metrics.hpp"
#include "json.hpp"

namespace fairspectral {
namespace {

// Runs one recorded forward pass. `grads` is filled only when requested.
double ForwardBackward(const ForwardInputs& in, const ModelParams& params,
                       const std::vector<int>& labels, const Mask& mask, Matrix* logits_out,
                       std::vector<Matrix>* grads) {
  ad::Tape tape;
  ParamVars vars = BindParams(tape, params, grads != nullptr);
  const ad::Var logits = Forward(tape, in, params, vars);
  const ad::Var loss = ad::MaskedCrossEntropy(logits, labels, mask);
  if (logits_out != nullptr) *logits_out = logits.value();
  const double value = loss.value()(0, 0);
  if (grads != nullptr && std::isfinite(value)) {
    tape.Backward(loss);
    grads->clear();
    vars.ForEach(params.config.kind, [&](const std::string&, ad::Var& v) { grads->push_back(v.grad()); });
  }
  return value;
}

nlohmann::ordered_json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("train: epochs must be at least 1");
  if (!(lr >= 0.0)) throw InvalidArgument("train: lr must be non-negative");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("train: weight_decay must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidArgument("train: Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw InvalidArgument("train: eps must be positive");
}

double Loss(const Matrix& logits, const std::vector<int>& labels, const Mask& mask) {
  ad::Tape tape;
  return ad::MaskedCrossEntropy(tape.Constant(logits), labels, mask).value()(0, 0);
}

LossAndGrad ComputeLossAndGrad(const ForwardInputs& in, const ModelParams& params,
                               const std::vector<int>& labels, const Mask& mask) {
  LossAndGrad out;
  out.loss = ForwardBackward(in, params, labels, mask, nullptr, &out.grads);
  return out;
}

TrainResult Train(const Graph& g, const ForwardInputs& in, ModelParams params,
                  const TrainConfig& cfg) {
  cfg.validate();
  const Mask& train_mask = g.masks.train;
  const Mask& val_mask = g.masks.val;

  auto named = params.named();
  std::vector<Matrix> m1;
  std::vector<Matrix> m2;
  for (const auto& [name, t] : named) {
    m1.push_back(Matrix::Zero(t->rows(), t->cols()));
    m2.push_back(Matrix::Zero(t->rows(), t->cols()));
  }

  TrainResult result;
  result.params = params;
  TrainHistory& h = result.history;
  double best_acc = -1.0;
  double bias1 = 1.0;
  double bias2 = 1.0;
  std::vector<Matrix> grads;
  Matrix logits;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss = 0.0;
    try {
      loss = ForwardBackward(in, params, g.labels, train_mask, &logits, &grads);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNumerical) throw;
      h.diverged = true;
      h.divergence = e.what();
      break;
    }
    if (!std::isfinite(loss) || !logits.allFinite()) {
      h.diverged = true;
      h.divergence = "non-finite loss at epoch " + std::to_string(epoch);
      break;
    }
    const std::vector<int> pred = Predict(logits);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss;
    rec.val_accuracy = Accuracy(pred, g.labels, val_mask);
    rec.val_delta_sp = DeltaSp(pred, g.sensitive, val_mask);
    rec.val_delta_eo = DeltaEo(pred, g.labels, g.sensitive, val_mask);
    h.epochs.push_back(rec);

    if (rec.val_accuracy > best_acc) {
      best_acc = rec.val_accuracy;
      h.best_epoch = epoch;
      result.params = params;
    } else if (epoch - h.best_epoch >= cfg.patience) {
      break;
    }

    bias1 *= cfg.beta1;
    bias2 *= cfg.beta2;
    for (std::size_t t = 0; t < named.size(); ++t) {
      Matrix& p = *named[t].second;
      const Matrix grad = grads[t] + cfg.weight_decay * p;
      m1[t] = cfg.beta1 * m1[t] + (1.0 - cfg.beta1) * grad;
      m2[t] = cfg.beta2 * m2[t] + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
      const double step = cfg.lr / (1.0 - bias1);
      const double denom_scale = 1.0 / std::sqrt(1.0 - bias2);
      p.array() -= step * m1[t].array() / (m2[t].array().sqrt() * denom_scale + cfg.eps);
    }
  }
  h.snapshot_id = ParamsFingerprint(result.params);
  return result;
}

std::vector<GradientCheckEntry> CheckGradients(const ForwardInputs& in, const ModelParams& params,
                                               const std::vector<int>& labels, const Mask& mask,
                                               double step, double floor) {
  const LossAndGrad analytic = ComputeLossAndGrad(in, params, labels, mask);
  ModelParams probe = params;
  auto named = probe.named();
  std::vector<GradientCheckEntry> out;
  for (std::size_t t = 0; t < named.size(); ++t) {
    Matrix& m = *named[t].second;
    GradientCheckEntry entry;
    entry.tensor = named[t].first;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double saved = m.data()[i];
      m.data()[i] = saved + step;
      const double up = ForwardBackward(in, probe, labels, mask, nullptr, nullptr);
      m.data()[i] = saved - step;
      const double down = ForwardBackward(in, probe, labels, mask, nullptr, nullptr);
      m.data()[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double a = analytic.grads[t].data()[i];
      const double abs_err = std::abs(a - fd);
      const double rel = abs_err / std::max({std::abs(a), std::abs(fd), floor});
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
    }
    out.push_back(entry);
  }
  return out;
}

std::string HistoryToJsonLines(const TrainHistory& history) {
  std::string out;
  for (const EpochRecord& r : history.epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["val_accuracy"] = r.val_accuracy;
    j["val_delta_sp"] = OptionalJson(r.val_delta_sp);
    j["val_delta_eo"] = OptionalJson(r.val_delta_eo);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string HistorySummaryJson(const TrainHistory& history) {
  nlohmann::ordered_json j;
  j["epochs_run"] = history.epochs.size();
  j["best_epoch"] = history.best_epoch;
  j["snapshot_id"] = history.snapshot_id;
  j["diverged"] = history.diverged;
  if (history.diverged) j["divergence"] = history.divergence;
  if (!history.epochs.empty()) {
    j["initial_loss"] = history.epochs.front().train_loss;
    j["best_val_accuracy"] = history.epochs[history.best_epoch].val_accuracy;
  }
  return j.dump();
}

}  // namespace fairspectral
