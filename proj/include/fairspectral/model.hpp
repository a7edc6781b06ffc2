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

#include "fairspectral/autodiff.hpp"
#include "fairspectral/common.hpp"
#include "fairspectral/eigensolver.hpp"
#include "fairspectral/graph.hpp"

namespace fairspectral {

enum class ModelKind {
  kFugnn,     // spectral modulation of a truncated eigenbasis
  kBaseline,  // personalized-propagation baseline on the full operator
};

const char* ModelKindName(ModelKind kind);
ModelKind ParseModelKind(const std::string& name);

struct ModelConfig {
  ModelKind kind = ModelKind::kFugnn;
  std::size_t input_dim = 0;
  std::size_t width = 16;
  std::size_t layers = 2;
  std::size_t d_e = 32;
  std::size_t heads = 4;
  std::size_t d_ff = 0;  // 0 means 4 * d_e
  double ln_eps = 1e-5;
  double theta = 0.1;
  std::size_t propagation_steps = 10;
  std::uint64_t seed = 0;

  std::size_t ffn_width() const { return d_ff == 0 ? 4 * d_e : d_ff; }
  void validate() const;
};

// Attention block over eigenvalue tokens. Bias and norm vectors are stored
// as 1 x width rows.
template <class T>
struct OedTensors {
  T wq, wk, wv, wo;
  T ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;
  T ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  T proj_w, proj_b;

  template <class F>
  void ForEach(F&& f) {
    f("oed.wq", wq);
    f("oed.wk", wk);
    f("oed.wv", wv);
    f("oed.wo", wo);
    f("oed.ln1_gamma", ln1_gamma);
    f("oed.ln1_beta", ln1_beta);
    f("oed.ln2_gamma", ln2_gamma);
    f("oed.ln2_beta", ln2_beta);
    f("oed.ffn_w1", ffn_w1);
    f("oed.ffn_b1", ffn_b1);
    f("oed.ffn_w2", ffn_w2);
    f("oed.ffn_b2", ffn_b2);
    f("oed.proj_w", proj_w);
    f("oed.proj_b", proj_b);
  }
};

template <class T>
struct ConvTensors {
  T input_w, input_b;
  std::vector<T> layers;  // (2 * width) x width each
  T classifier_w, classifier_b;

  template <class F>
  void ForEach(F&& f) {
    f("conv.input_w", input_w);
    f("conv.input_b", input_b);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      f("conv.layer" + std::to_string(l), layers[l]);
    }
    f("conv.classifier_w", classifier_w);
    f("conv.classifier_b", classifier_b);
  }
};

template <class T>
struct ModelTensors {
  OedTensors<T> oed;  // empty for the baseline
  ConvTensors<T> conv;

  // Visits every tensor the model kind actually uses, in a fixed order.
  template <class F>
  void ForEach(ModelKind kind, F&& f) {
    if (kind == ModelKind::kFugnn) oed.ForEach(f);
    conv.ForEach(f);
  }
};

struct ModelParams {
  ModelConfig config;
  ModelTensors<Matrix> tensors;

  std::vector<std::pair<std::string, Matrix*>> named();
  std::vector<std::pair<std::string, const Matrix*>> named() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
};

using ParamVars = ModelTensors<ad::Var>;

// Glorot-uniform weights, unit norm scales, zero biases; seeded.
ModelParams InitParams(const ModelConfig& config);

// Puts every tensor on the tape, as leaves when `track` and constants
// otherwise.
ParamVars BindParams(ad::Tape& tape, const ModelParams& params, bool track);

// K x d_e; dimension 2i holds sin(lambda / 10000^(2i/d_e)), dimension 2i+1
// the matching cosine.
Matrix SinusoidalEncode(const Vector& eigenvalues, std::size_t d_e);

// Pre-norm attention and feed-forward with residuals, then a d_e -> 1
// projection per token. Returns a K x 1 modulation column.
ad::Var OedForward(ad::Tape& tape, const Matrix& e_pos, const OedTensors<ad::Var>& p,
                   std::size_t heads, double ln_eps);
Vector OedForward(const Matrix& e_pos, const ModelParams& params);

// P diag(e) P^T H.
Matrix SpectralTransform(const Matrix& p, const Vector& e, const Matrix& h);
ad::Var SpectralTransform(const Matrix& p, ad::Var e, ad::Var h);

// ReLU([H, H'] W).
Matrix FugnnLayer(const Matrix& h, const Matrix& h_prime, const Matrix& w);

// H(l) = (1 - theta) S H(l-1) + theta H(0), iterated `steps` times.
Matrix BaselinePropagate(const CsrMatrix& s, const Matrix& h0, double theta, std::size_t steps);

// What a forward pass reads besides the parameters. The FUGNN path needs
// `basis`; the baseline needs `op`. Referenced objects must outlive any tape
// built from them.
struct ForwardInputs {
  const Matrix* features = nullptr;
  const SpectralBasis* basis = nullptr;
  const CsrMatrix* op = nullptr;
};

// n x 2 logits.
ad::Var Forward(ad::Tape& tape, const ForwardInputs& in, const ModelParams& params,
                const ParamVars& vars);
Matrix Forward(const ForwardInputs& in, const ModelParams& params);

// Versioned binary container ("FSMP") holding the config and every tensor
// with its shape, plus a JSON rendering for inspection.
void SaveParams(const ModelParams& params, const std::filesystem::path& path);
ModelParams LoadParams(const std::filesystem::path& path);
std::string ParamsToJson(const ModelParams& params, bool include_values);
// FNV-1a over the config and tensor bytes, as 16 hex digits.
std::string ParamsFingerprint(const ModelParams& params);

}  // namespace fairspectral
