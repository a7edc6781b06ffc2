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

#include "fairspectral/model.hpp"

#include <cmath>
#include <random>

namespace fairspectral {
namespace {

Matrix Glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> unif(-a, a);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = unif(rng);
  }
  return m;
}

void RequireInputs(const ForwardInputs& in, const ModelParams& params) {
  if (in.features == nullptr) throw InvalidArgument("forward: features missing");
  const ModelConfig& cfg = params.config;
  if (static_cast<std::size_t>(in.features->cols()) != cfg.input_dim) {
    throw InvalidArgument("forward: feature width " + std::to_string(in.features->cols()) +
                          " does not match the model input " + std::to_string(cfg.input_dim));
  }
  if (cfg.kind == ModelKind::kFugnn && cfg.layers > 0) {
    if (in.basis == nullptr) throw InvalidArgument("forward: spectral basis missing");
    if (in.basis->eigenvectors.rows() != in.features->rows()) {
      throw InvalidArgument("forward: basis and features disagree on n");
    }
  }
  if (cfg.kind == ModelKind::kBaseline && cfg.propagation_steps > 0) {
    if (in.op == nullptr) throw InvalidArgument("forward: propagation operator missing");
    if (in.op->rows != static_cast<std::size_t>(in.features->rows())) {
      throw InvalidArgument("forward: operator and features disagree on n");
    }
  }
}

ad::Var Linear(ad::Var x, ad::Var w, ad::Var b) { return ad::AddRowVector(ad::MatMul(x, w), b); }

}  // namespace

const char* ModelKindName(ModelKind kind) {
  return kind == ModelKind::kFugnn ? "fugnn" : "baseline";
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "fugnn") return ModelKind::kFugnn;
  if (name == "baseline") return ModelKind::kBaseline;
  throw InvalidArgument("unknown model kind '" + name + "' (expected fugnn or baseline)");
}

void ModelConfig::validate() const {
  if (input_dim == 0) throw InvalidArgument("model: input_dim must be positive");
  if (width == 0) throw InvalidArgument("model: width must be positive");
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("model: theta must lie in (0, 1)");
  if (kind == ModelKind::kFugnn) {
    if (d_e == 0 || d_e % 2 != 0) throw InvalidArgument("model: d_e must be even and positive");
    if (heads == 0 || d_e % heads != 0) throw InvalidArgument("model: heads must divide d_e");
    if (!(ln_eps > 0.0)) throw InvalidArgument("model: ln_eps must be positive");
  }
}

std::vector<std::pair<std::string, Matrix*>> ModelParams::named() {
  std::vector<std::pair<std::string, Matrix*>> out;
  tensors.ForEach(config.kind, [&](const std::string& name, Matrix& m) { out.emplace_back(name, &m); });
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::named() const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  for (auto& [name, m] : const_cast<ModelParams*>(this)->named()) out.emplace_back(name, m);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t total = 0;
  for (const auto& [name, m] : named()) total += static_cast<std::size_t>(m->size());
  return total;
}

bool ModelParams::all_finite() const {
  for (const auto& [name, m] : named()) {
    if (!m->allFinite()) return false;
  }
  return true;
}

ModelParams InitParams(const ModelConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const auto d = static_cast<Eigen::Index>(config.input_dim);
  const auto w = static_cast<Eigen::Index>(config.width);
  ModelParams p;
  p.config = config;

  if (config.kind == ModelKind::kFugnn) {
    const auto de = static_cast<Eigen::Index>(config.d_e);
    const auto ff = static_cast<Eigen::Index>(config.ffn_width());
    OedTensors<Matrix>& o = p.tensors.oed;
    o.wq = Glorot(de, de, rng);
    o.wk = Glorot(de, de, rng);
    o.wv = Glorot(de, de, rng);
    o.wo = Glorot(de, de, rng);
    o.ln1_gamma = Matrix::Ones(1, de);
    o.ln1_beta = Matrix::Zero(1, de);
    o.ln2_gamma = Matrix::Ones(1, de);
    o.ln2_beta = Matrix::Zero(1, de);
    o.ffn_w1 = Glorot(de, ff, rng);
    o.ffn_b1 = Matrix::Zero(1, ff);
    o.ffn_w2 = Glorot(ff, de, rng);
    o.ffn_b2 = Matrix::Zero(1, de);
    o.proj_w = Glorot(de, 1, rng);
    o.proj_b = Matrix::Zero(1, 1);
  }
  ConvTensors<Matrix>& c = p.tensors.conv;
  c.input_w = Glorot(d, w, rng);
  c.input_b = Matrix::Zero(1, w);
  if (config.kind == ModelKind::kFugnn) {
    for (std::size_t l = 0; l < config.layers; ++l) c.layers.push_back(Glorot(2 * w, w, rng));
  }
  c.classifier_w = Glorot(w, 2, rng);
  c.classifier_b = Matrix::Zero(1, 2);
  return p;
}

ParamVars BindParams(ad::Tape& tape, const ModelParams& params, bool track) {
  ParamVars vars;
  vars.conv.layers.resize(params.tensors.conv.layers.size());
  auto& mutable_params = const_cast<ModelParams&>(params);
  std::vector<Matrix*> sources;
  mutable_params.tensors.ForEach(params.config.kind,
                                 [&](const std::string&, Matrix& m) { sources.push_back(&m); });
  std::size_t at = 0;
  vars.ForEach(params.config.kind, [&](const std::string&, ad::Var& v) {
    v = track ? tape.Leaf(*sources[at]) : tape.Constant(*sources[at]);
    ++at;
  });
  return vars;
}

Matrix SinusoidalEncode(const Vector& eigenvalues, std::size_t d_e) {
  if (d_e == 0 || d_e % 2 != 0) throw InvalidArgument("sinusoidal encoding: d_e must be even");
  const auto k = eigenvalues.size();
  Matrix e(k, static_cast<Eigen::Index>(d_e));
  for (std::size_t i = 0; i < d_e / 2; ++i) {
    const double freq = std::pow(10000.0, 2.0 * static_cast<double>(i) / static_cast<double>(d_e));
    for (Eigen::Index r = 0; r < k; ++r) {
      e(r, static_cast<Eigen::Index>(2 * i)) = std::sin(eigenvalues(r) / freq);
      e(r, static_cast<Eigen::Index>(2 * i + 1)) = std::cos(eigenvalues(r) / freq);
    }
  }
  return e;
}

ad::Var OedForward(ad::Tape& tape, const Matrix& e_pos, const OedTensors<ad::Var>& p,
                   std::size_t heads, double ln_eps) {
  const Eigen::Index d_e = e_pos.cols();
  if (p.wq.rows() != d_e) throw InvalidArgument("oed: encoding width does not match parameters");
  const Eigen::Index dh = d_e / static_cast<Eigen::Index>(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const ad::Var e = tape.Constant(e_pos);
  const ad::Var x = ad::LayerNormRows(e, p.ln1_gamma, p.ln1_beta, ln_eps);
  const ad::Var q = ad::MatMul(x, p.wq);
  const ad::Var k = ad::MatMul(x, p.wk);
  const ad::Var v = ad::MatMul(x, p.wv);
  std::vector<ad::Var> outs;
  for (Eigen::Index h = 0; h < static_cast<Eigen::Index>(heads); ++h) {
    // Scaling the K x dh slice is cheaper than scaling the K x K scores.
    const ad::Var qh = ad::Scale(ad::SliceCols(q, h * dh, dh), scale);
    const ad::Var kh = ad::SliceCols(k, h * dh, dh);
    const ad::Var vh = ad::SliceCols(v, h * dh, dh);
    const ad::Var att = ad::SoftmaxRows(ad::MatMul(qh, ad::Transpose(kh)));
    outs.push_back(ad::MatMul(att, vh));
  }
  const ad::Var mha = ad::Add(ad::MatMul(ad::ConcatCols(outs), p.wo), e);
  const ad::Var hidden =
      ad::Relu(Linear(ad::LayerNormRows(mha, p.ln2_gamma, p.ln2_beta, ln_eps), p.ffn_w1, p.ffn_b1));
  const ad::Var oed = ad::Add(Linear(hidden, p.ffn_w2, p.ffn_b2), mha);
  return Linear(oed, p.proj_w, p.proj_b);
}

Vector OedForward(const Matrix& e_pos, const ModelParams& params) {
  if (params.config.kind != ModelKind::kFugnn) throw InvalidArgument("oed: baseline has no OED block");
  ad::Tape tape;
  const ParamVars vars = BindParams(tape, params, false);
  Vector e = OedForward(tape, e_pos, vars.oed, params.config.heads, params.config.ln_eps).value().col(0);
  if (!e.allFinite()) throw NumericalError("oed: non-finite modulation");
  return e;
}

Matrix SpectralTransform(const Matrix& p, const Vector& e, const Matrix& h) {
  if (p.cols() != e.size() || p.rows() != h.rows()) {
    throw InvalidArgument("spectral transform: shape mismatch");
  }
  const Matrix coeff = e.asDiagonal() * (p.transpose() * h);
  return p * coeff;
}

ad::Var SpectralTransform(const Matrix& p, ad::Var e, ad::Var h) {
  return ad::MatMul(p, ad::ScaleRows(ad::MatMulTransposed(p, h), e));
}

Matrix FugnnLayer(const Matrix& h, const Matrix& h_prime, const Matrix& w) {
  if (h.rows() != h_prime.rows() || h.cols() + h_prime.cols() != w.rows()) {
    throw InvalidArgument("fugnn layer: shape mismatch");
  }
  Matrix cat(h.rows(), h.cols() + h_prime.cols());
  cat << h, h_prime;
  return (cat * w).cwiseMax(0.0);
}

Matrix BaselinePropagate(const CsrMatrix& s, const Matrix& h0, double theta, std::size_t steps) {
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("propagation: theta must lie in (0, 1)");
  if (s.cols != static_cast<std::size_t>(h0.rows())) throw InvalidArgument("propagation: shape mismatch");
  Matrix h = h0;
  for (std::size_t l = 0; l < steps; ++l) h = (1.0 - theta) * s.multiply(h) + theta * h0;
  return h;
}

ad::Var Forward(ad::Tape& tape, const ForwardInputs& in, const ModelParams& params,
                const ParamVars& vars) {
  RequireInputs(in, params);
  const ModelConfig& cfg = params.config;
  const ConvTensors<ad::Var>& c = vars.conv;
  ad::Var h = ad::AddRowVector(ad::MatMul(*in.features, c.input_w), c.input_b);

  if (cfg.kind == ModelKind::kFugnn) {
    if (!c.layers.empty()) {
      const Matrix e_pos = SinusoidalEncode(in.basis->eigenvalues, cfg.d_e);
      const ad::Var e = OedForward(tape, e_pos, vars.oed, cfg.heads, cfg.ln_eps);
      for (const ad::Var& w : c.layers) {
        const ad::Var h_prime = SpectralTransform(in.basis->eigenvectors, e, h);
        h = ad::Relu(ad::MatMul(ad::ConcatCols(h, h_prime), w));
      }
    }
  } else {
    const ad::Var h0 = h;
    for (std::size_t l = 0; l < cfg.propagation_steps; ++l) {
      h = ad::Add(ad::Scale(ad::SpMatMul(*in.op, h), 1.0 - cfg.theta), ad::Scale(h0, cfg.theta));
    }
  }
  return ad::AddRowVector(ad::MatMul(h, c.classifier_w), c.classifier_b);
}

Matrix Forward(const ForwardInputs& in, const ModelParams& params) {
  ad::Tape tape;
  const ParamVars vars = BindParams(tape, params, false);
  Matrix logits = Forward(tape, in, params, vars).value();
  if (!logits.allFinite()) throw NumericalError("forward: non-finite logits");
  return logits;
}

}  // namespace fairspectral
