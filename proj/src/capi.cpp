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

#include "fairspectral/fairspectral.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "fairspectral/eigensolver.hpp"
#include "fairspectral/graph.hpp"
#include "fairspectral/lemma_lab.hpp"
#include "fairspectral/metrics.hpp"
#include "fairspectral/model.hpp"
#include "fairspectral/pipeline.hpp"
#include "fairspectral/trainer.hpp"
#include "json.hpp"

struct fs_graph {
  fairspectral::Graph graph;
};

struct fs_basis {
  fairspectral::SpectralBasis basis;
};

struct fs_model {
  fairspectral::ModelParams params;
  fairspectral::OperatorMode mode = fairspectral::OperatorMode::kSymNormalized;
};

namespace {

using nlohmann::json;
namespace fsp = fairspectral;

thread_local std::string g_last_error;

fs_status StatusFor(fsp::ErrorKind kind) {
  switch (kind) {
    case fsp::ErrorKind::kInvalidArgument:
      return FS_ERR_INVALID_ARGUMENT;
    case fsp::ErrorKind::kIo:
      return FS_ERR_IO;
    case fsp::ErrorKind::kNumerical:
      return FS_ERR_NUMERICAL;
    case fsp::ErrorKind::kNoConvergence:
      return FS_ERR_NO_CONVERGENCE;
    case fsp::ErrorKind::kLimitExceeded:
      return FS_ERR_LIMIT_EXCEEDED;
  }
  return FS_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into a status and the thread-local
// message.
template <class F>
fs_status Guard(F&& body) {
  g_last_error.clear();
  try {
    body();
    return FS_OK;
  } catch (const fsp::NoConvergence& e) {
    g_last_error = e.what();
    return FS_ERR_NO_CONVERGENCE;
  } catch (const fsp::Error& e) {
    g_last_error = e.what();
    return StatusFor(e.kind());
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON: ") + e.what();
    return FS_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FS_ERR_LIMIT_EXCEEDED;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FS_ERR_INTERNAL;
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw fsp::InvalidArgument(what);
}

char* Duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json ParseParams(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text);
  Require(j.is_object(), "parameters must be a JSON object");
  return j;
}

// Reads `key` from `j` when present, rejecting anything outside `allowed`.
class Params {
 public:
  Params(json j, std::initializer_list<const char*> allowed) : j_(std::move(j)) {
    for (const auto& [key, value] : j_.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) throw fsp::InvalidArgument("unknown parameter '" + key + "'");
    }
  }

  template <class T>
  T get(const char* key, T fallback) const {
    return j_.contains(key) ? j_.at(key).get<T>() : fallback;
  }

 private:
  json j_;
};

fsp::OperatorMode ModeFor(fs_operator op) {
  switch (op) {
    case FS_OPERATOR_SYM_NORMALIZED:
      return fsp::OperatorMode::kSymNormalized;
    case FS_OPERATOR_RAW:
      return fsp::OperatorMode::kRawAdjacency;
  }
  throw fsp::InvalidArgument("unknown operator");
}

fsp::EigenMethod MethodFor(fs_eig_method m) {
  switch (m) {
    case FS_EIG_AUTO:
      return fsp::EigenMethod::kAuto;
    case FS_EIG_LANCZOS:
      return fsp::EigenMethod::kLanczos;
    case FS_EIG_DENSE:
      return fsp::EigenMethod::kDense;
  }
  throw fsp::InvalidArgument("unknown eigen method");
}

fsp::ExperimentConfig ParseExperiment(const char* text) {
  const Params p(ParseParams(text),
                 {"model", "width", "layers", "d_e", "heads", "d_ff", "ln_eps", "theta",
                  "propagation_steps", "epochs", "lr", "weight_decay", "patience", "operator",
                  "fixed_splits"});
  fsp::ExperimentConfig cfg;
  fsp::ModelConfig& m = cfg.model;
  m.kind = fsp::ParseModelKind(p.get<std::string>("model", fsp::ModelKindName(m.kind)));
  m.width = p.get<std::size_t>("width", m.width);
  m.layers = p.get<std::size_t>("layers", m.layers);
  m.d_e = p.get<std::size_t>("d_e", m.d_e);
  m.heads = p.get<std::size_t>("heads", m.heads);
  m.d_ff = p.get<std::size_t>("d_ff", m.d_ff);
  m.ln_eps = p.get<double>("ln_eps", m.ln_eps);
  m.theta = p.get<double>("theta", m.theta);
  m.propagation_steps = p.get<std::size_t>("propagation_steps", m.propagation_steps);
  fsp::TrainConfig& t = cfg.train;
  t.epochs = p.get<std::size_t>("epochs", t.epochs);
  t.lr = p.get<double>("lr", t.lr);
  t.weight_decay = p.get<double>("weight_decay", t.weight_decay);
  t.patience = p.get<std::size_t>("patience", t.patience);
  cfg.mode = fsp::ParseOperatorMode(p.get<std::string>("operator", fsp::OperatorModeName(cfg.mode)));
  cfg.fixed_splits = p.get<bool>("fixed_splits", false);
  return cfg;
}

}  // namespace

extern "C" {

const char* fs_version(void) { return "0.1.0"; }

const char* fs_last_error(void) { return g_last_error.c_str(); }

const char* fs_status_name(fs_status status) {
  switch (status) {
    case FS_OK:
      return "ok";
    case FS_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case FS_ERR_IO:
      return "i/o error";
    case FS_ERR_NUMERICAL:
      return "numerical failure";
    case FS_ERR_NO_CONVERGENCE:
      return "no convergence";
    case FS_ERR_LIMIT_EXCEEDED:
      return "limit exceeded";
    case FS_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void fs_string_free(char* s) { std::free(s); }

fs_sbm_config fs_sbm_config_default(void) {
  const fsp::SbmConfig d;
  return fs_sbm_config{d.n,        d.p_in,     d.p_out,       d.sensitive_homophily, d.label_bias,
                       d.d,        d.noise_sd, d.proxy_shift, d.seed};
}

fs_status fs_graph_generate_sbm(const fs_sbm_config* cfg, fs_graph** out) {
  return Guard([&] {
    Require(cfg != nullptr && out != nullptr, "null argument");
    fsp::SbmConfig c;
    c.n = cfg->n;
    c.p_in = cfg->p_in;
    c.p_out = cfg->p_out;
    c.sensitive_homophily = cfg->sensitive_homophily;
    c.label_bias = cfg->label_bias;
    c.d = cfg->d;
    c.noise_sd = cfg->noise_sd;
    c.proxy_shift = cfg->proxy_shift;
    c.seed = cfg->seed;
    *out = new fs_graph{fsp::GenerateSbm(c)};
  });
}

fs_status fs_graph_load(const char* edge_list, const char* node_table,
                        const char* sensitive_column, const char* label_column, fs_graph** out) {
  return Guard([&] {
    Require(edge_list && node_table && sensitive_column && label_column && out, "null argument");
    *out = new fs_graph{fsp::LoadGraph(edge_list, node_table, sensitive_column, label_column)};
  });
}

fs_status fs_graph_save(const fs_graph* g, const char* edge_list, const char* node_table) {
  return Guard([&] {
    Require(g && edge_list && node_table, "null argument");
    fsp::SaveGraph(g->graph, edge_list, node_table);
  });
}

fs_status fs_graph_make_splits(fs_graph* g, uint64_t seed) {
  return Guard([&] {
    Require(g != nullptr, "null argument");
    g->graph.masks = fsp::MakeSplits(g->graph, seed);
  });
}

fs_status fs_graph_save_splits(const fs_graph* g, const char* path) {
  return Guard([&] {
    Require(g && path, "null argument");
    fsp::SaveSplits(g->graph.masks, path);
  });
}

fs_status fs_graph_load_splits(fs_graph* g, const char* path) {
  return Guard([&] {
    Require(g && path, "null argument");
    g->graph.masks = fsp::LoadSplits(path, g->graph.n);
  });
}

fs_status fs_graph_info_json(const fs_graph* g, char** out_json) {
  return Guard([&] {
    Require(g && out_json, "null argument");
    const fsp::Graph& gr = g->graph;
    auto count = [](const fsp::Mask& m) {
      std::size_t c = 0;
      for (bool b : m) c += b ? 1 : 0;
      return c;
    };
    std::size_t positives = 0;
    std::size_t ones = 0;
    for (std::size_t i = 0; i < gr.n; ++i) {
      positives += gr.labels[i] == 1 ? 1 : 0;
      ones += gr.sensitive[i] == 1 ? 1 : 0;
    }
    nlohmann::ordered_json j;
    j["n"] = gr.n;
    j["undirected_edges"] = gr.undirected_edges();
    j["stored_entries"] = gr.stored_entries();
    j["features"] = gr.feature_dim();
    j["sensitive"] = gr.sensitive_name;
    j["positive_labels"] = positives;
    j["sensitive_ones"] = ones;
    j["split_sizes"] = {{"train", count(gr.masks.train)},
                        {"val", count(gr.masks.val)},
                        {"test", count(gr.masks.test)}};
    *out_json = Duplicate(j.dump());
  });
}

void fs_graph_free(fs_graph* g) { delete g; }

fs_eig_options fs_eig_options_default(void) {
  const fsp::BasisOptions d;
  return fs_eig_options{d.k,    d.tol,         d.max_iter, d.seed, FS_OPERATOR_SYM_NORMALIZED,
                        FS_EIG_AUTO, d.dense_limit};
}

fs_status fs_basis_compute(const fs_graph* g, const fs_eig_options* opts, fs_basis** out) {
  return Guard([&] {
    Require(g && opts && out, "null argument");
    fsp::BasisOptions o;
    o.k = opts->k;
    o.tol = opts->tol;
    o.max_iter = opts->max_iter;
    o.seed = opts->seed;
    o.method = MethodFor(opts->method);
    o.dense_limit = opts->dense_limit;
    const fsp::NormalizedOperator op = fsp::Normalize(g->graph, ModeFor(opts->op));
    *out = new fs_basis{fsp::ComputeBasis(op, o)};
  });
}

fs_status fs_basis_truncate(const fs_basis* b, size_t k, fs_basis** out) {
  return Guard([&] {
    Require(b && out, "null argument");
    Require(k >= 1 && k <= b->basis.k(), "truncation size must lie in [1, K]");
    const auto kk = static_cast<Eigen::Index>(k);
    fsp::SpectralBasis t;
    t.eigenvalues = b->basis.eigenvalues.head(kk);
    t.eigenvectors = b->basis.eigenvectors.leftCols(kk);
    t.residuals = b->basis.residuals.head(kk);
    t.mode = b->basis.mode;
    *out = new fs_basis{std::move(t)};
  });
}

fs_status fs_basis_save(const fs_basis* b, const char* path) {
  return Guard([&] {
    Require(b && path, "null argument");
    fsp::WriteBasisBinary(b->basis, path);
  });
}

fs_status fs_basis_load(const char* path, fs_basis** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = new fs_basis{fsp::ReadBasisBinary(path)};
  });
}

fs_status fs_basis_json(const fs_basis* b, int include_vectors, char** out_json) {
  return Guard([&] {
    Require(b && out_json, "null argument");
    *out_json = Duplicate(fsp::BasisToJson(b->basis, include_vectors != 0));
  });
}

size_t fs_basis_n(const fs_basis* b) { return b ? b->basis.n() : 0; }
size_t fs_basis_k(const fs_basis* b) { return b ? b->basis.k() : 0; }
const double* fs_basis_eigenvalues(const fs_basis* b) {
  return b ? b->basis.eigenvalues.data() : nullptr;
}
const double* fs_basis_eigenvectors(const fs_basis* b) {
  return b ? b->basis.eigenvectors.data() : nullptr;
}

fs_status fs_basis_compare(const fs_basis* a, const fs_basis* b, double* max_rel_diff,
                           double* max_angle) {
  return Guard([&] {
    Require(a && b && max_rel_diff && max_angle, "null argument");
    Require(a->basis.n() == b->basis.n() && a->basis.k() == b->basis.k(),
            "bases differ in shape");
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a->basis.eigenvalues.size(); ++i) {
      const double x = a->basis.eigenvalues(i);
      const double y = b->basis.eigenvalues(i);
      worst = std::max(worst, std::abs(x - y) / std::max(std::abs(y), 1e-300));
    }
    *max_rel_diff = worst;
    *max_angle = fsp::SubspaceAngle(a->basis.eigenvectors, b->basis.eigenvectors);
  });
}

void fs_basis_free(fs_basis* b) { delete b; }

fs_status fs_lemma_verify(int lemma, const char* params_json, char** out_report_json) {
  return Guard([&] {
    Require(out_report_json != nullptr, "null argument");
    const json raw = ParseParams(params_json);
    fsp::LemmaReport r;
    switch (lemma) {
      case 1: {
        const Params p(raw, {"n", "seed", "l_max", "gap_min", "even_only", "tolerance"});
        fsp::Lemma1Options o;
        o.even_only = p.get<bool>("even_only", false);
        o.tolerance = p.get<double>("tolerance", o.tolerance);
        r = fsp::VerifyLemma1(p.get<std::size_t>("n", 100), p.get<double>("gap_min", 1.5),
                              p.get<std::size_t>("l_max", 200), p.get<std::uint64_t>("seed", 0), o);
        break;
      }
      case 2: {
        const Params p(raw, {"n", "seed", "l_max", "j", "equal_alpha"});
        r = fsp::VerifyLemma2(p.get<std::size_t>("n", 100), p.get<std::size_t>("j", 2),
                              p.get<std::size_t>("l_max", 200), p.get<std::uint64_t>("seed", 0),
                              p.get<bool>("equal_alpha", false));
        break;
      }
      case 3: {
        const Params p(raw, {"n", "seed", "index", "l_values"});
        std::vector<std::size_t> ls;
        for (std::size_t l = 0; l <= 30; ++l) ls.push_back(l);
        r = fsp::VerifyLemma3(p.get<std::size_t>("n", 80), p.get("l_values", ls),
                              p.get<std::uint64_t>("seed", 0), p.get<std::size_t>("index", 2));
        break;
      }
      default:
        throw fsp::InvalidArgument("lemma must be 1, 2 or 3");
    }
    *out_report_json = Duplicate(fsp::LemmaReportToJson(r));
  });
}

fs_status fs_train(const fs_graph* g, const fs_basis* basis, const char* config_json,
                   const uint64_t* seeds, size_t num_seeds, char** out_report_json,
                   fs_model** out_model, char** out_history_jsonl) {
  return Guard([&] {
    Require(g && out_report_json, "null argument");
    Require(seeds != nullptr && num_seeds > 0, "at least one seed is required");
    const fsp::ExperimentConfig cfg = ParseExperiment(config_json);
    const fsp::SpectralBasis* b = basis ? &basis->basis : nullptr;
    if (cfg.model.kind == fsp::ModelKind::kFugnn) {
      Require(b != nullptr, "the fugnn model needs a spectral basis");
      Require(b->n() == g->graph.n, "basis and graph disagree on n");
    }
    const fsp::NormalizedOperator op = fsp::Normalize(g->graph, cfg.mode);
    std::vector<fsp::RunResult> runs;
    for (std::size_t i = 0; i < num_seeds; ++i) {
      runs.push_back(fsp::RunSeed(g->graph, op, b, cfg, seeds[i]));
    }
    // Collect the outputs before handing anything back so a late failure
    // does not leak.
    std::string history = fsp::HistoryToJsonLines(runs.front().history);
    fsp::ModelParams first = runs.front().params;
    const std::string report = fsp::MultiSeedReportToJson(fsp::Summarize(std::move(runs)));
    *out_report_json = Duplicate(report);
    if (out_history_jsonl != nullptr) *out_history_jsonl = Duplicate(history);
    if (out_model != nullptr) *out_model = new fs_model{std::move(first), cfg.mode};
  });
}

fs_status fs_evaluate(const fs_graph* g, const fs_basis* basis, const fs_model* model,
                      const char* split, char** out_report_json) {
  return Guard([&] {
    Require(g && model && split && out_report_json, "null argument");
    fsp::Split s;
    const std::string name = split;
    if (name == "train") {
      s = fsp::Split::kTrain;
    } else if (name == "val") {
      s = fsp::Split::kVal;
    } else if (name == "test") {
      s = fsp::Split::kTest;
    } else {
      throw fsp::InvalidArgument("split must be train, val or test");
    }
    const fsp::NormalizedOperator op = fsp::Normalize(g->graph, model->mode);
    fsp::ForwardInputs in;
    in.features = &g->graph.features;
    in.basis = basis ? &basis->basis : nullptr;
    in.op = &op.matrix;
    const auto pred = fsp::Predict(fsp::Forward(in, model->params));
    *out_report_json = Duplicate(fsp::FairnessReportToJson(fsp::Evaluate(pred, g->graph, s)));
  });
}

fs_status fs_model_save(const fs_model* m, const char* path) {
  return Guard([&] {
    Require(m && path, "null argument");
    fsp::SaveParams(m->params, path);
  });
}

fs_status fs_model_load(const char* path, fs_model** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = new fs_model{fsp::LoadParams(path), fsp::OperatorMode::kSymNormalized};
  });
}

fs_status fs_model_json(const fs_model* m, int include_values, char** out_json) {
  return Guard([&] {
    Require(m && out_json, "null argument");
    *out_json = Duplicate(fsp::ParamsToJson(m->params, include_values != 0));
  });
}

void fs_model_free(fs_model* m) { delete m; }

}  // extern "C"
