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

// fairspectral command-line front end. Everything numerical goes through
// the C API in fairspectral.h.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairspectral/fairspectral.h"
#include "json.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using fairspectral::cli::ConfigError;
using fairspectral::cli::RunConfig;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kVerification = 3 };

class LibraryError : public std::runtime_error {
 public:
  LibraryError(fs_status status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  fs_status status() const { return status_; }

 private:
  fs_status status_;
};

void Check(fs_status st, const std::string& what) {
  if (st != FS_OK) {
    throw LibraryError(st, what + ": " + fs_status_name(st) + ": " + fs_last_error());
  }
}

int ExitCodeFor(fs_status st) {
  return st == FS_ERR_INVALID_ARGUMENT || st == FS_ERR_IO ? kUsage : kNumerical;
}

struct GraphDeleter {
  void operator()(fs_graph* g) const { fs_graph_free(g); }
};
struct BasisDeleter {
  void operator()(fs_basis* b) const { fs_basis_free(b); }
};
struct ModelDeleter {
  void operator()(fs_model* m) const { fs_model_free(m); }
};
using GraphPtr = std::unique_ptr<fs_graph, GraphDeleter>;
using BasisPtr = std::unique_ptr<fs_basis, BasisDeleter>;
using ModelPtr = std::unique_ptr<fs_model, ModelDeleter>;

std::string Take(char* s) {
  std::string out = s == nullptr ? "" : s;
  fs_string_free(s);
  return out;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw LibraryError(FS_ERR_IO, "cannot write " + path.string());
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string Percent(const json& v) {
  if (v.is_null()) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v.get<double>());
  return buf;
}

std::string MeanSd(const json& agg) {
  std::string s = Percent(agg.at("mean")) + " +- " + Percent(agg.at("sd"));
  const auto skipped = agg.at("skipped_undefined").get<std::size_t>();
  if (skipped > 0) s += " (" + std::to_string(skipped) + " undefined)";
  return s;
}

// Left-aligned first column, right-aligned rest.
std::string RenderTable(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      const std::string pad(width[c] - r[c].size(), ' ');
      out << (c == 0 ? r[c] + pad : "  " + pad + r[c]);
    }
    out << '\n';
  }
  return out.str();
}

fs_sbm_config SbmFrom(const RunConfig& cfg) {
  fs_sbm_config s = fs_sbm_config_default();
  s.n = cfg.count("sbm.n");
  s.p_in = cfg.real("sbm.p_in");
  s.p_out = cfg.real("sbm.p_out");
  s.sensitive_homophily = cfg.real("sbm.sensitive_homophily");
  s.label_bias = cfg.real("sbm.label_bias");
  s.d = cfg.count("sbm.d");
  s.noise_sd = cfg.real("sbm.noise_sd");
  s.proxy_shift = cfg.real("sbm.proxy_shift");
  s.seed = cfg.u64("sbm.seed");
  return s;
}

fs_operator OperatorFrom(const RunConfig& cfg) {
  const std::string op = cfg.str("operator");
  if (op == "sym-normalized") return FS_OPERATOR_SYM_NORMALIZED;
  if (op == "raw") return FS_OPERATOR_RAW;
  throw ConfigError("operator: expected sym-normalized or raw, got '" + op + "'");
}

fs_eig_options EigenFrom(const RunConfig& cfg) {
  fs_eig_options o = fs_eig_options_default();
  o.k = cfg.count("k");
  o.tol = cfg.real("tol");
  o.max_iter = cfg.count("max_iter");
  o.seed = cfg.u64("eig_seed");
  o.op = OperatorFrom(cfg);
  o.dense_limit = cfg.count("dense_limit");
  return o;
}

// Returns the graph and whether it carries a fixed split.
std::pair<GraphPtr, bool> LoadDataset(const RunConfig& cfg) {
  fs_graph* raw = nullptr;
  const std::string kind = cfg.str("dataset");
  if (kind == "sbm") {
    const fs_sbm_config s = SbmFrom(cfg);
    Check(fs_graph_generate_sbm(&s, &raw), "generating SBM");
  } else if (kind == "files") {
    Check(fs_graph_load(cfg.str("edges").c_str(), cfg.str("nodes").c_str(),
                        cfg.str("sensitive_column").c_str(), cfg.str("label_column").c_str(), &raw),
          "loading dataset");
  } else {
    throw ConfigError("dataset: expected sbm or files, got '" + kind + "'");
  }
  GraphPtr g(raw);
  const std::string splits = cfg.str("splits");
  if (!splits.empty()) Check(fs_graph_load_splits(g.get(), splits.c_str()), "loading splits");
  return {std::move(g), !splits.empty()};
}

ordered_json TrainJson(const RunConfig& cfg, const std::string& model, bool fixed_splits) {
  ordered_json j;
  j["model"] = model;
  for (const char* k : {"width", "layers", "d_e", "heads", "d_ff", "propagation_steps", "epochs",
                        "patience"}) {
    j[k] = cfg.count(k);
  }
  for (const char* k : {"ln_eps", "theta", "lr", "weight_decay"}) j[k] = cfg.real(k);
  j["operator"] = cfg.str("operator");
  j["fixed_splits"] = fixed_splits;
  return j;
}

std::vector<uint64_t> SeedsFrom(const RunConfig& cfg) {
  std::vector<uint64_t> seeds;
  for (std::size_t s : cfg.counts("seeds")) seeds.push_back(s);
  return seeds;
}

// ---- gen ----

int CmdGen(const RunConfig& cfg, const fs::path& dir) {
  const fs_sbm_config s = SbmFrom(cfg);
  fs_graph* raw = nullptr;
  Check(fs_graph_generate_sbm(&s, &raw), "generating SBM");
  GraphPtr g(raw);
  Check(fs_graph_make_splits(g.get(), cfg.u64("split_seed")), "drawing splits");
  const fs::path edges = dir / "edges.txt";
  const fs::path nodes = dir / "nodes.csv";
  const fs::path splits = dir / "splits.json";
  Check(fs_graph_save(g.get(), edges.c_str(), nodes.c_str()), "writing dataset");
  Check(fs_graph_save_splits(g.get(), splits.c_str()), "writing splits");

  char* info_raw = nullptr;
  Check(fs_graph_info_json(g.get(), &info_raw), "describing graph");
  const json info = json::parse(Take(info_raw));
  ordered_json meta;
  meta["name"] = "sbm";
  meta["nodes"] = info["n"];
  meta["edges"] = info["undirected_edges"];
  meta["features"] = info["features"];
  meta["sensitive"] = info["sensitive"];
  meta["label"] = "label";
  meta["positive_labels"] = info["positive_labels"];
  meta["sensitive_ones"] = info["sensitive_ones"];
  meta["split_sizes"] = info["split_sizes"];
  meta["files"] = {{"edges", "edges.txt"}, {"nodes", "nodes.csv"}, {"splits", "splits.json"}};
  WriteText(dir / "metadata.json", meta.dump(2) + "\n");

  std::cout << RenderTable({{"dataset", "nodes", "edges", "sensitive"},
                            {"sbm", info["n"].dump(), info["undirected_edges"].dump(),
                             info["sensitive"].get<std::string>()}});
  std::cout << "wrote " << dir.string() << "\n";
  return kOk;
}

// ---- eig ----

int CmdEig(const RunConfig& cfg, const fs::path& dir) {
  auto [g, fixed] = LoadDataset(cfg);
  (void)fixed;
  const std::string method = cfg.str("method");
  if (method != "fes" && method != "we" && method != "both") {
    throw ConfigError("method: expected fes, we or both");
  }
  fs_eig_options o = EigenFrom(cfg);
  ordered_json timing = ordered_json::array();
  BasisPtr fes;
  BasisPtr we;
  std::vector<std::vector<std::string>> table = {{"method", "status", "seconds"}};
  int code = kOk;

  if (method != "we") {
    o.method = FS_EIG_LANCZOS;
    fs_basis* raw = nullptr;
    const auto t0 = std::chrono::steady_clock::now();
    Check(fs_basis_compute(g.get(), &o, &raw), "FES eigensolve");
    const double secs = Seconds(t0);
    fes.reset(raw);
    Check(fs_basis_save(fes.get(), (dir / "basis_fes.fsb").c_str()), "writing basis");
    timing.push_back({{"method", "FES"}, {"status", "ok"}, {"seconds", secs}});
    table.push_back({"FES", "ok", std::to_string(secs)});
  }
  if (method != "fes") {
    o.method = FS_EIG_DENSE;
    fs_basis* raw = nullptr;
    const auto t0 = std::chrono::steady_clock::now();
    const fs_status st = fs_basis_compute(g.get(), &o, &raw);
    const double secs = Seconds(t0);
    if (st == FS_ERR_LIMIT_EXCEEDED) {
      std::cerr << "WE refused: " << fs_last_error() << "\n";
      timing.push_back({{"method", "WE"}, {"status", "refused"}, {"reason", fs_last_error()}});
      table.push_back({"WE", "refused", "-"});
      if (method == "we") code = kNumerical;
    } else {
      Check(st, "WE eigensolve");
      we.reset(raw);
      Check(fs_basis_save(we.get(), (dir / "basis_we.fsb").c_str()), "writing basis");
      timing.push_back({{"method", "WE"}, {"status", "ok"}, {"seconds", secs}});
      table.push_back({"WE", "ok", std::to_string(secs)});
    }
  }

  ordered_json record;
  record["n"] = fs_basis_n(fes ? fes.get() : we.get());
  record["k"] = o.k;
  record["operator"] = cfg.str("operator");
  record["runs"] = timing;
  const fs_basis* shown = fes ? fes.get() : we.get();
  if (shown != nullptr) {
    char* js = nullptr;
    Check(fs_basis_json(shown, fs_basis_n(shown) <= cfg.count("json_vectors_max_n"), &js),
          "rendering basis");
    WriteText(dir / "basis.json", Take(js) + "\n");
  }
  if (fes && we) {
    double rel = 0.0;
    double angle = 0.0;
    Check(fs_basis_compare(fes.get(), we.get(), &rel, &angle), "comparing bases");
    record["agreement"] = {{"max_rel_eigenvalue_diff", rel}, {"max_subspace_angle", angle}};
    std::cout << "FES vs WE: max relative eigenvalue difference " << rel
              << ", subspace angle " << angle << " rad\n";
  }
  WriteText(dir / "timing.json", record.dump(2) + "\n");
  std::cout << RenderTable(table);
  return code;
}

// ---- analyze ----

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json RunLemma(int lemma, const ordered_json& params) {
  char* out = nullptr;
  Check(fs_lemma_verify(lemma, params.dump().c_str(), &out), "lemma " + std::to_string(lemma));
  return json::parse(Take(out));
}

void PrintLemma(const std::string& title, const json& r, std::size_t rows) {
  std::cout << title << ": " << r["verdict"].get<std::string>() << "  gap "
            << Num(r["gap"].get<double>()) << " (tolerance " << Num(r["tolerance"].get<double>())
            << ")\n";
  const auto& measured = r["measured"];
  const auto& series = r["predicted_series"];
  std::vector<std::vector<std::string>> table = {{"  l", "measured", "predicted"}};
  const std::size_t count = measured.size();
  const std::size_t shown = std::min(rows, count);
  for (std::size_t t = 0; t < shown; ++t) {
    const std::size_t i = shown == 1 ? count - 1 : t * (count - 1) / (shown - 1);
    const double predicted =
        series.empty() ? r["predicted"].get<double>() : series[i][1].get<double>();
    table.push_back({"  " + measured[i][0].dump(), Num(measured[i][1].get<double>()), Num(predicted)});
  }
  if (r["lemma_id"] == 3) {
    table.push_back({"  slope", Num(r["measured_final"].get<double>()), Num(r["predicted"].get<double>())});
  }
  std::cout << RenderTable(table);
}

int CmdAnalyze(const RunConfig& cfg, const fs::path& dir) {
  const uint64_t seed = cfg.u64("seed");
  const std::size_t instances = cfg.count("instances");
  const std::size_t rows = cfg.count("table_rows");
  ordered_json all = ordered_json::array();
  bool ok = true;
  auto record = [&](const std::string& title, const json& r) {
    PrintLemma(title, r, rows);
    ok = ok && r["verdict"] == "pass";
    ordered_json entry;
    entry["check"] = title;
    entry["report"] = r;
    all.push_back(std::move(entry));
  };
  for (std::size_t i = 0; i < instances; ++i) {
    const uint64_t s = seed + i;
    ordered_json p1 = {{"n", cfg.count("lemma1.n")},
                       {"gap_min", cfg.real("lemma1.gap_min")},
                       {"l_max", cfg.count("lemma1.l_max")},
                       {"even_only", cfg.flag("lemma1.even_only")},
                       {"seed", s}};
    record("lemma 1, seed " + std::to_string(s), RunLemma(1, p1));
    for (std::size_t j : cfg.counts("lemma2.j")) {
      for (bool equal : {false, true}) {
        ordered_json p2 = {{"n", cfg.count("lemma2.n")},
                           {"j", j},
                           {"l_max", cfg.count("lemma2.l_max")},
                           {"equal_alpha", equal},
                           {"seed", s}};
        record("lemma 2, j = " + std::to_string(j) + (equal ? ", equal alpha" : "") + ", seed " +
                   std::to_string(s),
               RunLemma(2, p2));
      }
    }
    std::vector<std::size_t> ls;
    for (std::size_t l = 0; l <= cfg.count("lemma3.l_max"); ++l) ls.push_back(l);
    ordered_json p3 = {{"n", cfg.count("lemma3.n")},
                       {"index", cfg.count("lemma3.index")},
                       {"l_values", ls},
                       {"seed", s}};
    record("lemma 3, seed " + std::to_string(s), RunLemma(3, p3));
  }
  WriteText(dir / "lemmas.json", all.dump(2) + "\n");
  std::cout << (ok ? "all checks passed" : "some checks FAILED") << "\n";
  return ok ? kOk : kVerification;
}

// ---- train ----

BasisPtr BasisFor(const fs_graph* g, const RunConfig& cfg, std::size_t k, fs_eig_method method) {
  fs_eig_options o = EigenFrom(cfg);
  o.k = k;
  o.method = method;
  fs_basis* raw = nullptr;
  Check(fs_basis_compute(g, &o, &raw), "eigensolve");
  return BasisPtr(raw);
}

fs_eig_method MethodFrom(const std::string& name) {
  if (name == "auto") return FS_EIG_AUTO;
  if (name == "lanczos") return FS_EIG_LANCZOS;
  if (name == "dense") return FS_EIG_DENSE;
  throw ConfigError("eig_method: expected auto, lanczos or dense");
}

int CmdTrain(const RunConfig& cfg, const fs::path& dir) {
  auto [g, fixed] = LoadDataset(cfg);
  const std::string model = cfg.str("model");
  BasisPtr basis;
  const auto t0 = std::chrono::steady_clock::now();
  if (model == "fugnn") basis = BasisFor(g.get(), cfg, cfg.count("k"), MethodFrom(cfg.str("eig_method")));
  const double eig_secs = Seconds(t0);

  const std::vector<uint64_t> seeds = SeedsFrom(cfg);
  char* report_raw = nullptr;
  char* history_raw = nullptr;
  fs_model* model_raw = nullptr;
  const auto t1 = std::chrono::steady_clock::now();
  Check(fs_train(g.get(), basis.get(), TrainJson(cfg, model, fixed).dump().c_str(), seeds.data(),
                 seeds.size(), &report_raw, &model_raw, &history_raw),
        "training");
  const double train_secs = Seconds(t1);
  ModelPtr m(model_raw);
  const std::string report_text = Take(report_raw);
  WriteText(dir / "report.json", report_text + "\n");
  WriteText(dir / "history.jsonl", Take(history_raw));
  Check(fs_model_save(m.get(), (dir / "model.fsmp").c_str()), "writing model");
  char* mj = nullptr;
  Check(fs_model_json(m.get(), 0, &mj), "rendering model");
  WriteText(dir / "model.json", Take(mj) + "\n");
  WriteText(dir / "timing.json",
            ordered_json({{"eigensolve_seconds", eig_secs}, {"train_seconds", train_secs}}).dump(2) + "\n");

  const json report = json::parse(report_text);
  std::cout << RenderTable({{"model", "seeds", "accuracy (%)", "delta SP (%)", "delta EO (%)"},
                            {model, std::to_string(seeds.size()), MeanSd(report["accuracy"]),
                             MeanSd(report["delta_sp"]), MeanSd(report["delta_eo"])}});
  return kOk;
}

// ---- bench ----

struct SweepRow {
  std::string label;
  json report;
};

json TrainReport(const fs_graph* g, const fs_basis* basis, const std::string& config,
                 const std::vector<uint64_t>& seeds) {
  char* out = nullptr;
  Check(fs_train(g, basis, config.c_str(), seeds.data(), seeds.size(), &out, nullptr, nullptr),
        "training");
  return json::parse(Take(out));
}

double MeanOr(const json& agg, double fallback) {
  return agg.at("mean").is_null() ? fallback : agg.at("mean").get<double>();
}

void RunKSweep(const RunConfig& cfg, const fs::path& dir) {
  auto [g, fixed] = LoadDataset(cfg);
  const std::size_t n = [&] {
    char* info = nullptr;
    Check(fs_graph_info_json(g.get(), &info), "describing graph");
    return json::parse(Take(info))["n"].get<std::size_t>();
  }();
  const std::vector<std::size_t> ks = cfg.counts("ks", n);
  const std::vector<uint64_t> seeds = SeedsFrom(cfg);

  std::size_t kmax = 0;
  for (std::size_t k : ks) {
    if (k >= 1 && k <= n) kmax = std::max(kmax, k);
  }
  ordered_json rows = ordered_json::array();
  std::vector<std::vector<std::string>> table = {
      {"K", "accuracy (%)", "delta SP (%)", "delta EO (%)"}};

  const json base = TrainReport(g.get(), nullptr, TrainJson(cfg, "baseline", fixed).dump(), seeds);
  rows.push_back({{"model", "baseline"}, {"report", base}});
  table.push_back({"baseline", MeanSd(base["accuracy"]), MeanSd(base["delta_sp"]),
                   MeanSd(base["delta_eo"])});

  // One solve at the largest K; smaller bases are its leading columns.
  BasisPtr full;
  if (kmax > 0) full = BasisFor(g.get(), cfg, kmax, FS_EIG_AUTO);
  const std::string fugnn_cfg = TrainJson(cfg, "fugnn", fixed).dump();
  double small_sum = 0.0;
  double large_sum = 0.0;
  std::size_t small_count = 0;
  std::size_t large_count = 0;
  for (std::size_t k : ks) {
    const std::string label = k == n ? "n=" + std::to_string(n) : std::to_string(k);
    if (k < 1 || k > n) {
      rows.push_back({{"k", k}, {"skipped", "K outside [1, n]"}});
      table.push_back({label, "skipped", "skipped", "skipped"});
      continue;
    }
    fs_basis* raw = nullptr;
    Check(fs_basis_truncate(full.get(), k, &raw), "truncating basis");
    BasisPtr b(raw);
    const json r = TrainReport(g.get(), b.get(), fugnn_cfg, seeds);
    rows.push_back({{"model", "fugnn"}, {"k", k}, {"report", r}});
    table.push_back({label, MeanSd(r["accuracy"]), MeanSd(r["delta_sp"]), MeanSd(r["delta_eo"])});
    const double sp = MeanOr(r["delta_sp"], 0.0);
    if (k <= 10) {
      small_sum += sp;
      ++small_count;
    } else if (k >= 100) {
      large_sum += sp;
      ++large_count;
    }
    std::cerr << "K=" << label << " done\n";
  }
  ordered_json out;
  out["n"] = n;
  out["seeds"] = seeds;
  out["rows"] = rows;
  if (small_count > 0 && large_count > 0) {
    out["mean_delta_sp_k_le_10"] = small_sum / static_cast<double>(small_count);
    out["mean_delta_sp_k_ge_100"] = large_sum / static_cast<double>(large_count);
  }
  WriteText(dir / "ksweep.json", out.dump(2) + "\n");
  std::cout << RenderTable(table);
  if (out.contains("mean_delta_sp_k_le_10")) {
    std::cout << "mean delta SP, K <= 10: " << Percent(out["mean_delta_sp_k_le_10"])
              << "%   K >= 100: " << Percent(out["mean_delta_sp_k_ge_100"]) << "%\n";
  }
}

void RunRuntime(const RunConfig& cfg, const fs::path& dir) {
  const std::size_t k = cfg.count("runtime.k");
  const double degree = cfg.real("runtime.degree");
  ordered_json rows = ordered_json::array();
  std::vector<std::vector<std::string>> table = {{"n", "edges", "FES (s)", "WE (s)"}};
  for (std::size_t n : cfg.counts("runtime.sizes")) {
    // Expected degree held fixed: p_out = p_in / 10.
    fs_sbm_config s = SbmFrom(cfg);
    s.n = n;
    s.p_in = std::min(1.0, 2.0 * degree / (1.1 * static_cast<double>(n)));
    s.p_out = s.p_in / 10.0;
    fs_graph* raw = nullptr;
    Check(fs_graph_generate_sbm(&s, &raw), "generating SBM");
    GraphPtr g(raw);
    char* info = nullptr;
    Check(fs_graph_info_json(g.get(), &info), "describing graph");
    const json meta = json::parse(Take(info));

    fs_eig_options o = EigenFrom(cfg);
    o.k = k;
    o.method = FS_EIG_LANCZOS;
    fs_basis* b = nullptr;
    auto t0 = std::chrono::steady_clock::now();
    Check(fs_basis_compute(g.get(), &o, &b), "FES eigensolve");
    const double fes = Seconds(t0);
    fs_basis_free(b);

    o.method = FS_EIG_DENSE;
    t0 = std::chrono::steady_clock::now();
    const fs_status st = fs_basis_compute(g.get(), &o, &b);
    const double we = Seconds(t0);
    ordered_json row = {{"n", n}, {"edges", meta["undirected_edges"]}, {"k", k}, {"fes_seconds", fes}};
    std::string we_text;
    if (st == FS_ERR_LIMIT_EXCEEDED) {
      row["we_seconds"] = nullptr;
      row["we_status"] = "refused";
      we_text = "refused";
    } else {
      Check(st, "WE eigensolve");
      fs_basis_free(b);
      row["we_seconds"] = we;
      row["we_status"] = "ok";
      we_text = Num(we);
    }
    rows.push_back(row);
    table.push_back({std::to_string(n), meta["undirected_edges"].dump(), Num(fes), we_text});
  }
  WriteText(dir / "runtime.json", rows.dump(2) + "\n");
  std::cout << RenderTable(table);
}

int CmdBench(const RunConfig& cfg, const fs::path& dir) {
  const std::string run = cfg.str("run");
  bool any = false;
  if (run.find("ksweep") != std::string::npos) {
    RunKSweep(cfg, dir);
    any = true;
  }
  if (run.find("runtime") != std::string::npos) {
    RunRuntime(cfg, dir);
    any = true;
  }
  if (!any) throw ConfigError("run: expected ksweep, runtime or both");
  return kOk;
}

int Dispatch(const RunConfig& cfg, const fs::path& dir) {
  const std::string& c = cfg.command();
  if (c == "gen") return CmdGen(cfg, dir);
  if (c == "eig") return CmdEig(cfg, dir);
  if (c == "analyze") return CmdAnalyze(cfg, dir);
  if (c == "train") return CmdTrain(cfg, dir);
  return CmdBench(cfg, dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fair spectral graph learning toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fs_version()));

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_root = "runs";
  bool list_keys = false;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen", "generate a synthetic biased SBM dataset with splits"},
      {"eig", "compute the top-K spectral basis (FES) and/or the full dense one (WE)"},
      {"analyze", "verify the convolution-similarity lemmas against dense oracles"},
      {"train", "train and evaluate over a list of seeds"},
      {"bench", "K sweep and eigensolver runtime comparison"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "INI config; keys under [" + name + "]");
    sub->add_option("-s,--set", overrides, "key=value override (repeatable)");
    sub->add_option("-o,--out-root", out_root, "directory that receives the run directory");
    sub->add_flag("--list-keys", list_keys, "print accepted keys with defaults and exit");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  if (list_keys) {
    std::vector<std::vector<std::string>> rows = {{"key", "default", "meaning"}};
    for (const auto& k : fairspectral::cli::SchemaFor(command)) rows.push_back({k.name, k.default_value, k.help});
    std::cout << RenderTable(rows);
    return kOk;
  }

  try {
    const fairspectral::cli::IniDocument doc =
        config_path.empty() ? fairspectral::cli::IniDocument{} : fairspectral::cli::ReadIniFile(config_path);
    const RunConfig cfg = RunConfig::Resolve(command, doc, overrides);
    const fs::path dir = fs::path(out_root) / (command + "-" + cfg.Hash());
    fs::create_directories(dir);
    WriteText(dir / "config.ini", cfg.Canonical());
    std::cerr << "run directory: " << dir.string() << "\n";
    return Dispatch(cfg, dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const LibraryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.status());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed report: " << e.what() << "\n";
    return kNumerical;
  }
}
