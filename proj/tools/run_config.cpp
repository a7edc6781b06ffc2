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

#include "run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fairspectral::cli {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void Append(std::vector<KeySpec>& dst, const std::vector<KeySpec>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

const std::vector<KeySpec> kSbmKeys = {
    {"sbm.n", "2000", "node count"},
    {"sbm.p_in", "0.01", "edge probability inside a block"},
    {"sbm.p_out", "0.001", "edge probability across blocks"},
    {"sbm.sensitive_homophily", "0.9", "P(sensitive value == block)"},
    {"sbm.label_bias", "0.8", "P(label follows the feature signal); otherwise label = sensitive"},
    {"sbm.d", "16", "feature dimension, sensitive column included"},
    {"sbm.noise_sd", "1.0", "feature noise scale"},
    {"sbm.proxy_shift", "1.0", "block offset of the proxy feature columns"},
    {"sbm.seed", "0", "generator seed"},
};

const std::vector<KeySpec> kDatasetKeys = {
    {"dataset", "sbm", "sbm (generate from sbm.*) or files"},
    {"edges", "", "edge list path when dataset = files"},
    {"nodes", "", "node table path when dataset = files"},
    {"splits", "", "optional split JSON; empty draws splits per seed"},
    {"sensitive_column", "sensitive", "node table column holding the sensitive attribute"},
    {"label_column", "label", "node table column holding the label"},
};

const std::vector<KeySpec> kEigenKeys = {
    {"k", "8", "number of eigenpairs"},
    {"tol", "1e-10", "Lanczos residual tolerance, relative to |lambda|"},
    {"max_iter", "20000", "Lanczos budget of operator applications"},
    {"eig_seed", "0", "Lanczos start-vector seed"},
    {"operator", "sym-normalized", "sym-normalized or raw"},
    {"dense_limit", "2000", "largest n the dense solver accepts"},
};

const std::vector<KeySpec> kModelKeys = {
    {"width", "16", "hidden width"},
    {"layers", "2", "spectral convolution layers"},
    {"d_e", "32", "eigenvalue embedding width"},
    {"heads", "4", "attention heads"},
    {"d_ff", "0", "feed-forward width; 0 means 4 * d_e"},
    {"ln_eps", "1e-5", "layer-norm epsilon"},
    {"theta", "0.1", "baseline teleport weight"},
    {"propagation_steps", "10", "baseline propagation steps"},
};

const std::vector<KeySpec> kTrainKeys = {
    {"epochs", "1000", "maximum epochs"},
    {"lr", "0.01", "Adam step size"},
    {"weight_decay", "5e-4", "L2 penalty"},
    {"patience", "100", "early-stopping patience on validation accuracy"},
    {"seeds", "0,1,2,3,4", "comma-separated seeds; each draws its own split and init"},
};

std::map<std::string, std::vector<KeySpec>> BuildSchemas() {
  std::map<std::string, std::vector<KeySpec>> s;

  auto& gen = s["gen"];
  Append(gen, kSbmKeys);
  gen.push_back({"split_seed", "0", "seed of the stored train/val/test split"});

  auto& eig = s["eig"];
  Append(eig, kDatasetKeys);
  Append(eig, kSbmKeys);
  Append(eig, kEigenKeys);
  eig.push_back({"method", "both", "fes (Lanczos), we (full dense) or both"});
  eig.push_back({"json_vectors_max_n", "200", "include eigenvectors in basis JSON up to this n"});

  auto& analyze = s["analyze"];
  analyze = {
      {"seed", "0", "base seed"},
      {"instances", "1", "seeded instances per check"},
      {"lemma1.n", "100", "matrix size"},
      {"lemma1.gap_min", "1.5", "|lambda_1| / |lambda_2|"},
      {"lemma1.l_max", "200", "largest power"},
      {"lemma1.even_only", "false", "verify the even subsequence only"},
      {"lemma2.n", "60", "matrix size"},
      {"lemma2.j", "2,3", "degeneracies to check"},
      {"lemma2.l_max", "200", "largest power"},
      {"lemma3.n", "80", "matrix size"},
      {"lemma3.index", "2", "non-principal index (1-based)"},
      {"lemma3.l_max", "30", "powers 0..l_max enter the fit"},
      {"table_rows", "8", "rows per lemma in the printed table"},
  };

  auto& train = s["train"];
  Append(train, kDatasetKeys);
  Append(train, kSbmKeys);
  Append(train, kEigenKeys);
  train.push_back({"eig_method", "auto", "auto, lanczos or dense"});
  train.push_back({"model", "fugnn", "fugnn or baseline"});
  Append(train, kModelKeys);
  Append(train, kTrainKeys);

  auto& bench = s["bench"];
  Append(bench, kDatasetKeys);
  Append(bench, kSbmKeys);
  Append(bench, kEigenKeys);
  Append(bench, kModelKeys);
  Append(bench, kTrainKeys);
  bench.push_back({"run", "ksweep,runtime", "parts to run: ksweep, runtime"});
  bench.push_back({"ks", "1,2,3,4,5,6,7,8,9,10,100,n", "K grid; n means the node count"});
  bench.push_back({"runtime.sizes", "2000,20000", "graph sizes of the runtime comparison"});
  bench.push_back({"runtime.k", "8", "K of the runtime comparison"});
  bench.push_back({"runtime.degree", "11", "expected degree of the runtime graphs"});
  return s;
}

const std::map<std::string, std::vector<KeySpec>>& Schemas() {
  static const auto* schemas = new std::map<std::string, std::vector<KeySpec>>(BuildSchemas());
  return *schemas;
}

}  // namespace

IniDocument ParseIni(const std::string& text) {
  IniDocument doc;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = Trim(line.substr(1, line.size() - 2));
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    auto& sec = doc[section];
    if (sec.count(key) != 0) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    sec[key] = Trim(line.substr(eq + 1));
  }
  return doc;
}

IniDocument ReadIniFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseIni(ss.str());
}

const std::vector<KeySpec>& SchemaFor(const std::string& command) {
  const auto it = Schemas().find(command);
  if (it == Schemas().end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

std::vector<std::string> Commands() {
  std::vector<std::string> out;
  for (const auto& [name, keys] : Schemas()) out.push_back(name);
  return out;
}

RunConfig RunConfig::Resolve(const std::string& command, const IniDocument& file,
                             const std::vector<std::string>& overrides) {
  const auto& schema = SchemaFor(command);
  RunConfig cfg;
  cfg.command_ = command;
  for (const KeySpec& k : schema) cfg.values_[k.name] = k.default_value;

  auto set = [&](const std::string& key, const std::string& value, const std::string& origin) {
    if (cfg.values_.count(key) == 0) {
      throw ConfigError(origin + ": unknown key '" + key + "' for command " + command);
    }
    cfg.values_[key] = value;
  };
  for (const auto& [section, entries] : file) {
    if (section.empty() && !entries.empty()) {
      throw ConfigError("config keys must sit under a [command] section");
    }
    if (Schemas().count(section) == 0) throw ConfigError("unknown config section [" + section + "]");
    if (section != command) {
      // Other commands' sections must still be valid for those commands.
      const auto& other = SchemaFor(section);
      for (const auto& [key, value] : entries) {
        const bool known = std::any_of(other.begin(), other.end(),
                                       [&](const KeySpec& k) { return k.name == key; });
        if (!known) throw ConfigError("config: unknown key '" + key + "' for command " + section);
      }
      continue;
    }
    for (const auto& [key, value] : entries) set(key, value, "config");
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    set(Trim(o.substr(0, eq)), Trim(o.substr(eq + 1)), "override");
  }
  return cfg;
}

std::string RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("no key '" + key + "' for command " + command_);
  return it->second;
}

double RunConfig::real(const std::string& key) const {
  const std::string v = str(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + v + "' is not a number");
  }
}

std::uint64_t RunConfig::u64(const std::string& key) const {
  const std::string v = str(key);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key + ": '" + v + "' is not a non-negative integer");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + v + "' is out of range");
  }
}

std::size_t RunConfig::count(const std::string& key) const {
  return static_cast<std::size_t>(u64(key));
}

bool RunConfig::flag(const std::string& key) const {
  const std::string v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::vector<std::size_t> RunConfig::counts(const std::string& key, std::size_t n_value) const {
  std::vector<std::size_t> out;
  std::stringstream ss(str(key));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = Trim(tok);
    if (tok.empty()) continue;
    if (tok == "n") {
      out.push_back(n_value);
      continue;
    }
    if (tok.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError(key + ": '" + tok + "' is not a non-negative integer");
    }
    out.push_back(static_cast<std::size_t>(std::stoull(tok)));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string RunConfig::Canonical() const {
  std::string out = "[" + command_ + "]\n";
  for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
  return out;
}

std::string RunConfig::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : Canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fairspectral::cli
