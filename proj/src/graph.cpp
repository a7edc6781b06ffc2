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

#include "fairspectral/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace fairspectral {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitFields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delim)) out.push_back(Trim(field));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

double ParseNumber(const std::string& text, std::size_t row, const std::string& column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw InvalidArgument("node table row " + std::to_string(row) + ", column '" +
                          column + "': not a number: '" + text + "'");
  }
  return v;
}

std::vector<std::size_t> Members(const Mask& m) {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) ids.push_back(i);
  }
  return ids;
}

}  // namespace

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

const Mask& MaskFor(const SplitMasks& masks, Split split) {
  switch (split) {
    case Split::kTrain: return masks.train;
    case Split::kVal: return masks.val;
    case Split::kTest: return masks.test;
  }
  return masks.test;
}

const char* OperatorModeName(OperatorMode mode) {
  return mode == OperatorMode::kRawAdjacency ? "raw" : "sym-normalized";
}

OperatorMode ParseOperatorMode(const std::string& name) {
  if (name == "raw" || name == "raw-adjacency") return OperatorMode::kRawAdjacency;
  if (name == "sym-normalized" || name == "normalized" || name == "sym") {
    return OperatorMode::kSymNormalized;
  }
  throw InvalidArgument("unknown operator mode '" + name + "'");
}

void Graph::validate() const {
  if (adjacency.rows != n || adjacency.cols != n) {
    throw InvalidArgument("graph: adjacency is not n x n");
  }
  if (!adjacency.is_symmetric()) throw InvalidArgument("graph: adjacency not symmetric");
  if (adjacency.has_diagonal_entries()) throw InvalidArgument("graph: self-loop stored");
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw InvalidArgument("graph: feature rows != n");
  }
  if (sensitive.size() != n || labels.size() != n) {
    throw InvalidArgument("graph: sensitive/label length != n");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if ((sensitive[i] != 0 && sensitive[i] != 1) || (labels[i] != 0 && labels[i] != 1)) {
      throw InvalidArgument("graph: non-binary sensitive or label entry at node " +
                            std::to_string(i));
    }
  }
  const Mask* all[] = {&masks.train, &masks.val, &masks.test};
  for (const Mask* m : all) {
    if (!m->empty() && m->size() != n) throw InvalidArgument("graph: mask length != n");
  }
  for (std::size_t i = 0; i < n; ++i) {
    int hits = 0;
    for (const Mask* m : all) hits += (!m->empty() && (*m)[i]) ? 1 : 0;
    if (hits > 1) throw InvalidArgument("graph: masks overlap at node " + std::to_string(i));
  }
}

void SbmConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (n < 2) throw InvalidArgument("sbm: n must be at least 2");
  if (!prob(p_in) || !prob(p_out)) throw InvalidArgument("sbm: edge probabilities outside [0,1]");
  if (!(p_in > p_out)) throw InvalidArgument("sbm: p_in must exceed p_out");
  if (sensitive_homophily < 0.5 || sensitive_homophily > 1.0) {
    throw InvalidArgument("sbm: sensitive_homophily outside [0.5,1]");
  }
  if (label_bias < 0.5 || label_bias > 1.0) throw InvalidArgument("sbm: label_bias outside [0.5,1]");
  if (d < 2) throw InvalidArgument("sbm: need at least one feature besides the sensitive one");
  if (!(noise_sd >= 0.0)) throw InvalidArgument("sbm: noise_sd must be non-negative");
}

Graph LoadGraph(const std::filesystem::path& edge_list,
                const std::filesystem::path& node_table,
                const std::string& sensitive_column,
                const std::string& label_column) {
  std::ifstream nodes(node_table);
  if (!nodes) throw IoError("cannot open node table " + node_table.string());
  std::string header;
  if (!std::getline(nodes, header)) throw InvalidArgument("node table is empty");
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  const std::vector<std::string> columns = SplitFields(header, delim);

  auto find_column = [&](const std::string& name) {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
      throw InvalidArgument("node table has no column named '" + name + "'");
    }
    return static_cast<std::size_t>(it - columns.begin());
  };
  const std::size_t sens_col = find_column(sensitive_column);
  const std::size_t label_col = find_column(label_column);

  // Every column except the label becomes a feature; the sensitive column
  // stays in place.
  std::vector<std::size_t> feature_cols;
  Graph g;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c == label_col) continue;
    if (c == sens_col) g.sensitive_column = feature_cols.size();
    feature_cols.push_back(c);
    g.feature_names.push_back(columns[c]);
  }
  g.sensitive_name = sensitive_column;

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t row_no = 0;
  while (std::getline(nodes, line)) {
    ++row_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitFields(line, delim);
    if (fields.size() != columns.size()) {
      throw InvalidArgument("node table row " + std::to_string(row_no) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(columns.size()));
    }
    std::vector<double> values(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      values[c] = ParseNumber(fields[c], row_no, columns[c]);
    }
    const double s = values[sens_col];
    if (s != 0.0 && s != 1.0) {
      throw InvalidArgument("node table row " + std::to_string(row_no) +
                            ": sensitive value is not 0/1");
    }
    const double y = values[label_col];
    if (y < 0.0 || y != std::floor(y)) {
      throw InvalidArgument("node table row " + std::to_string(row_no) +
                            ": label is not a non-negative integer");
    }
    g.sensitive.push_back(static_cast<int>(s));
    g.labels.push_back(y >= 1.0 ? 1 : 0);
    rows.push_back(std::move(values));
  }
  g.n = rows.size();
  g.features.resize(static_cast<Eigen::Index>(g.n),
                    static_cast<Eigen::Index>(feature_cols.size()));
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      g.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
          rows[i][feature_cols[f]];
    }
  }

  std::ifstream edges(edge_list);
  if (!edges) throw IoError("cannot open edge list " + edge_list.string());
  std::vector<CsrMatrix::Triplet> triplets;
  std::size_t line_no = 0;
  while (std::getline(edges, line)) {
    ++line_no;
    const std::string t = Trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream in(t);
    long long u = -1;
    long long v = -1;
    if (!(in >> u >> v)) {
      throw InvalidArgument("edge list line " + std::to_string(line_no) + ": expected 'u v'");
    }
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= g.n ||
        static_cast<std::size_t>(v) >= g.n) {
      throw InvalidArgument("edge list line " + std::to_string(line_no) +
                            ": node id out of range [0, " + std::to_string(g.n) + ")");
    }
    if (u == v) continue;
    triplets.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v), 1.0});
    triplets.push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(u), 1.0});
  }
  g.adjacency = CsrMatrix::from_triplets(g.n, g.n, std::move(triplets));
  // Duplicates were summed; collapse back to unit weights.
  std::fill(g.adjacency.values.begin(), g.adjacency.values.end(), 1.0);
  g.validate();
  return g;
}

void SaveGraph(const Graph& g, const std::filesystem::path& edge_list,
               const std::filesystem::path& node_table) {
  std::ofstream edges(edge_list);
  if (!edges) throw IoError("cannot write " + edge_list.string());
  edges << "# undirected edges: " << g.undirected_edges() << "\n";
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t k = g.adjacency.row_ptr[i]; k < g.adjacency.row_ptr[i + 1]; ++k) {
      const std::size_t j = g.adjacency.col_idx[k];
      if (i < j) edges << i << ' ' << j << '\n';
    }
  }
  if (!edges) throw IoError("failed writing " + edge_list.string());

  std::ofstream nodes(node_table);
  if (!nodes) throw IoError("cannot write " + node_table.string());
  for (const auto& name : g.feature_names) nodes << name << ',';
  nodes << "label\n";
  nodes << std::setprecision(17);
  for (std::size_t i = 0; i < g.n; ++i) {
    for (Eigen::Index f = 0; f < g.features.cols(); ++f) {
      nodes << g.features(static_cast<Eigen::Index>(i), f) << ',';
    }
    nodes << g.labels[i] << '\n';
  }
  if (!nodes) throw IoError("failed writing " + node_table.string());
}

NormalizedOperator Normalize(const Graph& g, OperatorMode mode) {
  NormalizedOperator op;
  op.mode = mode;
  if (mode == OperatorMode::kRawAdjacency) {
    op.matrix = g.adjacency;
    return op;
  }
  const CsrMatrix& a = g.adjacency;
  std::vector<double> inv_sqrt_deg(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    double deg = 1.0;  // self-loop
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) deg += a.values[k];
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  CsrMatrix& m = op.matrix;
  m.rows = m.cols = g.n;
  m.row_ptr.assign(1, 0);
  m.col_idx.reserve(a.nnz() + g.n);
  m.values.reserve(a.nnz() + g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    bool diag_done = false;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const std::uint32_t j = a.col_idx[k];
      if (!diag_done && j > i) {
        m.col_idx.push_back(static_cast<std::uint32_t>(i));
        m.values.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[i]);
        diag_done = true;
      }
      m.col_idx.push_back(j);
      m.values.push_back(inv_sqrt_deg[i] * a.values[k] * inv_sqrt_deg[j]);
    }
    if (!diag_done) {
      m.col_idx.push_back(static_cast<std::uint32_t>(i));
      m.values.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[i]);
    }
    m.row_ptr.push_back(m.values.size());
  }
  return op;
}

SplitMasks MakeSplits(const Graph& g, std::uint64_t seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < g.n; ++i) by_class[g.labels[i] == 1 ? 1 : 0].push_back(i);
  if (by_class[0].empty() || by_class[1].empty()) {
    throw InvalidArgument("make_splits: a label class has no members");
  }
  SplitMasks m{Mask(g.n, false), Mask(g.n, false), Mask(g.n, false)};
  std::mt19937_64 rng(seed);
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t count = members.size();
    const std::size_t quarter = count / 4;
    const std::size_t remainder = count - 2 * quarter;
    const std::size_t n_train = std::min({remainder, count / 2, std::size_t{500}});
    for (std::size_t k = 0; k < quarter; ++k) m.val[members[k]] = true;
    for (std::size_t k = quarter; k < 2 * quarter; ++k) m.test[members[k]] = true;
    for (std::size_t k = 2 * quarter; k < 2 * quarter + n_train; ++k) m.train[members[k]] = true;
  }
  return m;
}

void SaveSplits(const SplitMasks& masks, const std::filesystem::path& path) {
  nlohmann::json j;
  j["train"] = Members(masks.train);
  j["val"] = Members(masks.val);
  j["test"] = Members(masks.test);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump() << '\n';
}

SplitMasks LoadSplits(const std::filesystem::path& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("splits file " + path.string() + ": " + e.what());
  }
  SplitMasks m{Mask(n, false), Mask(n, false), Mask(n, false)};
  auto fill = [&](const char* key, Mask& mask) {
    if (!j.contains(key)) throw InvalidArgument(std::string("splits file lacks '") + key + "'");
    for (const auto& id : j.at(key)) {
      const auto i = id.get<long long>();
      if (i < 0 || static_cast<std::size_t>(i) >= n) {
        throw InvalidArgument("splits file: node id out of range");
      }
      mask[static_cast<std::size_t>(i)] = true;
    }
  };
  fill("train", m.train);
  fill("val", m.val);
  fill("test", m.test);
  for (std::size_t i = 0; i < n; ++i) {
    if (int{m.train[i]} + int{m.val[i]} + int{m.test[i]} > 1) {
      throw InvalidArgument("splits file: masks overlap at node " + std::to_string(i));
    }
  }
  return m;
}

namespace {

// Visits the Bernoulli(p) successes among `count` candidate pairs with
// geometric skips, so sparse blocks cost O(successes).
template <typename Visit>
void SampleBernoulliRun(std::uint64_t count, double p, std::mt19937_64& rng, Visit visit) {
  if (p <= 0.0 || count == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t k = 0; k < count; ++k) visit(k);
    return;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double log_q = std::log1p(-p);
  std::uint64_t k = 0;
  for (;;) {
    const double u = 1.0 - unif(rng);  // (0, 1]
    const double skip = std::floor(std::log(u) / log_q);
    if (skip >= static_cast<double>(count - k)) return;
    k += static_cast<std::uint64_t>(skip);
    visit(k);
    ++k;
    if (k >= count) return;
  }
}

}  // namespace

Graph GenerateSbm(const SbmConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::size_t n = cfg.n;
  const std::size_t half = n / 2;
  std::vector<int> block(n);
  for (std::size_t i = 0; i < n; ++i) block[i] = i < half ? 0 : 1;

  Graph g;
  g.n = n;
  g.sensitive.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.sensitive[i] = unif(rng) < cfg.sensitive_homophily ? block[i] : 1 - block[i];
  }

  std::vector<CsrMatrix::Triplet> triplets;
  auto add_edge = [&](std::size_t u, std::size_t v) {
    triplets.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v), 1.0});
    triplets.push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(u), 1.0});
  };
  // Intra-block pairs (i < j), walked row by row.
  for (const auto& [lo, hi] : {std::pair<std::size_t, std::size_t>{0, half},
                              std::pair<std::size_t, std::size_t>{half, n}}) {
    const std::uint64_t m = hi - lo;
    const std::uint64_t pairs = m * (m - 1) / 2;
    std::uint64_t row = 0;
    std::uint64_t row_start = 0;  // linear index of (row, row + 1)
    SampleBernoulliRun(pairs, cfg.p_in, rng, [&](std::uint64_t k) {
      while (k >= row_start + (m - 1 - row)) {
        row_start += m - 1 - row;
        ++row;
      }
      const std::uint64_t col = row + 1 + (k - row_start);
      add_edge(lo + row, lo + col);
    });
  }
  {
    const std::uint64_t m1 = n - half;
    SampleBernoulliRun(std::uint64_t{half} * m1, cfg.p_out, rng, [&](std::uint64_t k) {
      add_edge(k / m1, half + k % m1);
    });
  }
  g.adjacency = CsrMatrix::from_triplets(n, n, std::move(triplets));

  // Features: column 0 is the sensitive attribute; a quarter of the rest are
  // block-shifted proxies; the others carry the label signal.
  const std::size_t d = cfg.d;
  const std::size_t proxies = std::max<std::size_t>(1, (d - 1) / 4);
  g.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  g.feature_names.assign(d, "");
  g.feature_names[0] = "sensitive";
  for (std::size_t f = 1; f < d; ++f) {
    g.feature_names[f] = (f <= proxies ? "proxy" : "x") + std::to_string(f);
  }
  g.sensitive_column = 0;
  g.sensitive_name = "sensitive";
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    g.features(r, 0) = g.sensitive[i];
    for (std::size_t f = 1; f < d; ++f) {
      double v = cfg.noise_sd * gauss(rng);
      if (f <= proxies) v += cfg.proxy_shift * (2.0 * block[i] - 1.0);
      g.features(r, static_cast<Eigen::Index>(f)) = v;
    }
  }
  Vector w = Vector::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t f = proxies + 1; f < d; ++f) w(static_cast<Eigen::Index>(f)) = gauss(rng);
  if (proxies + 1 >= d) w(static_cast<Eigen::Index>(d - 1)) = 1.0;
  const Vector z = g.features * w;
  std::vector<double> sorted(z.data(), z.data() + z.size());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
  const double median = sorted[n / 2];
  g.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int signal = z(static_cast<Eigen::Index>(i)) > median ? 1 : 0;
    g.labels[i] = unif(rng) < cfg.label_bias ? signal : g.sensitive[i];
  }
  g.validate();
  return g;
}

}  // namespace fairspectral
