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

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "fairspectral/model.hpp"
#include "json.hpp"

namespace fairspectral {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary containers are written in native little-endian order");

constexpr std::array<char, 4> kMagic = {'F', 'S', 'M', 'P'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void Put(std::string& out, T v) {
  char bytes[sizeof v];
  std::memcpy(bytes, &v, sizeof v);
  out.append(bytes, sizeof v);
}

class Reader {
 public:
  Reader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

  template <class T>
  T Get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in_) throw InvalidArgument(origin_ + ": truncated FSMP file");
    return v;
  }

  void Bytes(char* dst, std::size_t count) {
    in_.read(dst, static_cast<std::streamsize>(count));
    if (!in_) throw InvalidArgument(origin_ + ": truncated FSMP file");
  }

 private:
  std::istream& in_;
  std::string origin_;
};

// Serialized form shared by the file writer and the fingerprint.
std::string Encode(const ModelParams& params) {
  const ModelConfig& c = params.config;
  std::string out(kMagic.data(), kMagic.size());
  Put<std::uint32_t>(out, kVersion);
  Put<std::uint32_t>(out, c.kind == ModelKind::kFugnn ? 0 : 1);
  for (std::size_t v : {c.input_dim, c.width, c.layers, c.d_e, c.heads, c.d_ff}) {
    Put<std::uint64_t>(out, v);
  }
  Put<double>(out, c.ln_eps);
  Put<double>(out, c.theta);
  Put<std::uint64_t>(out, c.propagation_steps);
  Put<std::uint64_t>(out, c.seed);

  const auto named = params.named();
  Put<std::uint64_t>(out, named.size());
  for (const auto& [name, m] : named) {
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    Put<std::uint64_t>(out, static_cast<std::uint64_t>(m->rows()));
    Put<std::uint64_t>(out, static_cast<std::uint64_t>(m->cols()));
    out.append(reinterpret_cast<const char*>(m->data()), sizeof(double) * static_cast<std::size_t>(m->size()));
  }
  return out;
}

}  // namespace

void SaveParams(const ModelParams& params, const std::filesystem::path& path) {
  const std::string bytes = Encode(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ModelParams LoadParams(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Reader r(in, path.string());
  std::array<char, 4> magic{};
  r.Bytes(magic.data(), magic.size());
  if (magic != kMagic) throw InvalidArgument(path.string() + ": not an FSMP file");
  const auto version = r.Get<std::uint32_t>();
  if (version != kVersion) {
    throw InvalidArgument(path.string() + ": unsupported FSMP version " + std::to_string(version));
  }
  ModelConfig c;
  const auto kind = r.Get<std::uint32_t>();
  if (kind > 1) throw InvalidArgument(path.string() + ": unknown model kind");
  c.kind = kind == 0 ? ModelKind::kFugnn : ModelKind::kBaseline;
  for (std::size_t* field : {&c.input_dim, &c.width, &c.layers, &c.d_e, &c.heads, &c.d_ff}) {
    *field = r.Get<std::uint64_t>();
  }
  c.ln_eps = r.Get<double>();
  c.theta = r.Get<double>();
  c.propagation_steps = r.Get<std::uint64_t>();
  c.seed = r.Get<std::uint64_t>();
  if (c.width > (1u << 20) || c.d_e > (1u << 20) || c.layers > 4096 || c.input_dim > (1u << 24)) {
    throw InvalidArgument(path.string() + ": implausible FSMP header");
  }

  // Shapes come from the config; the file must agree with them.
  ModelParams p = InitParams(c);
  auto named = p.named();
  if (r.Get<std::uint64_t>() != named.size()) {
    throw InvalidArgument(path.string() + ": tensor count does not match the config");
  }
  for (auto& [name, m] : named) {
    const auto len = r.Get<std::uint32_t>();
    if (len > 256) throw InvalidArgument(path.string() + ": corrupt tensor name");
    std::string stored(len, '\0');
    r.Bytes(stored.data(), len);
    const auto rows = r.Get<std::uint64_t>();
    const auto cols = r.Get<std::uint64_t>();
    if (stored != name || rows != static_cast<std::uint64_t>(m->rows()) ||
        cols != static_cast<std::uint64_t>(m->cols())) {
      throw InvalidArgument(path.string() + ": tensor '" + stored + "' does not match the config");
    }
    r.Bytes(reinterpret_cast<char*>(m->data()), sizeof(double) * static_cast<std::size_t>(m->size()));
  }
  return p;
}

std::string ParamsToJson(const ModelParams& params, bool include_values) {
  const ModelConfig& c = params.config;
  nlohmann::ordered_json j;
  j["format_version"] = kVersion;
  j["kind"] = ModelKindName(c.kind);
  j["input_dim"] = c.input_dim;
  j["width"] = c.width;
  j["layers"] = c.layers;
  if (c.kind == ModelKind::kFugnn) {
    j["d_e"] = c.d_e;
    j["heads"] = c.heads;
    j["d_ff"] = c.ffn_width();
    j["ln_eps"] = c.ln_eps;
  } else {
    j["theta"] = c.theta;
    j["propagation_steps"] = c.propagation_steps;
  }
  j["seed"] = c.seed;
  j["parameter_count"] = params.parameter_count();
  j["fingerprint"] = ParamsFingerprint(params);
  auto tensors = nlohmann::ordered_json::array();
  for (const auto& [name, m] : params.named()) {
    nlohmann::ordered_json t;
    t["name"] = name;
    t["shape"] = {m->rows(), m->cols()};
    if (include_values) {
      // Row-major nested arrays read naturally.
      auto rows = nlohmann::ordered_json::array();
      for (Eigen::Index r = 0; r < m->rows(); ++r) {
        const Eigen::RowVectorXd row = m->row(r);
        rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
      }
      t["values"] = std::move(rows);
    }
    tensors.push_back(std::move(t));
  }
  j["tensors"] = std::move(tensors);
  return j.dump();
}

std::string ParamsFingerprint(const ModelParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : Encode(params)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fairspectral
