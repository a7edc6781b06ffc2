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
#include <cstring>
#include <fstream>

#include "fairspectral/eigensolver.hpp"
#include "json.hpp"

namespace fairspectral {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary containers are written in native little-endian order");

constexpr std::array<char, 4> kMagic = {'F', 'S', 'B', '1'};

void WriteU64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t ReadU64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void WriteBasisBinary(const SpectralBasis& basis, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  WriteU64(out, basis.n());
  WriteU64(out, basis.k());
  out.write(reinterpret_cast<const char*>(basis.eigenvalues.data()),
            static_cast<std::streamsize>(sizeof(double) * basis.k()));
  // Eigen's default storage is column-major already.
  out.write(reinterpret_cast<const char*>(basis.eigenvectors.data()),
            static_cast<std::streamsize>(sizeof(double) * basis.n() * basis.k()));
  if (!out) throw IoError("failed writing " + path.string());
}

SpectralBasis ReadBasisBinary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw InvalidArgument(path.string() + ": not an FSB1 file");
  const std::uint64_t n = ReadU64(in);
  const std::uint64_t k = ReadU64(in);
  if (!in || k > n || n > (std::uint64_t{1} << 32)) {
    throw InvalidArgument(path.string() + ": corrupt FSB1 header");
  }
  SpectralBasis b;
  b.eigenvalues.resize(static_cast<Eigen::Index>(k));
  b.eigenvectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  in.read(reinterpret_cast<char*>(b.eigenvalues.data()),
          static_cast<std::streamsize>(sizeof(double) * k));
  in.read(reinterpret_cast<char*>(b.eigenvectors.data()),
          static_cast<std::streamsize>(sizeof(double) * n * k));
  if (!in) throw InvalidArgument(path.string() + ": truncated FSB1 payload");
  // Residuals are not part of the container.
  b.residuals = Vector::Constant(static_cast<Eigen::Index>(k),
                                 std::numeric_limits<double>::quiet_NaN());
  return b;
}

std::string BasisToJson(const SpectralBasis& basis, bool include_vectors) {
  nlohmann::ordered_json j;
  j["n"] = basis.n();
  j["k"] = basis.k();
  j["operator"] = OperatorModeName(basis.mode);
  j["eigenvalues"] = std::vector<double>(basis.eigenvalues.data(),
                                         basis.eigenvalues.data() + basis.eigenvalues.size());
  j["residuals"] = std::vector<double>(basis.residuals.data(),
                                       basis.residuals.data() + basis.residuals.size());
  if (include_vectors) {
    auto cols = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < basis.eigenvectors.cols(); ++c) {
      const Vector col = basis.eigenvectors.col(c);
      cols.push_back(std::vector<double>(col.data(), col.data() + col.size()));
    }
    j["eigenvectors"] = std::move(cols);
  }
  return j.dump();
}

}  // namespace fairspectral
