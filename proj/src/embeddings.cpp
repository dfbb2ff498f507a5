// Copyright 2026 The kgact Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgact/embeddings.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "internal/text.hpp"
#include "kgact/error.hpp"
#include "kgact/knowledge_graph.hpp"

namespace kgact {

void EmbeddingTable::add(std::string_view label,
                         std::span<const double> vector) {
  if (vector.size() != kSemanticDim) {
    throw ContractError("embedding for '" + std::string(label) + "' has " +
                        std::to_string(vector.size()) + " components, expected " +
                        std::to_string(kSemanticDim));
  }
  double norm2 = 0.0;
  for (const double v : vector) {
    if (!std::isfinite(v)) {
      throw DataError("non-finite embedding component for '" +
                      std::string(label) + "'");
    }
    norm2 += v * v;
  }
  if (norm2 == 0.0) {
    throw DataError("zero embedding vector for '" + std::string(label) + "'");
  }
  std::string key = canonical_label(label);
  if (index_.contains(key)) {
    throw ContractError("duplicate embedding label '" + key + "'");
  }
  const double norm = std::sqrt(norm2);
  index_.emplace(key, labels_.size());
  labels_.push_back(std::move(key));
  for (const double v : vector) data_.push_back(v / norm);
}

bool EmbeddingTable::contains(std::string_view label) const {
  return index_.contains(std::string(label));
}

std::span<const double> EmbeddingTable::at(std::string_view label) const {
  const auto it = index_.find(std::string(label));
  if (it == index_.end()) {
    throw NotFoundError("no embedding for '" + std::string(label) + "'");
  }
  return std::span<const double>(data_).subspan(it->second * kSemanticDim,
                                                kSemanticDim);
}

EmbeddingTable load_embeddings(std::istream& in) {
  EmbeddingTable table;
  std::vector<double> values(kSemanticDim);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = internal::split_whitespace(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2 &&
        internal::parse_int<long long>(fields[0]) &&
        internal::parse_int<long long>(fields[1])) {
      continue;  // `count dim` header
    }
    if (fields.size() != kSemanticDim + 1) {
      throw ParseError("expected label and " + std::to_string(kSemanticDim) +
                           " values, got " + std::to_string(fields.size() - 1),
                       line_no);
    }
    for (std::size_t i = 0; i < kSemanticDim; ++i) {
      const auto v = internal::parse_double(fields[i + 1]);
      if (!v) {
        throw ParseError("bad number '" + std::string(fields[i + 1]) + "'",
                         line_no);
      }
      values[i] = *v;
    }
    try {
      table.add(fields[0], values);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

EmbeddingTable load_embeddings_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open embedding file " + path.string());
  return load_embeddings(in);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << kSemanticDim << '\n';
  char buf[32];
  for (const auto& label : table.labels()) {
    out << label;
    for (const double v : table.at(label)) {
      std::snprintf(buf, sizeof(buf), " %.17g", v);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace kgact
