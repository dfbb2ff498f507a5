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

#ifndef KGACT_EMBEDDINGS_HPP_
#define KGACT_EMBEDDINGS_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgact {

// Dimension of the concept embedding space.
inline constexpr std::size_t kSemanticDim = 300;

// label -> unit-norm vector of kSemanticDim reals. Immutable after load.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  // Normalizes `vector` before storing. Throws DataError on a zero or
  // non-finite vector and ContractError on a wrong dimension or a duplicate
  // label.
  void add(std::string_view label, std::span<const double> vector);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return kSemanticDim; }
  bool contains(std::string_view label) const;
  // Throws NotFoundError.
  std::span<const double> at(std::string_view label) const;
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

// Whitespace-separated `label v1 ... v300` records, optionally preceded by
// a `count dim` header line. Labels are canonicalized.
EmbeddingTable load_embeddings(std::istream& in);
EmbeddingTable load_embeddings_file(const std::filesystem::path& path);

void write_embeddings(std::ostream& out, const EmbeddingTable& table);

}  // namespace kgact

#endif  // KGACT_EMBEDDINGS_HPP_
