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

#ifndef KGACT_KNOWLEDGE_GRAPH_HPP_
#define KGACT_KNOWLEDGE_GRAPH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgact {

enum class ConceptKind { kAction, kObject, kEvidence };

std::string_view to_string(ConceptKind kind);
// Accepts "action", "object", "evidence". Throws ParseError otherwise.
ConceptKind parse_concept_kind(std::string_view text);

// Trim, lowercase, and replace inner whitespace runs with '_'.
// Throws DataError when nothing is left.
std::string canonical_label(std::string_view raw);

using NodeId = std::uint32_t;

// A single concept. The kind is a role assigned by the vocabulary that
// references the node, not a property of the graph.
struct Generator {
  std::string label;
  ConceptKind kind = ConceptKind::kEvidence;
  NodeId id = 0;

  friend bool operator==(const Generator&, const Generator&) = default;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  std::string relation;
  double weight = 0.0;  // in (0, 1]
};

// Undirected view of the strongest edge between a node and one neighbor.
struct Neighbor {
  NodeId node = 0;
  double weight = 0.0;
  std::uint32_t edge = 0;  // index into KnowledgeGraph::edges()
};

// Immutable weighted concept graph. Built through GraphBuilder or
// load_edges(); safe for concurrent reads.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  std::size_t node_count() const { return labels_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return labels_.empty(); }

  const std::string& label(NodeId id) const { return labels_.at(id); }
  std::optional<NodeId> find(std::string_view label) const;
  // Throws NotFoundError naming the label.
  NodeId id(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label).has_value(); }
  Generator generator(std::string_view label, ConceptKind kind) const;

  std::span<const Edge> edges() const { return edges_; }
  // Sorted by neighbor id; parallel edges and both directions collapsed
  // to the strongest one.
  std::span<const Neighbor> neighbors(NodeId id) const;
  std::size_t degree(NodeId id) const { return neighbors(id).size(); }
  // Collapsed undirected weight, 0 when the nodes are not adjacent.
  double weight_between(NodeId a, NodeId b) const;

 private:
  friend class GraphBuilder;

  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> adjacency_offsets_;
  std::vector<Neighbor> adjacency_;
};

class GraphBuilder {
 public:
  // Returns the id of the canonicalized label, creating the node if needed.
  NodeId add_node(std::string_view label);
  // Weight must lie in (0, 1]. A repeated (src, dst, relation) keeps the
  // larger weight. Self-loops are a ContractError.
  void add_edge(std::string_view src, std::string_view relation,
                std::string_view dst, double weight);

  KnowledgeGraph build() &&;

 private:
  struct EdgeKey {
    NodeId src;
    NodeId dst;
    std::string relation;
    auto operator<=>(const EdgeKey&) const = default;
  };

  KnowledgeGraph graph_;
  std::vector<EdgeKey> keys_;
  std::vector<double> weights_;
  std::unordered_map<std::string, std::size_t> key_index_;
};

using RelationSet = std::set<std::string, std::less<>>;

RelationSet default_relation_whitelist();

// Strips a leading "/r/" so ConceptNet-style relation URIs match plain
// names.
std::string normalize_relation(std::string_view relation);

// Reads `start<TAB>relation<TAB>end<TAB>weight` records. Only whitelisted
// relations are kept; weights are divided by the per-relation maximum.
// Zero raw weights and self-loops are dropped. An empty stream yields an
// empty graph; a non-empty stream that retains nothing is a ConfigError.
KnowledgeGraph load_edges(std::istream& in, const RelationSet& whitelist);
KnowledgeGraph load_edges_file(const std::filesystem::path& path,
                               const RelationSet& whitelist);

struct EvidenceEntry {
  Generator generator;  // kind is always kEvidence
  double prior = 0.0;
  std::string relation;
};

// Radius-1 neighborhood of an object concept with renormalized priors.
struct EgoGraph {
  Generator center;
  std::vector<EvidenceEntry> evidence;

  double prior_sum() const;
};

// Neighbors ranked by weight (ties by label), truncated to max_evidence,
// priors renormalized to sum to one.
EgoGraph ego_graph(const KnowledgeGraph& graph, std::string_view center_label,
                   std::size_t max_evidence);

// dataset label -> canonical label.
using AliasMap = std::unordered_map<std::string, std::string>;

// `dataset_label<TAB>canonical_label` lines; blank lines and '#' comments
// are skipped.
AliasMap load_aliases(std::istream& in);
AliasMap load_aliases_file(const std::filesystem::path& path);

// Exact alias lookup first, canonicalization otherwise.
std::string resolve_label(const AliasMap& aliases, std::string_view raw);

}  // namespace kgact

#endif  // KGACT_KNOWLEDGE_GRAPH_HPP_
