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

#include "kgact/knowledge_graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>

#include "internal/text.hpp"
#include "kgact/error.hpp"

namespace kgact {

std::string_view to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::kAction:
      return "action";
    case ConceptKind::kObject:
      return "object";
    case ConceptKind::kEvidence:
      return "evidence";
  }
  return "evidence";
}

ConceptKind parse_concept_kind(std::string_view text) {
  if (text == "action") return ConceptKind::kAction;
  if (text == "object") return ConceptKind::kObject;
  if (text == "evidence") return ConceptKind::kEvidence;
  throw ParseError("unknown concept kind '" + std::string(text) + "'");
}

std::string canonical_label(std::string_view raw) {
  const std::string_view trimmed = internal::trim(raw);
  std::string out;
  out.reserve(trimmed.size());
  bool in_space = false;
  for (const char c : trimmed) {
    if (internal::is_space(c)) {
      in_space = true;
      continue;
    }
    if (in_space) out.push_back('_');
    in_space = false;
    out.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(c))));
  }
  if (out.empty()) throw DataError("empty concept label");
  return out;
}

std::optional<NodeId> KnowledgeGraph::find(std::string_view label) const {
  const auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId KnowledgeGraph::id(std::string_view label) const {
  if (auto found = find(label)) return *found;
  throw NotFoundError("concept '" + std::string(label) +
                      "' is not in the knowledge graph");
}

Generator KnowledgeGraph::generator(std::string_view label,
                                    ConceptKind kind) const {
  const NodeId node = id(label);
  return Generator{labels_[node], kind, node};
}

std::span<const Neighbor> KnowledgeGraph::neighbors(NodeId id) const {
  if (id >= labels_.size()) throw NotFoundError("node id out of range");
  const auto begin = adjacency_offsets_[id];
  const auto end = adjacency_offsets_[id + 1];
  return std::span<const Neighbor>(adjacency_).subspan(begin, end - begin);
}

double KnowledgeGraph::weight_between(NodeId a, NodeId b) const {
  const auto adj = neighbors(a);
  const auto it = std::lower_bound(
      adj.begin(), adj.end(), b,
      [](const Neighbor& n, NodeId target) { return n.node < target; });
  if (it == adj.end() || it->node != b) return 0.0;
  return it->weight;
}

NodeId GraphBuilder::add_node(std::string_view label) {
  std::string canonical = canonical_label(label);
  const auto it = graph_.index_.find(canonical);
  if (it != graph_.index_.end()) return it->second;
  const auto id = static_cast<NodeId>(graph_.labels_.size());
  graph_.index_.emplace(canonical, id);
  graph_.labels_.push_back(std::move(canonical));
  return id;
}

void GraphBuilder::add_edge(std::string_view src, std::string_view relation,
                            std::string_view dst, double weight) {
  if (!std::isfinite(weight) || weight <= 0.0 || weight > 1.0) {
    throw ContractError("edge weight must lie in (0, 1]");
  }
  const NodeId s = add_node(src);
  const NodeId d = add_node(dst);
  if (s == d) {
    throw ContractError("self-loop on '" + graph_.labels_[s] + "'");
  }
  EdgeKey key{s, d, normalize_relation(relation)};
  std::string flat = std::to_string(s) + '\x1f' + std::to_string(d) + '\x1f' +
                     key.relation;
  const auto it = key_index_.find(flat);
  if (it != key_index_.end()) {
    weights_[it->second] = std::max(weights_[it->second], weight);
    return;
  }
  key_index_.emplace(std::move(flat), keys_.size());
  keys_.push_back(std::move(key));
  weights_.push_back(weight);
}

KnowledgeGraph GraphBuilder::build() && {
  KnowledgeGraph g = std::move(graph_);
  g.edges_.reserve(keys_.size());
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    g.edges_.push_back(
        Edge{keys_[i].src, keys_[i].dst, std::move(keys_[i].relation),
             weights_[i]});
  }

  // Strongest edge per unordered pair, lower edge index on ties.
  std::vector<std::map<NodeId, Neighbor>> collapsed(g.labels_.size());
  for (std::uint32_t e = 0; e < g.edges_.size(); ++e) {
    const Edge& edge = g.edges_[e];
    for (const auto& [from, to] :
         {std::pair{edge.src, edge.dst}, std::pair{edge.dst, edge.src}}) {
      auto [it, inserted] =
          collapsed[from].try_emplace(to, Neighbor{to, edge.weight, e});
      if (!inserted && edge.weight > it->second.weight) {
        it->second = Neighbor{to, edge.weight, e};
      }
    }
  }
  g.adjacency_offsets_.assign(g.labels_.size() + 1, 0);
  for (std::size_t n = 0; n < collapsed.size(); ++n) {
    g.adjacency_offsets_[n + 1] =
        g.adjacency_offsets_[n] + static_cast<std::uint32_t>(collapsed[n].size());
    for (const auto& [_, neighbor] : collapsed[n]) {
      g.adjacency_.push_back(neighbor);
    }
  }
  return g;
}

RelationSet default_relation_whitelist() {
  return {"RelatedTo",   "UsedFor",        "CapableOf", "AtLocation",
          "HasProperty", "ReceivesAction", "PartOf",    "HasA"};
}

std::string normalize_relation(std::string_view relation) {
  relation = internal::trim(relation);
  if (relation.starts_with("/r/")) relation.remove_prefix(3);
  return std::string(relation);
}

KnowledgeGraph load_edges(std::istream& in, const RelationSet& whitelist) {
  if (whitelist.empty()) throw ConfigError("relation whitelist is empty");

  struct Record {
    std::string src;
    std::string relation;
    std::string dst;
    double raw;
  };
  std::vector<Record> kept;
  std::map<std::string, double, std::less<>> relation_max;
  std::size_t line_no = 0;
  std::size_t records = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (internal::trim(line).empty()) continue;
    ++records;
    const auto fields = internal::split(line, '\t');
    if (fields.size() != 4) {
      throw ParseError("expected 4 tab-separated fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    const auto raw = internal::parse_double(fields[3]);
    if (!raw || !std::isfinite(*raw) || *raw < 0.0) {
      throw ParseError("weight must be a finite number >= 0", line_no);
    }
    std::string src;
    std::string dst;
    std::string relation = normalize_relation(fields[1]);
    try {
      src = canonical_label(fields[0]);
      dst = canonical_label(fields[2]);
    } catch (const DataError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (relation.empty()) throw ParseError("empty relation", line_no);
    if (!whitelist.contains(relation) || src == dst || *raw == 0.0) continue;
    auto& max = relation_max[relation];
    max = std::max(max, *raw);
    kept.push_back(Record{std::move(src), std::move(relation), std::move(dst),
                          *raw});
  }
  if (records == 0) return KnowledgeGraph{};
  if (kept.empty()) {
    throw ConfigError("no edges left after relation filtering");
  }

  GraphBuilder builder;
  for (const Record& r : kept) {
    const double scaled = std::min(1.0, r.raw / relation_max.at(r.relation));
    builder.add_edge(r.src, r.relation, r.dst, scaled);
  }
  return std::move(builder).build();
}

KnowledgeGraph load_edges_file(const std::filesystem::path& path,
                               const RelationSet& whitelist) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open edge dump " + path.string());
  return load_edges(in, whitelist);
}

double EgoGraph::prior_sum() const {
  double sum = 0.0;
  for (const auto& e : evidence) sum += e.prior;
  return sum;
}

EgoGraph ego_graph(const KnowledgeGraph& graph, std::string_view center_label,
                   std::size_t max_evidence) {
  if (max_evidence == 0) throw ContractError("max_evidence must be >= 1");
  EgoGraph ego;
  ego.center = graph.generator(center_label, ConceptKind::kObject);

  std::vector<Neighbor> ranked(graph.neighbors(ego.center.id).begin(),
                               graph.neighbors(ego.center.id).end());
  std::sort(ranked.begin(), ranked.end(),
            [&](const Neighbor& a, const Neighbor& b) {
              if (a.weight != b.weight) return a.weight > b.weight;
              return graph.label(a.node) < graph.label(b.node);
            });
  if (ranked.size() > max_evidence) ranked.resize(max_evidence);

  double total = 0.0;
  for (const auto& n : ranked) total += n.weight;
  for (const auto& n : ranked) {
    ego.evidence.push_back(EvidenceEntry{
        Generator{graph.label(n.node), ConceptKind::kEvidence, n.node},
        n.weight / total, graph.edges()[n.edge].relation});
  }
  return ego;
}

AliasMap load_aliases(std::istream& in) {
  AliasMap aliases;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = internal::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = internal::split(line, '\t');
    if (fields.size() != 2) {
      throw ParseError("alias lines need exactly 2 tab-separated fields",
                       line_no);
    }
    const std::string key(internal::trim(fields[0]));
    if (key.empty()) throw ParseError("empty dataset label", line_no);
    std::string target;
    try {
      target = canonical_label(fields[1]);
    } catch (const DataError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!aliases.emplace(key, std::move(target)).second) {
      throw ParseError("duplicate alias '" + key + "'", line_no);
    }
  }
  return aliases;
}

AliasMap load_aliases_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open alias file " + path.string());
  return load_aliases(in);
}

std::string resolve_label(const AliasMap& aliases, std::string_view raw) {
  if (!aliases.empty()) {
    const std::string key(internal::trim(raw));
    if (auto it = aliases.find(key); it != aliases.end()) return it->second;
    if (auto it = aliases.find(canonical_label(raw)); it != aliases.end()) {
      return it->second;
    }
  }
  return canonical_label(raw);
}

}  // namespace kgact
