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

#ifndef KGACT_AFFINITY_HPP_
#define KGACT_AFFINITY_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgact/knowledge_graph.hpp"

namespace kgact {

inline constexpr int kMaxPathHops = 5;

// A simple path scored from its first node. Edge k (1-based) contributes
// exp(-lambda * k) * weight_k.
struct PathScore {
  std::vector<NodeId> nodes;
  std::vector<double> contributions;
  double total = 0.0;

  std::size_t hops() const { return contributions.size(); }
};

struct AffinityParams {
  double lambda = 0.5;
  int l_max = 3;
  double epsilon = 1e-4;  // floor on normalized affinities
};

// Decay factors exp(-lambda * k) for k = 1..l_max, index k-1.
std::vector<double> decay_weights(double lambda, int l_max);

// Every simple path from `from` to `to` with at most l_max hops. Edges are
// traversed undirected. Output is in DFS order over ascending neighbor ids.
std::vector<PathScore> enumerate_paths(const KnowledgeGraph& graph,
                                       NodeId from, NodeId to, double lambda,
                                       int l_max);

// Maximum path total, 0 when no path exists. Branch-and-bound search that
// never materializes the path set.
double path_affinity(const KnowledgeGraph& graph, NodeId action,
                     NodeId object, double lambda, int l_max);

// Highest-scoring path; ties go to fewer hops, then to the lexicographically
// smaller label sequence.
std::optional<PathScore> best_path(const KnowledgeGraph& graph, NodeId action,
                                   NodeId object, double lambda, int l_max);

// Order used by best_path: true when `a` beats `b`.
bool path_precedes(const KnowledgeGraph& graph, const PathScore& a,
                   const PathScore& b);

struct AffinityFingerprint {
  double lambda = 0.0;
  int l_max = 0;
  std::string whitelist_sha;
  std::string vocab_sha;

  friend bool operator==(const AffinityFingerprint&,
                         const AffinityFingerprint&) = default;
};

std::string whitelist_digest(const RelationSet& whitelist);
std::string vocab_digest(std::span<const std::string> actions,
                         std::span<const std::string> objects);

// Action x object path affinities, row-major by action.
struct AffinityCache {
  std::vector<std::string> actions;
  std::vector<std::string> objects;
  std::vector<double> raw;
  std::vector<double> normalized;  // clamp(raw / max(raw), epsilon, 1)
  double epsilon = 1e-4;
  AffinityFingerprint fingerprint;

  std::size_t rows() const { return actions.size(); }
  std::size_t cols() const { return objects.size(); }
  double raw_at(std::size_t a, std::size_t o) const {
    return raw[a * objects.size() + o];
  }
  double normalized_at(std::size_t a, std::size_t o) const {
    return normalized[a * objects.size() + o];
  }
  std::optional<std::size_t> action_index(std::string_view label) const;
  std::optional<std::size_t> object_index(std::string_view label) const;
};

// Fills `normalized` from `raw`. Throws ConfigError on an all-zero matrix.
void normalize_affinities(AffinityCache& cache);

AffinityCache make_affinity_shell(std::span<const Generator> actions,
                                  std::span<const Generator> objects,
                                  const AffinityParams& params,
                                  const RelationSet& whitelist);

// Cells run in parallel. A cell whose action and object are the same node
// has no path and scores 0.
AffinityCache build_affinity_matrix(const KnowledgeGraph& graph,
                                    std::span<const Generator> actions,
                                    std::span<const Generator> objects,
                                    const AffinityParams& params,
                                    const RelationSet& whitelist);

// Canonical JSON: {"fingerprint": {lambda, l_max, whitelist_sha, vocab_sha},
// "epsilon", "actions", "objects", "raw": row-major}.
void save_affinity_cache(const std::filesystem::path& path,
                         const AffinityCache& cache);
// Throws ConfigError when the stored fingerprint differs from `expected`.
AffinityCache load_affinity_cache(const std::filesystem::path& path,
                                  const AffinityFingerprint& expected);

}  // namespace kgact

#endif  // KGACT_AFFINITY_HPP_
