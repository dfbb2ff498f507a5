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

#include "kgact/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "internal/parallel.hpp"
#include "kgact/error.hpp"
#include "kgact/hashing.hpp"

namespace kgact {
namespace {

void check_search_args(const KnowledgeGraph& graph, NodeId from, NodeId to,
                       double lambda, int l_max) {
  if (from >= graph.node_count() || to >= graph.node_count()) {
    throw ContractError("path endpoint not in graph");
  }
  if (from == to) throw ContractError("path endpoints must differ");
  if (l_max < 1 || l_max > kMaxPathHops) {
    throw ContractError("l_max must lie in [1, " +
                        std::to_string(kMaxPathHops) + "]");
  }
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw ContractError("lambda must be finite and >= 0");
  }
}

class PathEnumerator {
 public:
  PathEnumerator(const KnowledgeGraph& graph, NodeId to, double lambda,
                 int l_max)
      : graph_(graph),
        to_(to),
        l_max_(l_max),
        decay_(decay_weights(lambda, l_max)),
        visited_(graph.node_count(), 0) {}

  std::vector<PathScore> run(NodeId from) {
    nodes_.assign(1, from);
    visited_[from] = 1;
    visit(from, 0.0);
    return std::move(out_);
  }

 private:
  void visit(NodeId u, double partial) {
    const auto depth = static_cast<int>(contributions_.size());
    for (const Neighbor& n : graph_.neighbors(u)) {
      if (visited_[n.node]) continue;
      const double contribution = decay_[depth] * n.weight;
      nodes_.push_back(n.node);
      contributions_.push_back(contribution);
      if (n.node == to_) {
        out_.push_back(PathScore{nodes_, contributions_, partial + contribution});
      } else if (depth + 1 < l_max_) {
        visited_[n.node] = 1;
        visit(n.node, partial + contribution);
        visited_[n.node] = 0;
      }
      nodes_.pop_back();
      contributions_.pop_back();
    }
  }

  const KnowledgeGraph& graph_;
  NodeId to_;
  int l_max_;
  std::vector<double> decay_;
  std::vector<char> visited_;
  std::vector<NodeId> nodes_;
  std::vector<double> contributions_;
  std::vector<PathScore> out_;
};

class MaxPathSearch {
 public:
  MaxPathSearch(const KnowledgeGraph& graph, NodeId to, double lambda,
                int l_max)
      : graph_(graph),
        to_(to),
        l_max_(l_max),
        decay_(decay_weights(lambda, l_max)),
        remaining_(static_cast<std::size_t>(l_max) + 1, 0.0),
        visited_(graph.node_count(), 0) {
    // remaining_[d]: largest total edges d+1..l_max could still add.
    for (int d = l_max - 1; d >= 0; --d) {
      remaining_[d] = remaining_[d + 1] + decay_[d];
    }
  }

  double run(NodeId from) {
    visited_[from] = 1;
    visit(from, 0, 0.0);
    return best_;
  }

 private:
  void visit(NodeId u, int depth, double partial) {
    if ((partial + remaining_[depth]) * (1.0 + 1e-12) < best_) return;
    for (const Neighbor& n : graph_.neighbors(u)) {
      if (visited_[n.node]) continue;
      const double total = partial + decay_[depth] * n.weight;
      if (n.node == to_) {
        best_ = std::max(best_, total);
      } else if (depth + 1 < l_max_) {
        visited_[n.node] = 1;
        visit(n.node, depth + 1, total);
        visited_[n.node] = 0;
      }
    }
  }

  const KnowledgeGraph& graph_;
  NodeId to_;
  int l_max_;
  std::vector<double> decay_;
  std::vector<double> remaining_;
  std::vector<char> visited_;
  double best_ = 0.0;
};

}  // namespace

std::vector<double> decay_weights(double lambda, int l_max) {
  std::vector<double> w(static_cast<std::size_t>(std::max(l_max, 0)));
  for (int k = 1; k <= l_max; ++k) w[k - 1] = std::exp(-lambda * k);
  return w;
}

std::vector<PathScore> enumerate_paths(const KnowledgeGraph& graph,
                                       NodeId from, NodeId to, double lambda,
                                       int l_max) {
  check_search_args(graph, from, to, lambda, l_max);
  return PathEnumerator(graph, to, lambda, l_max).run(from);
}

double path_affinity(const KnowledgeGraph& graph, NodeId action,
                     NodeId object, double lambda, int l_max) {
  check_search_args(graph, action, object, lambda, l_max);
  return MaxPathSearch(graph, object, lambda, l_max).run(action);
}

bool path_precedes(const KnowledgeGraph& graph, const PathScore& a,
                   const PathScore& b) {
  if (a.total != b.total) return a.total > b.total;
  if (a.hops() != b.hops()) return a.hops() < b.hops();
  return std::lexicographical_compare(
      a.nodes.begin(), a.nodes.end(), b.nodes.begin(), b.nodes.end(),
      [&](NodeId x, NodeId y) { return graph.label(x) < graph.label(y); });
}

std::optional<PathScore> best_path(const KnowledgeGraph& graph, NodeId action,
                                   NodeId object, double lambda, int l_max) {
  auto paths = enumerate_paths(graph, action, object, lambda, l_max);
  if (paths.empty()) return std::nullopt;
  return *std::min_element(paths.begin(), paths.end(),
                           [&](const PathScore& a, const PathScore& b) {
                             return path_precedes(graph, a, b);
                           });
}

std::string whitelist_digest(const RelationSet& whitelist) {
  std::string joined;
  for (const auto& r : whitelist) {
    joined += r;
    joined += '\n';
  }
  return sha256_hex(joined);
}

std::string vocab_digest(std::span<const std::string> actions,
                         std::span<const std::string> objects) {
  std::string joined = "actions\n";
  for (const auto& a : actions) joined += a + '\n';
  joined += "objects\n";
  for (const auto& o : objects) joined += o + '\n';
  return sha256_hex(joined);
}

std::optional<std::size_t> AffinityCache::action_index(
    std::string_view label) const {
  const auto it = std::find(actions.begin(), actions.end(), label);
  if (it == actions.end()) return std::nullopt;
  return static_cast<std::size_t>(it - actions.begin());
}

std::optional<std::size_t> AffinityCache::object_index(
    std::string_view label) const {
  const auto it = std::find(objects.begin(), objects.end(), label);
  if (it == objects.end()) return std::nullopt;
  return static_cast<std::size_t>(it - objects.begin());
}

void normalize_affinities(AffinityCache& cache) {
  if (cache.raw.size() != cache.rows() * cache.cols()) {
    throw ContractError("affinity matrix has the wrong size");
  }
  double max = 0.0;
  for (const double v : cache.raw) max = std::max(max, v);
  if (!(max > 0.0)) {
    throw ConfigError(
        "affinity matrix is all zero: the graph relates no action to any "
        "object");
  }
  cache.normalized.resize(cache.raw.size());
  for (std::size_t i = 0; i < cache.raw.size(); ++i) {
    cache.normalized[i] = std::clamp(cache.raw[i] / max, cache.epsilon, 1.0);
  }
}

AffinityCache make_affinity_shell(std::span<const Generator> actions,
                                  std::span<const Generator> objects,
                                  const AffinityParams& params,
                                  const RelationSet& whitelist) {
  if (actions.empty() || objects.empty()) {
    throw ConfigError("action and object vocabularies must be non-empty");
  }
  if (!(params.epsilon > 0.0 && params.epsilon <= 1.0)) {
    throw ConfigError("affinity floor must lie in (0, 1]");
  }
  AffinityCache cache;
  for (const auto& a : actions) cache.actions.push_back(a.label);
  for (const auto& o : objects) cache.objects.push_back(o.label);
  cache.epsilon = params.epsilon;
  cache.fingerprint = AffinityFingerprint{
      params.lambda, params.l_max, whitelist_digest(whitelist),
      vocab_digest(cache.actions, cache.objects)};
  cache.raw.assign(actions.size() * objects.size(), 0.0);
  return cache;
}

AffinityCache build_affinity_matrix(const KnowledgeGraph& graph,
                                    std::span<const Generator> actions,
                                    std::span<const Generator> objects,
                                    const AffinityParams& params,
                                    const RelationSet& whitelist) {
  AffinityCache cache = make_affinity_shell(actions, objects, params, whitelist);
  const auto n_obj = static_cast<std::ptrdiff_t>(objects.size());
  const auto cells = static_cast<std::ptrdiff_t>(cache.raw.size());
  internal::ErrorSlot error;

#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t cell = 0; cell < cells; ++cell) {
    const auto& a = actions[cell / n_obj];
    const auto& o = objects[cell % n_obj];
    if (a.id == o.id) continue;
    error.capture([&] {
      cache.raw[cell] =
          path_affinity(graph, a.id, o.id, params.lambda, params.l_max);
    });
  }
  error.rethrow();

  normalize_affinities(cache);
  return cache;
}

void save_affinity_cache(const std::filesystem::path& path,
                         const AffinityCache& cache) {
  nlohmann::ordered_json j;
  j["fingerprint"] = {{"lambda", cache.fingerprint.lambda},
                      {"l_max", cache.fingerprint.l_max},
                      {"whitelist_sha", cache.fingerprint.whitelist_sha},
                      {"vocab_sha", cache.fingerprint.vocab_sha}};
  j["epsilon"] = cache.epsilon;
  j["actions"] = cache.actions;
  j["objects"] = cache.objects;
  j["raw"] = cache.raw;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << j.dump() << '\n';
}

AffinityCache load_affinity_cache(const std::filesystem::path& path,
                                  const AffinityFingerprint& expected) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open affinity cache " + path.string());
  AffinityCache cache;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto& fp = j.at("fingerprint");
    cache.fingerprint = AffinityFingerprint{
        fp.at("lambda").get<double>(), fp.at("l_max").get<int>(),
        fp.at("whitelist_sha").get<std::string>(),
        fp.at("vocab_sha").get<std::string>()};
    cache.epsilon = j.at("epsilon").get<double>();
    cache.actions = j.at("actions").get<std::vector<std::string>>();
    cache.objects = j.at("objects").get<std::vector<std::string>>();
    cache.raw = j.at("raw").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (cache.fingerprint != expected) {
    throw ConfigError(path.string() +
                      ": affinity cache fingerprint does not match the "
                      "current configuration");
  }
  if (vocab_digest(cache.actions, cache.objects) != cache.fingerprint.vocab_sha) {
    throw ParseError(path.string() + ": vocabulary digest mismatch");
  }
  for (const double v : cache.raw) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ParseError(path.string() + ": invalid affinity value");
    }
  }
  normalize_affinities(cache);
  return cache;
}

}  // namespace kgact
