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

// Shared fixtures and independent oracles for the test suites.

#ifndef KGACT_TESTS_SUPPORT_HPP_
#define KGACT_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "kgact/knowledge_graph.hpp"
#include "kgact/projection.hpp"
#include "kgact/rng.hpp"

namespace kgact::testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "kgact-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RawEdge {
  std::size_t a;
  std::size_t b;
  std::string relation;
  double weight;
};

// Random undirected multigraph over labels n0..n{n-1}, kept as a plain
// edge list so oracles never touch the library's adjacency.
struct RandomGraph {
  std::size_t nodes = 0;
  std::vector<RawEdge> edges;
  KnowledgeGraph graph;

  std::string label(std::size_t i) const { return "n" + std::to_string(i); }

  // Strongest weight between two labels in either direction, 0 if none.
  std::vector<std::vector<double>> weight_matrix() const {
    std::vector<std::vector<double>> w(nodes, std::vector<double>(nodes, 0.0));
    for (const auto& e : edges) {
      w[e.a][e.b] = std::max(w[e.a][e.b], e.weight);
      w[e.b][e.a] = std::max(w[e.b][e.a], e.weight);
    }
    return w;
  }
};

inline RandomGraph random_graph(Rng& rng, std::size_t nodes, double density) {
  RandomGraph g;
  g.nodes = nodes;
  GraphBuilder builder;
  for (std::size_t i = 0; i < nodes; ++i) builder.add_node(g.label(i));
  static const char* kRelations[] = {"RelatedTo", "UsedFor", "AtLocation"};
  for (std::size_t a = 0; a < nodes; ++a) {
    for (std::size_t b = a + 1; b < nodes; ++b) {
      if (rng.uniform() >= density) continue;
      const bool flip = rng.uniform() < 0.5;
      RawEdge e{flip ? b : a, flip ? a : b, kRelations[rng.below(3)],
                std::round(rng.uniform(0.05, 1.0) * 1000.0) / 1000.0};
      g.edges.push_back(e);
      if (rng.uniform() < 0.15) {
        g.edges.push_back(RawEdge{e.b, e.a, "PartOf",
                                  std::round(rng.uniform(0.05, 1.0) * 1000.0) /
                                      1000.0});
      }
    }
  }
  for (const auto& e : g.edges) {
    builder.add_edge(g.label(e.a), e.relation, g.label(e.b), e.weight);
  }
  g.graph = std::move(builder).build();
  return g;
}

struct OraclePath {
  std::vector<std::string> labels;
  double total = 0.0;
  auto operator<=>(const OraclePath&) const = default;
};

// Brute force over ordered selections of distinct intermediate nodes:
// every sequence from..to with at most l_max hops whose consecutive pairs
// are adjacent is a path.
inline std::vector<OraclePath> permutation_paths(const RandomGraph& g,
                                                 std::size_t from,
                                                 std::size_t to, double lambda,
                                                 int l_max) {
  const auto w = g.weight_matrix();
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < g.nodes; ++i) {
    if (i != from && i != to) others.push_back(i);
  }
  std::vector<OraclePath> out;
  const auto score = [&](const std::vector<std::size_t>& seq) {
    OraclePath p;
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
      const double weight = w[seq[k]][seq[k + 1]];
      if (weight <= 0.0) return;
      p.total += std::exp(-lambda * static_cast<double>(k + 1)) * weight;
    }
    for (const auto n : seq) p.labels.push_back(g.label(n));
    out.push_back(std::move(p));
  };
  for (int inner = 0; inner < l_max && inner <= static_cast<int>(others.size());
       ++inner) {
    // Every subset of size `inner`, then every order of it.
    std::vector<bool> pick(others.size(), false);
    std::fill(pick.begin(), pick.begin() + inner, true);
    do {
      std::vector<std::size_t> chosen;
      for (std::size_t i = 0; i < others.size(); ++i) {
        if (pick[i]) chosen.push_back(others[i]);
      }
      std::sort(chosen.begin(), chosen.end());
      do {
        std::vector<std::size_t> seq{from};
        seq.insert(seq.end(), chosen.begin(), chosen.end());
        seq.push_back(to);
        score(seq);
      } while (std::next_permutation(chosen.begin(), chosen.end()));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct RidgeProblem {
  std::vector<TrainingPair> pairs;
  std::vector<std::vector<double>> w0;  // d x k
  std::vector<double> b0;
};

inline RidgeProblem planted(Rng& rng, std::size_t n, std::size_t d, std::size_t k,
                double noise) {
  RidgeProblem p;
  p.w0.assign(d, std::vector<double>(k));
  for (auto& row : p.w0) {
    for (auto& x : row) x = rng.normal();
  }
  p.b0.resize(k);
  for (auto& x : p.b0) x = rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    TrainingPair pair;
    pair.features.resize(d);
    for (auto& x : pair.features) x = rng.normal();
    pair.target = p.b0;
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t r = 0; r < d; ++r) pair.target[j] += p.w0[r][j] * pair.features[r];
      pair.target[j] += noise * rng.normal();
    }
    p.pairs.push_back(std::move(pair));
  }
  return p;
}

// Full-batch gradient descent on the ridge objective, in plain loops.
inline void gradient_descent(const std::vector<TrainingPair>& pairs, double mu,
                      std::vector<std::vector<double>>& w, std::vector<double>& b) {
  const std::size_t n = pairs.size();
  const std::size_t d = pairs[0].features.size();
  const std::size_t k = pairs[0].target.size();
  w.assign(d, std::vector<double>(k, 0.0));
  b.assign(k, 0.0);
  // Step below 1 / L with L bounded by the squared Frobenius norm of [X 1].
  double frob = static_cast<double>(n);
  for (const auto& p : pairs) {
    for (const double x : p.features) frob += x * x;
  }
  const double step = 1.0 / (2.0 * frob / static_cast<double>(n) + 2.0 * mu);
  std::vector<std::vector<double>> gw(d, std::vector<double>(k));
  std::vector<double> gb(k);
  for (int it = 0; it < 200000; ++it) {
    for (auto& row : gw) std::fill(row.begin(), row.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (const auto& p : pairs) {
      for (std::size_t j = 0; j < k; ++j) {
        double r = b[j] - p.target[j];
        for (std::size_t i = 0; i < d; ++i) r += w[i][j] * p.features[i];
        const double g = 2.0 * r / static_cast<double>(n);
        gb[j] += g;
        for (std::size_t i = 0; i < d; ++i) gw[i][j] += g * p.features[i];
      }
    }
    double largest = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      b[j] -= step * gb[j];
      largest = std::max(largest, std::abs(gb[j]));
      for (std::size_t i = 0; i < d; ++i) {
        const double g = gw[i][j] + 2.0 * mu * w[i][j];
        w[i][j] -= step * g;
        largest = std::max(largest, std::abs(g));
      }
    }
    if (largest < 1e-13) break;
  }
}

}  // namespace kgact::testing

#endif  // KGACT_TESTS_SUPPORT_HPP_
