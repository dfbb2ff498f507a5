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

#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <doctest.h>

#include "kgact/embeddings.hpp"
#include "kgact/error.hpp"
#include "kgact/knowledge_graph.hpp"
#include "support.hpp"

using namespace kgact;

namespace {

KnowledgeGraph load(const std::string& text) {
  std::istringstream in(text);
  return load_edges(in, default_relation_whitelist());
}

std::vector<double> unit_vector(std::size_t i) {
  std::vector<double> v(kSemanticDim, 0.0);
  v[i] = 1.0;
  return v;
}

std::string embedding_line(const std::string& label,
                           const std::vector<double>& v) {
  std::ostringstream out;
  out << label;
  for (const double x : v) out << ' ' << x;
  out << '\n';
  return out.str();
}

}  // namespace

TEST_SUITE("kb_core") {

TEST_CASE("labels are canonicalized") {
  CHECK(canonical_label("  Cutting  Board\t") == "cutting_board");
  CHECK(canonical_label("KNIFE") == "knife");
  CHECK_THROWS_AS(canonical_label("   "), DataError);
  CHECK(parse_concept_kind("evidence") == ConceptKind::kEvidence);
  CHECK_THROWS_AS(parse_concept_kind("verb"), ParseError);
}

TEST_CASE("empty stream gives an empty graph") {
  const auto g = load("");
  CHECK(g.node_count() == 0);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("relations outside the whitelist are dropped") {
  const auto g = load("cut\tRelatedTo\tknife\t2\n"
                      "knife\tUsedFor\tcut\t1\n"
                      "knife\tSynonym\tblade\t1\n");
  CHECK(g.edge_count() == 2);
  CHECK_FALSE(g.contains("blade"));
  CHECK(g.node_count() == 2);
}

TEST_CASE("relation URIs match the whitelist") {
  const auto g = load("/c/en/a\t/r/HasA\tb\t1\n");
  CHECK(g.edge_count() == 1);
  CHECK(normalize_relation("/r/UsedFor") == "UsedFor");
}

TEST_CASE("weights are normalized per relation") {
  const auto g = load("a\tRelatedTo\tb\t2\n"
                      "b\tRelatedTo\tc\t4\n"
                      "c\tUsedFor\td\t0.5\n");
  CHECK(g.weight_between(g.id("a"), g.id("b")) == doctest::Approx(0.5));
  CHECK(g.weight_between(g.id("c"), g.id("b")) == 1.0);
  CHECK(g.weight_between(g.id("c"), g.id("d")) == 1.0);
  CHECK(g.weight_between(g.id("a"), g.id("d")) == 0.0);
}

TEST_CASE("malformed records name their line") {
  try {
    load("a\tRelatedTo\tb\t1\nbroken line\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(load("a\tRelatedTo\tb\t-1\n"), ParseError);
  CHECK_THROWS_AS(load("a\tRelatedTo\tb\tnan\n"), ParseError);
}

TEST_CASE("a stream that keeps no edge is a configuration error") {
  CHECK_THROWS_AS(load("a\tSynonym\tb\t1\n"), ConfigError);
  CHECK_THROWS_AS(load("a\tRelatedTo\ta\t1\n"), ConfigError);
  std::istringstream in("a\tRelatedTo\tb\t1\n");
  CHECK_THROWS_AS(load_edges(in, RelationSet{}), ConfigError);
}

TEST_CASE("duplicate records match an independent recount") {
  Rng rng(7);
  std::ostringstream dump;
  static const char* kRelations[] = {"RelatedTo", "UsedFor", "Synonym", "HasA"};
  for (int i = 0; i < 50; ++i) {
    const auto a = rng.below(9);
    auto b = rng.below(9);
    if (b == a) b = (b + 1) % 9;
    dump << "Node " << a << '\t' << kRelations[rng.below(4)] << '\t' << "node_"
         << b << '\t' << 1 + rng.below(3) << '\n';
  }
  const std::string text = dump.str();

  // Recount line by line without the library.
  std::set<std::tuple<std::string, std::string, std::string>> keys;
  std::set<std::string> labels;
  std::istringstream lines(text);
  std::string src, rel, dst, w;
  while (std::getline(lines, src, '\t') && std::getline(lines, rel, '\t') &&
         std::getline(lines, dst, '\t') && std::getline(lines, w)) {
    if (rel == "Synonym") continue;
    for (auto& c : src) c = c == ' ' ? '_' : static_cast<char>(std::tolower(c));
    keys.emplace(src, dst, rel);
    labels.insert(src);
    labels.insert(dst);
  }
  REQUIRE(keys.size() < 50);

  const auto g = load(text);
  CHECK(g.edge_count() == keys.size());
  CHECK(g.node_count() == labels.size());
}

TEST_CASE("loading twice gives the same graph") {
  const std::string text =
      "a\tRelatedTo\tb\t3\nb\tHasA\tc\t1\nc\tRelatedTo\ta\t2\na\tRelatedTo\tb\t1\n";
  const auto g1 = load(text);
  const auto g2 = load(text);
  REQUIRE(g1.node_count() == g2.node_count());
  REQUIRE(g1.edge_count() == g2.edge_count());
  for (NodeId n = 0; n < g1.node_count(); ++n) {
    const NodeId m = g2.id(g1.label(n));
    std::map<std::string, double> adj1, adj2;
    for (const auto& nb : g1.neighbors(n)) adj1[g1.label(nb.node)] = nb.weight;
    for (const auto& nb : g2.neighbors(m)) adj2[g2.label(nb.node)] = nb.weight;
    CHECK(adj1 == adj2);
  }
}

TEST_CASE("builder contracts") {
  GraphBuilder b;
  CHECK_THROWS_AS(b.add_edge("a", "RelatedTo", "a", 1.0), ContractError);
  CHECK_THROWS_AS(b.add_edge("a", "RelatedTo", "b", 0.0), ContractError);
  CHECK_THROWS_AS(b.add_edge("a", "RelatedTo", "b", 1.5), ContractError);
  b.add_edge("a", "RelatedTo", "b", 0.3);
  b.add_edge("a", "RelatedTo", "b", 0.6);
  b.add_edge("b", "UsedFor", "a", 0.4);
  const auto g = std::move(b).build();
  CHECK(g.edge_count() == 2);
  CHECK(g.weight_between(g.id("b"), g.id("a")) == 0.6);
  CHECK(g.degree(g.id("a")) == 1);
  CHECK_THROWS_AS(g.id("zzz"), NotFoundError);
}

TEST_CASE("ego graph of a single neighbor") {
  GraphBuilder b;
  b.add_edge("cup", "HasA", "handle", 0.7);
  const auto ego = ego_graph(std::move(b).build(), "cup", 5);
  REQUIRE(ego.evidence.size() == 1);
  CHECK(ego.evidence[0].generator.label == "handle");
  CHECK(ego.evidence[0].generator.kind == ConceptKind::kEvidence);
  CHECK(ego.evidence[0].prior == 1.0);
  CHECK(ego.evidence[0].relation == "HasA");
  CHECK(ego.center.kind == ConceptKind::kObject);
}

TEST_CASE("ego graph priors are truncated and renormalized") {
  GraphBuilder b;
  b.add_edge("cup", "HasA", "handle", 0.6);
  b.add_edge("cup", "AtLocation", "table", 0.2);
  b.add_edge("saucer", "RelatedTo", "cup", 0.2);
  const auto ego = ego_graph(std::move(b).build(), "cup", 2);
  REQUIRE(ego.evidence.size() == 2);
  CHECK(ego.evidence[0].generator.label == "handle");
  CHECK(ego.evidence[0].prior == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(ego.evidence[1].prior == doctest::Approx(0.25).epsilon(1e-12));
  // Equal weights fall back to label order.
  CHECK(ego.evidence[1].generator.label == "saucer");
  CHECK(std::abs(ego.prior_sum() - 1.0) < 1e-9);
}

TEST_CASE("ego graph of an isolated node is empty") {
  GraphBuilder b;
  b.add_node("rock");
  b.add_edge("a", "RelatedTo", "b", 1.0);
  const auto g = std::move(b).build();
  const auto ego = ego_graph(g, "rock", 3);
  CHECK(ego.evidence.empty());
  CHECK(ego.prior_sum() == 0.0);
  CHECK_THROWS_AS(ego_graph(g, "missing", 3), NotFoundError);
  CHECK_THROWS_AS(ego_graph(g, "rock", 0), ContractError);
}

TEST_CASE("ego graph size and prior sums on random graphs") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto rg = testing::random_graph(rng, 10, 0.4);
    for (NodeId n = 0; n < rg.graph.node_count(); ++n) {
      const std::size_t k = 1 + rng.below(6);
      const auto ego = ego_graph(rg.graph, rg.graph.label(n), k);
      CHECK(ego.evidence.size() == std::min(k, rg.graph.degree(n)));
      std::set<std::string> seen;
      for (const auto& e : ego.evidence) {
        CHECK(e.generator.label != ego.center.label);
        CHECK(seen.insert(e.generator.label).second);
      }
      if (!ego.evidence.empty()) CHECK(std::abs(ego.prior_sum() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("aliases") {
  std::istringstream in("# dataset\tcanonical\nCutBoard\tcutting_board\n\n");
  const auto aliases = load_aliases(in);
  CHECK(resolve_label(aliases, "CutBoard") == "cutting_board");
  CHECK(resolve_label(aliases, " Frying Pan") == "frying_pan");
  std::istringstream bad("a\tb\nA\tc\na\td\n");
  CHECK_THROWS_AS(load_aliases(bad), ParseError);
}

TEST_CASE("embeddings are stored unit length") {
  std::vector<double> v(kSemanticDim, 0.0);
  v[0] = 3.0;
  v[1] = 4.0;
  const std::string text = "3 300\n" + embedding_line("Pan", v) +
                           embedding_line("unit", unit_vector(0));
  std::istringstream in(text);
  const auto table = load_embeddings(in);
  REQUIRE(table.size() == 2);
  const auto pan = table.at("pan");
  CHECK(pan[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(pan[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(pan[2] == 0.0);
  const auto unit = table.at("unit");
  CHECK(std::vector<double>(unit.begin(), unit.end()) == unit_vector(0));
  CHECK_THROWS_AS(table.at("nope"), NotFoundError);
}

TEST_CASE("embedding errors") {
  std::istringstream zeros(embedding_line("z", std::vector<double>(kSemanticDim)));
  CHECK_THROWS_AS(load_embeddings(zeros), DataError);
  std::istringstream short_row("x 1 2 3\n");
  CHECK_THROWS_AS(load_embeddings(short_row), ParseError);
  std::istringstream dup(embedding_line("x", unit_vector(1)) +
                         embedding_line("X", unit_vector(2)));
  CHECK_THROWS_AS(load_embeddings(dup), ContractError);
}

TEST_CASE("embeddings round trip through text") {
  EmbeddingTable table;
  Rng rng(3);
  std::vector<double> v(kSemanticDim);
  for (auto& x : v) x = rng.normal();
  table.add("thing", v);
  std::ostringstream out;
  write_embeddings(out, table);
  std::istringstream in(out.str());
  const auto back = load_embeddings(in);
  const auto a = table.at("thing");
  const auto b = back.at("thing");
  double norm = 0.0;
  for (std::size_t i = 0; i < kSemanticDim; ++i) {
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
    norm += b[i] * b[i];
  }
  CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
}

}  // TEST_SUITE
