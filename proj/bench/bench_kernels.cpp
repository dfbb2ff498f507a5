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

// Serial reference kernels against their OpenMP counterparts.

#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "kgact/affinity.hpp"
#include "kgact/grounding.hpp"
#include "kgact/inference.hpp"
#include "kgact/rng.hpp"
#include "kgact/serial.hpp"

namespace {

using namespace kgact;

struct Fixture {
  KnowledgeGraph graph;
  std::vector<Generator> actions;
  std::vector<Generator> objects;
  std::vector<EgoGraph> egos;
  LikelihoodTable table;
  AffinityCache cache;
  std::vector<double> object_scores;
  std::vector<double> action_priors;
};

std::string name(const char* prefix, std::size_t i) {
  return std::string(prefix) + std::to_string(i);
}

Fixture make_fixture(std::size_t n_act, std::size_t n_obj) {
  Rng rng(42);
  const std::size_t n_ev = 4 * n_obj;
  GraphBuilder builder;
  for (std::size_t o = 0; o < n_obj; ++o) {
    builder.add_edge(name("a", o % n_act), "RelatedTo", name("o", o), 1.0);
    for (int j = 0; j < 6; ++j) {
      builder.add_edge(name("o", o), "HasA", name("e", rng.below(n_ev)),
                       rng.uniform(0.1, 1.0));
    }
  }
  for (std::size_t i = 0; i < 3 * n_obj; ++i) {
    builder.add_edge(name("a", rng.below(n_act)), "RelatedTo",
                     name("o", rng.below(n_obj)), rng.uniform(0.05, 0.5));
  }
  Fixture f;
  f.graph = std::move(builder).build();
  for (std::size_t a = 0; a < n_act; ++a) {
    f.actions.push_back(f.graph.generator(name("a", a), ConceptKind::kAction));
  }
  for (std::size_t o = 0; o < n_obj; ++o) {
    f.objects.push_back(f.graph.generator(name("o", o), ConceptKind::kObject));
  }
  f.egos = build_ego_graphs(f.objects, f.graph, 10);
  f.table.clip_id = "bench";
  for (std::int64_t frame = 0; frame < 32; ++frame) {
    FrameRow& row = f.table.frames[frame];
    for (std::size_t i = 0; i < f.graph.node_count(); ++i) {
      row[f.graph.label(static_cast<NodeId>(i))] = rng.uniform();
    }
  }
  const AffinityParams params;
  f.cache = build_affinity_matrix(f.graph, f.actions, f.objects, params,
                                  default_relation_whitelist());
  for (std::size_t o = 0; o < n_obj; ++o) f.object_scores.push_back(rng.uniform());
  for (std::size_t a = 0; a < n_act; ++a) f.action_priors.push_back(rng.uniform());
  return f;
}

const Fixture& fixture() {
  static const Fixture f = make_fixture(40, 120);
  return f;
}

void BM_GroundSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::ground_objects(f.table, f.egos));
  }
}
void BM_GroundParallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ground_objects(f.table, f.egos));
  }
}

void BM_AffinitySerial(benchmark::State& state) {
  const auto& f = fixture();
  AffinityParams params;
  params.l_max = static_cast<int>(state.range(0));
  const auto whitelist = default_relation_whitelist();
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::build_affinity_matrix(
        f.graph, f.actions, f.objects, params, whitelist));
  }
}
void BM_AffinityParallel(benchmark::State& state) {
  const auto& f = fixture();
  AffinityParams params;
  params.l_max = static_cast<int>(state.range(0));
  const auto whitelist = default_relation_whitelist();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        build_affinity_matrix(f.graph, f.actions, f.objects, params, whitelist));
  }
}

void BM_RankSerial(benchmark::State& state) {
  const auto& f = fixture();
  const std::span<const double> priors(f.action_priors);
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::rank_frame(f.object_scores, f.cache, priors));
  }
}
void BM_RankParallel(benchmark::State& state) {
  const auto& f = fixture();
  const std::span<const double> priors(f.action_priors);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank_frame(f.object_scores, f.cache, priors));
  }
}

BENCHMARK(BM_GroundSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GroundParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_AffinitySerial)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AffinityParallel)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RankSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RankParallel)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
