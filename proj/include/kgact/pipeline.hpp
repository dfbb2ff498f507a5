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

#ifndef KGACT_PIPELINE_HPP_
#define KGACT_PIPELINE_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgact/affinity.hpp"
#include "kgact/config.hpp"
#include "kgact/embeddings.hpp"
#include "kgact/evaluation.hpp"
#include "kgact/grounding.hpp"
#include "kgact/inference.hpp"
#include "kgact/oracle_io.hpp"
#include "kgact/projection.hpp"
#include "kgact/semantic_grounding.hpp"

namespace kgact {

struct Vocabulary {
  std::vector<Generator> actions;
  std::vector<Generator> objects;

  std::vector<std::string> action_labels() const;
  SearchSpace search_space() const {
    return SearchSpace{actions.size(), objects.size()};
  }
};

// Resolves config.actions / config.objects through the alias map against
// the graph. Empty, duplicate, or unknown entries are errors.
Vocabulary resolve_vocabulary(const KnowledgeGraph& graph,
                              const EngineConfig& config,
                              const AliasMap& aliases);

struct ClipResult {
  std::string clip_id;
  std::vector<Ranking> frames;
  ClipRanking clip;

  ActivityLabel top1() const {
    return ActivityLabel{clip.ranking.top().action, clip.ranking.top().object};
  }
};

// Loaded knowledge, vocabulary, and affinity matrix. Immutable after
// construction; score() may be called concurrently.
class Engine {
 public:
  // Builds the affinity matrix unless `cache` is given, in which case its
  // fingerprint must match this configuration.
  Engine(KnowledgeGraph graph, EngineConfig config, AliasMap aliases = {},
         std::optional<AffinityCache> cache = std::nullopt);

  const KnowledgeGraph& graph() const { return graph_; }
  const EngineConfig& config() const { return config_; }
  const AliasMap& aliases() const { return aliases_; }
  const Vocabulary& vocab() const { return vocab_; }
  const AffinityCache& affinity() const { return affinity_; }
  const std::vector<EgoGraph>& ego_graphs() const { return egos_; }
  AffinityFingerprint fingerprint() const;
  ConceptResolver resolver() const { return ConceptResolver{&aliases_, &graph_}; }

  // Grounds, ranks every frame, and smooths to a clip ranking. With a
  // posterior its probabilities are the action term of every frame;
  // otherwise the table's action rows are used where a frame has any.
  ClipResult score(const LikelihoodTable& table,
                   const ActionPosterior* posterior = nullptr) const;

 private:
  KnowledgeGraph graph_;
  EngineConfig config_;
  AliasMap aliases_;
  Vocabulary vocab_;
  std::vector<EgoGraph> egos_;
  AffinityCache affinity_;
};

AffinityFingerprint make_fingerprint(const EngineConfig& config,
                                     const Vocabulary& vocab);

struct LoadedClip {
  ClipManifest manifest;
  LikelihoodTable table;
  std::vector<double> features;  // empty when the manifest has none
};

LoadedClip load_clip(const Engine& engine, const ClipManifest& manifest);

struct RefinementStep {
  int iteration = 0;
  double val_mse = 0.0;
  std::optional<double> top1_action_acc;
  bool accepted = true;
};

struct RefinementResult {
  ProjectionModel model;
  std::map<std::string, ActionPosterior> posteriors;  // by clip_id
  std::vector<RefinementStep> trace;
  std::optional<double> initial_action_accuracy;
  std::optional<double> final_action_accuracy;
  std::size_t skipped_without_features = 0;
};

// Deterministic split: true when the clip belongs to the training side.
bool in_training_split(std::string_view clip_id, double train_ratio);

// Alternates rank -> targets -> train -> predict -> refine. Stops when the
// relative validation-MSE improvement drops below delta_stop or after
// iteration_cap iterations. An iteration that raises validation MSE is
// rejected and the previous state is kept.
RefinementResult refinement_loop(const Engine& engine,
                                 std::span<const LoadedClip> clips,
                                 const EmbeddingTable& embeddings);

// CSV `iteration,val_mse,top1_action_acc` over accepted iterations.
void write_trace_csv(std::ostream& out, std::span<const RefinementStep> trace);

struct RunOutput {
  std::vector<ClipResult> results;  // ordered by clip_id
  std::vector<ClipFailure> failures;
  std::optional<EvaluationReport> report;
  std::optional<RefinementResult> refinement;
};

// Full pipeline with clip-level fault isolation. Refinement runs when the
// config asks for it; it then needs `embeddings`.
RunOutput run(const Engine& engine, std::span<const ClipManifest> manifest,
              const EmbeddingTable* embeddings = nullptr);
RunOutput run_loaded(const Engine& engine, std::span<const LoadedClip> clips,
                     std::vector<ClipFailure> failures,
                     const EmbeddingTable* embeddings = nullptr);

// JSON lines {"clip","scope","rank","verb","noun","energy"}: the top
// `top_n` clip configurations per clip, plus frame scopes when asked.
void write_predictions(std::ostream& out, std::span<const ClipResult> results,
                       std::size_t top_n, bool include_frames);
// Rank-1 clip-scope rows keyed by clip.
std::map<std::string, ActivityLabel> read_predictions(std::istream& in);

}  // namespace kgact

#endif  // KGACT_PIPELINE_HPP_
