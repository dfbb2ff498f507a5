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

#ifndef KGACT_SEMANTIC_GROUNDING_HPP_
#define KGACT_SEMANTIC_GROUNDING_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kgact/embeddings.hpp"
#include "kgact/inference.hpp"
#include "kgact/projection.hpp"

namespace kgact {

// Distribution over the action vocabulary used as the action term of the
// configuration energy.
struct ActionPosterior {
  std::vector<std::string> actions;
  std::vector<double> probabilities;
  int iteration = 0;

  static ActionPosterior uniform(std::vector<std::string> actions);
  double sum() const;
};

struct ClipTargetInput {
  std::string clip_id;
  std::span<const double> features;  // empty when the clip has none
  std::span<const ActionMarginal> top_actions;
};

struct TargetSet {
  std::vector<TrainingPair> pairs;
  std::vector<std::string> clip_ids;  // parallel to pairs
  std::size_t skipped = 0;            // clips without features
};

// Unit-length embedding average of a clip's top-k actions, weighted by a
// softmax over -clip_energy / temperature. Throws DataError when the
// weighted average vanishes.
std::vector<double> smoothed_target(std::span<const ActionMarginal> top_actions,
                                    const EmbeddingTable& embeddings,
                                    std::size_t k, double temperature);

TargetSet build_targets(std::span<const ClipTargetInput> clips,
                        const EmbeddingTable& embeddings, std::size_t k,
                        double temperature);

// Cosine similarity between psi(features) and each action embedding mapped
// from [-1, 1] to [0, 1], parallel to `actions`. A zero projection scores
// every action 0.5. Throws DataError listing actions without embeddings.
std::vector<double> predict_actions(const ProjectionModel& model,
                                    std::span<const double> features,
                                    std::span<const std::string> actions,
                                    const EmbeddingTable& embeddings);

// new ∝ alpha * old + (1 - alpha) * predictions / sum(predictions).
// All-zero predictions are treated as uniform.
ActionPosterior refine(const ActionPosterior& posterior,
                       std::span<const double> predictions, double alpha);

}  // namespace kgact

#endif  // KGACT_SEMANTIC_GROUNDING_HPP_
