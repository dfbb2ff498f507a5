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

#ifndef KGACT_GROUNDING_HPP_
#define KGACT_GROUNDING_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "kgact/knowledge_graph.hpp"
#include "kgact/oracle_io.hpp"

namespace kgact {

struct GroundedHypothesis {
  Generator object;
  std::map<std::int64_t, double> frame_scores;
  double clip_score = 0.0;  // arithmetic mean of frame_scores
};

// Evidence-weighted object likelihood for one frame:
//
//   p(center) * (sum_e prior_e * p(e))^2
//
// Concepts missing from the row count as 0. With no evidence the raw
// center likelihood is returned.
double evidence_likelihood(const EgoGraph& ego, const FrameRow& frame_row);

// One hypothesis per ego graph, sorted by clip_score descending, ties by
// label. Throws DataError for a table with no frames.
std::vector<GroundedHypothesis> ground_objects(const LikelihoodTable& table,
                                               std::span<const EgoGraph> egos);

std::vector<GroundedHypothesis> ground_objects(
    const LikelihoodTable& table, std::span<const Generator> object_vocab,
    const KnowledgeGraph& graph, std::size_t max_evidence);

std::vector<EgoGraph> build_ego_graphs(std::span<const Generator> object_vocab,
                                       const KnowledgeGraph& graph,
                                       std::size_t max_evidence);

// Sort order shared by every ground_objects implementation.
void sort_hypotheses(std::vector<GroundedHypothesis>& hypotheses);

}  // namespace kgact

#endif  // KGACT_GROUNDING_HPP_
