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

#include "kgact/grounding.hpp"

#include <algorithm>
#include <cmath>

#include "internal/parallel.hpp"
#include "kgact/error.hpp"

namespace kgact {
namespace {

double row_probability(const FrameRow& row, const std::string& label) {
  const auto it = row.find(label);
  if (it == row.end()) return 0.0;
  if (!(it->second >= 0.0 && it->second <= 1.0)) {
    throw ContractError("likelihood for '" + label + "' outside [0, 1]");
  }
  return it->second;
}

}  // namespace

double evidence_likelihood(const EgoGraph& ego, const FrameRow& frame_row) {
  const double center = row_probability(frame_row, ego.center.label);
  if (ego.evidence.empty()) return center;

  double prior_sum = 0.0;
  double support = 0.0;
  for (const auto& entry : ego.evidence) {
    if (!(entry.prior >= 0.0 && entry.prior <= 1.0)) {
      throw ContractError("evidence prior outside [0, 1]");
    }
    prior_sum += entry.prior;
    support += entry.prior * row_probability(frame_row, entry.generator.label);
  }
  if (std::abs(prior_sum - 1.0) > 1e-9) {
    throw ContractError("evidence priors are not normalized");
  }
  support = std::min(support, 1.0);
  return center * support * support;
}

std::vector<EgoGraph> build_ego_graphs(std::span<const Generator> object_vocab,
                                       const KnowledgeGraph& graph,
                                       std::size_t max_evidence) {
  std::vector<EgoGraph> egos;
  egos.reserve(object_vocab.size());
  for (const auto& object : object_vocab) {
    egos.push_back(ego_graph(graph, object.label, max_evidence));
  }
  return egos;
}

void sort_hypotheses(std::vector<GroundedHypothesis>& hypotheses) {
  std::sort(hypotheses.begin(), hypotheses.end(),
            [](const GroundedHypothesis& a, const GroundedHypothesis& b) {
              if (a.clip_score != b.clip_score) {
                return a.clip_score > b.clip_score;
              }
              return a.object.label < b.object.label;
            });
}

std::vector<GroundedHypothesis> ground_objects(const LikelihoodTable& table,
                                               std::span<const EgoGraph> egos) {
  if (table.frames.empty()) {
    throw DataError("clip '" + table.clip_id + "' is unscorable: no frames");
  }
  std::vector<const FrameRow*> rows;
  std::vector<std::int64_t> frame_ids;
  for (const auto& [frame, row] : table.frames) {
    frame_ids.push_back(frame);
    rows.push_back(&row);
  }
  const auto n_obj = static_cast<std::ptrdiff_t>(egos.size());
  const auto n_frames = static_cast<std::ptrdiff_t>(rows.size());
  std::vector<double> scores(egos.size() * rows.size());
  internal::ErrorSlot error;

#pragma omp parallel for collapse(2) schedule(static)
  for (std::ptrdiff_t o = 0; o < n_obj; ++o) {
    for (std::ptrdiff_t f = 0; f < n_frames; ++f) {
      error.capture([&] {
        scores[o * n_frames + f] = evidence_likelihood(egos[o], *rows[f]);
      });
    }
  }
  error.rethrow();

  std::vector<GroundedHypothesis> out(egos.size());
  for (std::ptrdiff_t o = 0; o < n_obj; ++o) {
    auto& h = out[o];
    h.object = egos[o].center;
    h.object.kind = ConceptKind::kObject;
    double sum = 0.0;
    for (std::ptrdiff_t f = 0; f < n_frames; ++f) {
      const double s = scores[o * n_frames + f];
      h.frame_scores.emplace(frame_ids[f], s);
      sum += s;
    }
    h.clip_score = sum / static_cast<double>(n_frames);
  }
  sort_hypotheses(out);
  return out;
}

std::vector<GroundedHypothesis> ground_objects(
    const LikelihoodTable& table, std::span<const Generator> object_vocab,
    const KnowledgeGraph& graph, std::size_t max_evidence) {
  const auto egos = build_ego_graphs(object_vocab, graph, max_evidence);
  return ground_objects(table, egos);
}

}  // namespace kgact
