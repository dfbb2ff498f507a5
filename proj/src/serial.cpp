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

#include "kgact/serial.hpp"

#include <algorithm>

#include "kgact/error.hpp"

namespace kgact::serial {

std::vector<GroundedHypothesis> ground_objects(const LikelihoodTable& table,
                                               std::span<const EgoGraph> egos) {
  if (table.frames.empty()) {
    throw DataError("clip '" + table.clip_id + "' is unscorable: no frames");
  }
  std::vector<GroundedHypothesis> out;
  out.reserve(egos.size());
  for (const EgoGraph& ego : egos) {
    GroundedHypothesis h;
    h.object = ego.center;
    h.object.kind = ConceptKind::kObject;
    double sum = 0.0;
    for (const auto& [frame, row] : table.frames) {
      const double s = evidence_likelihood(ego, row);
      h.frame_scores.emplace(frame, s);
      sum += s;
    }
    h.clip_score = sum / static_cast<double>(table.frames.size());
    out.push_back(std::move(h));
  }
  sort_hypotheses(out);
  return out;
}

AffinityCache build_affinity_matrix(const KnowledgeGraph& graph,
                                    std::span<const Generator> actions,
                                    std::span<const Generator> objects,
                                    const AffinityParams& params,
                                    const RelationSet& whitelist) {
  AffinityCache cache = make_affinity_shell(actions, objects, params, whitelist);
  for (std::size_t a = 0; a < actions.size(); ++a) {
    for (std::size_t o = 0; o < objects.size(); ++o) {
      if (actions[a].id == objects[o].id) continue;
      cache.raw[a * objects.size() + o] = path_affinity(
          graph, actions[a].id, objects[o].id, params.lambda, params.l_max);
    }
  }
  normalize_affinities(cache);
  return cache;
}

Ranking rank_frame(std::span<const double> object_scores,
                   const AffinityCache& affinity,
                   std::optional<std::span<const double>> action_priors,
                   double energy_floor) {
  if (affinity.rows() == 0 || affinity.cols() == 0) {
    throw ConfigError("rank_frame: empty action or object vocabulary");
  }
  if (object_scores.size() != affinity.cols() ||
      (action_priors && action_priors->size() != affinity.rows())) {
    throw ContractError("rank_frame: score vectors do not match vocab");
  }
  Ranking ranking;
  for (std::size_t a = 0; a < affinity.rows(); ++a) {
    for (std::size_t o = 0; o < affinity.cols(); ++o) {
      Configuration c;
      c.action = affinity.actions[a];
      c.object = affinity.objects[o];
      c.action_index = static_cast<std::uint32_t>(a);
      c.object_index = static_cast<std::uint32_t>(o);
      c.p_obj = object_scores[o];
      c.p_aff = affinity.normalized_at(a, o);
      if (action_priors) c.p_act = (*action_priors)[a];
      c.energy = c.recompute_energy(energy_floor);
      ranking.configurations.push_back(std::move(c));
    }
  }
  std::sort(ranking.configurations.begin(), ranking.configurations.end(),
            configuration_precedes);
  return ranking;
}

}  // namespace kgact::serial
