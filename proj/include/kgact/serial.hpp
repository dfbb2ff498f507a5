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

#ifndef KGACT_SERIAL_HPP_
#define KGACT_SERIAL_HPP_

// Single-threaded reference versions of the parallel kernels. They share
// the public contracts of their parallel counterparts and exist so tests
// and benchmarks can compare against a straightforward loop nest.

#include <optional>
#include <span>
#include <vector>

#include "kgact/affinity.hpp"
#include "kgact/grounding.hpp"
#include "kgact/inference.hpp"

namespace kgact::serial {

std::vector<GroundedHypothesis> ground_objects(const LikelihoodTable& table,
                                               std::span<const EgoGraph> egos);

AffinityCache build_affinity_matrix(const KnowledgeGraph& graph,
                                    std::span<const Generator> actions,
                                    std::span<const Generator> objects,
                                    const AffinityParams& params,
                                    const RelationSet& whitelist);

Ranking rank_frame(std::span<const double> object_scores,
                   const AffinityCache& affinity,
                   std::optional<std::span<const double>> action_priors,
                   double energy_floor = kDefaultEnergyFloor);

}  // namespace kgact::serial

#endif  // KGACT_SERIAL_HPP_
