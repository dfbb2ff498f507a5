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

#ifndef KGACT_INFERENCE_HPP_
#define KGACT_INFERENCE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgact/affinity.hpp"

namespace kgact {

inline constexpr double kDefaultEnergyFloor = 1e-6;
inline constexpr std::size_t kDefaultTopActions = 5;

// Energy of a probability-like score: -ln(max(p, floor)).
// Throws ContractError for p outside [0, 1].
double phi(double p, double floor = kDefaultEnergyFloor);

// One activity interpretation: a single action and a single grounded object.
struct Configuration {
  std::string action;
  std::string object;
  std::uint32_t action_index = 0;  // into AffinityCache::actions
  std::uint32_t object_index = 0;  // into AffinityCache::objects
  double p_obj = 0.0;
  double p_aff = 0.0;
  std::optional<double> p_act;
  double energy = 0.0;

  // phi(p_obj) + phi(p_aff) + phi(p_act) when present.
  double recompute_energy(double floor = kDefaultEnergyFloor) const;
};

// Ascending energy; ties by action label, then object label.
bool configuration_precedes(const Configuration& a, const Configuration& b);

struct Ranking {
  std::optional<std::int64_t> frame;  // empty for clip scope
  std::vector<Configuration> configurations;

  std::string scope() const;
  const Configuration& top() const { return configurations.front(); }
};

// Scores every (action, object) pair of `affinity`. `object_scores` follows
// affinity.objects and `action_priors`, when given, follows
// affinity.actions. Cells run in parallel.
Ranking rank_frame(std::span<const double> object_scores,
                   const AffinityCache& affinity,
                   std::optional<std::span<const double>> action_priors,
                   double energy_floor = kDefaultEnergyFloor);

// Smoothed per-action evidence for one clip.
struct ActionMarginal {
  std::string action;
  std::uint32_t action_index = 0;
  double score = 0.0;        // mean over frames of min-max scaled rank score
  double clip_energy = 0.0;  // lowest clip energy over objects
};

struct ClipRanking {
  Ranking ranking;
  // Top-k actions by smoothed score (ties by clip energy, then label).
  std::vector<ActionMarginal> top_actions;
};

// Clip energy of a pair is the mean of its frame energies. Per frame the k
// lowest-energy actions get (E_max - E) / (E_max - E_min) over those k
// (1 when they tie) and every other action 0; the clip score averages
// that over frames.
// Clip configurations carry geometric-mean part probabilities, so
// recompute_energy() still matches the stored energy.
ClipRanking rank_clip(std::span<const Ranking> frames,
                      std::size_t top_k = kDefaultTopActions,
                      double energy_floor = kDefaultEnergyFloor);

}  // namespace kgact

#endif  // KGACT_INFERENCE_HPP_
