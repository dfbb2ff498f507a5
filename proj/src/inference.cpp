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

#include "kgact/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kgact/error.hpp"

namespace kgact {

double phi(double p, double floor) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ContractError("phi: probability " + std::to_string(p) +
                        " outside [0, 1]");
  }
  return -std::log(std::max(p, floor));
}

double Configuration::recompute_energy(double floor) const {
  double e = phi(p_obj, floor) + phi(p_aff, floor);
  if (p_act) e += phi(*p_act, floor);
  return e;
}

bool configuration_precedes(const Configuration& a, const Configuration& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  if (a.action != b.action) return a.action < b.action;
  return a.object < b.object;
}

std::string Ranking::scope() const {
  return frame ? "frame:" + std::to_string(*frame) : std::string("clip");
}

Ranking rank_frame(std::span<const double> object_scores,
                   const AffinityCache& affinity,
                   std::optional<std::span<const double>> action_priors,
                   double energy_floor) {
  const std::size_t n_act = affinity.rows();
  const std::size_t n_obj = affinity.cols();
  if (n_act == 0 || n_obj == 0) {
    throw ConfigError("rank_frame: empty action or object vocabulary");
  }
  if (object_scores.size() != n_obj) {
    throw ContractError("rank_frame: object score count does not match vocab");
  }
  if (action_priors && action_priors->size() != n_act) {
    throw ContractError("rank_frame: action prior count does not match vocab");
  }
  // Validate up front so the parallel loop cannot throw.
  for (const double p : object_scores) phi(p, energy_floor);
  if (action_priors) {
    for (const double p : *action_priors) phi(p, energy_floor);
  }
  if (affinity.normalized.size() != n_act * n_obj) {
    throw ContractError("rank_frame: affinity cache is not normalized");
  }

  std::vector<double> obj_energy(n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) {
    obj_energy[o] = phi(object_scores[o], energy_floor);
  }

  Ranking ranking;
  ranking.configurations.resize(n_act * n_obj);
  const auto cells = static_cast<std::ptrdiff_t>(n_act * n_obj);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t cell = 0; cell < cells; ++cell) {
    const std::size_t a = static_cast<std::size_t>(cell) / n_obj;
    const std::size_t o = static_cast<std::size_t>(cell) % n_obj;
    Configuration& c = ranking.configurations[cell];
    c.action = affinity.actions[a];
    c.object = affinity.objects[o];
    c.action_index = static_cast<std::uint32_t>(a);
    c.object_index = static_cast<std::uint32_t>(o);
    c.p_obj = object_scores[o];
    c.p_aff = affinity.normalized[cell];
    c.energy = obj_energy[o] + -std::log(std::max(c.p_aff, energy_floor));
    if (action_priors) {
      c.p_act = (*action_priors)[a];
      c.energy += -std::log(std::max(*c.p_act, energy_floor));
    }
  }

  std::sort(ranking.configurations.begin(), ranking.configurations.end(),
            configuration_precedes);
  return ranking;
}

ClipRanking rank_clip(std::span<const Ranking> frames, std::size_t top_k,
                      double energy_floor) {
  if (frames.empty()) throw ContractError("rank_clip: no frame rankings");
  const auto& first = frames.front().configurations;
  if (first.empty()) throw ContractError("rank_clip: empty frame ranking");

  std::uint32_t n_act = 0;
  std::uint32_t n_obj = 0;
  for (const auto& c : first) {
    n_act = std::max(n_act, c.action_index + 1);
    n_obj = std::max(n_obj, c.object_index + 1);
  }
  const std::size_t cells = static_cast<std::size_t>(n_act) * n_obj;
  if (first.size() != cells) {
    throw ContractError("rank_clip: frame ranking is not a full vocab grid");
  }

  // Template configuration per cell plus accumulated part energies.
  std::vector<Configuration> clip(cells);
  std::vector<double> energy_sum(cells, 0.0);
  std::vector<double> obj_energy_sum(cells, 0.0);
  std::vector<double> act_energy_sum(cells, 0.0);
  std::vector<char> has_act(cells, 0);

  std::vector<double> frame_score(n_act, 0.0);
  std::vector<double> action_best(n_act);

  for (const Ranking& frame : frames) {
    if (frame.configurations.size() != cells) {
      throw ContractError("rank_clip: frame rankings differ in size");
    }
    for (const Configuration& c : frame.configurations) {
      if (c.action_index >= n_act || c.object_index >= n_obj) {
        throw ContractError("rank_clip: configuration index out of range");
      }
      const std::size_t cell =
          static_cast<std::size_t>(c.action_index) * n_obj + c.object_index;
      if (&frame == &frames.front()) clip[cell] = c;
      energy_sum[cell] += c.energy;
      obj_energy_sum[cell] += -std::log(std::max(c.p_obj, energy_floor));
      if (c.p_act) {
        act_energy_sum[cell] += -std::log(std::max(*c.p_act, energy_floor));
        has_act[cell] = 1;
      }
    }

    // Per-frame smoothed action scores over the k best distinct actions.
    std::fill(action_best.begin(), action_best.end(),
              std::numeric_limits<double>::quiet_NaN());
    std::vector<std::uint32_t> top;
    for (const Configuration& c : frame.configurations) {
      if (top.size() >= top_k) break;
      if (std::isnan(action_best[c.action_index])) {
        action_best[c.action_index] = c.energy;
        top.push_back(c.action_index);
      }
    }
    if (!top.empty()) {
      const double e_min = action_best[top.front()];
      const double e_max = action_best[top.back()];
      for (const auto a : top) {
        frame_score[a] += e_max > e_min
                              ? (e_max - action_best[a]) / (e_max - e_min)
                              : 1.0;
      }
    }
  }

  const double n_frames = static_cast<double>(frames.size());
  ClipRanking out;
  out.ranking.configurations.resize(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    Configuration c = clip[cell];
    c.energy = energy_sum[cell] / n_frames;
    c.p_obj = std::exp(-obj_energy_sum[cell] / n_frames);
    if (has_act[cell]) {
      c.p_act = std::exp(-act_energy_sum[cell] / n_frames);
    } else {
      c.p_act.reset();
    }
    out.ranking.configurations[cell] = std::move(c);
  }

  std::vector<double> action_clip_energy(n_act,
                                         std::numeric_limits<double>::infinity());
  for (const auto& c : out.ranking.configurations) {
    action_clip_energy[c.action_index] =
        std::min(action_clip_energy[c.action_index], c.energy);
  }
  std::sort(out.ranking.configurations.begin(),
            out.ranking.configurations.end(), configuration_precedes);

  std::vector<ActionMarginal> marginal(n_act);
  for (const auto& c : out.ranking.configurations) {
    auto& m = marginal[c.action_index];
    m.action = c.action;
    m.action_index = c.action_index;
    m.score = frame_score[c.action_index] / n_frames;
    m.clip_energy = action_clip_energy[c.action_index];
  }
  std::sort(marginal.begin(), marginal.end(),
            [](const ActionMarginal& a, const ActionMarginal& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.clip_energy != b.clip_energy) {
                return a.clip_energy < b.clip_energy;
              }
              return a.action < b.action;
            });
  if (marginal.size() > top_k) marginal.resize(top_k);
  out.top_actions = std::move(marginal);
  return out;
}

}  // namespace kgact
