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

#include "kgact/semantic_grounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgact/error.hpp"

namespace kgact {

ActionPosterior ActionPosterior::uniform(std::vector<std::string> actions) {
  if (actions.empty()) throw ConfigError("posterior over an empty vocabulary");
  ActionPosterior p;
  p.probabilities.assign(actions.size(), 1.0 / static_cast<double>(actions.size()));
  p.actions = std::move(actions);
  return p;
}

double ActionPosterior::sum() const {
  return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

std::vector<double> smoothed_target(std::span<const ActionMarginal> top_actions,
                                    const EmbeddingTable& embeddings,
                                    std::size_t k, double temperature) {
  if (!(temperature > 0.0)) throw ContractError("temperature must be > 0");
  if (top_actions.empty() || k == 0) {
    throw DataError("no actions to build a target from");
  }
  const auto used = top_actions.first(std::min(k, top_actions.size()));
  double e_min = used.front().clip_energy;
  for (const auto& a : used) e_min = std::min(e_min, a.clip_energy);

  std::vector<double> target(kSemanticDim, 0.0);
  double weight_sum = 0.0;
  for (const auto& a : used) {
    const double w = std::exp(-(a.clip_energy - e_min) / temperature);
    weight_sum += w;
    const auto e = embeddings.at(a.action);
    for (std::size_t i = 0; i < kSemanticDim; ++i) target[i] += w * e[i];
  }
  double norm2 = 0.0;
  for (auto& v : target) {
    v /= weight_sum;
    norm2 += v * v;
  }
  if (!(norm2 > 0.0)) throw DataError("weighted action embedding vanishes");
  const double norm = std::sqrt(norm2);
  for (auto& v : target) v /= norm;
  return target;
}

TargetSet build_targets(std::span<const ClipTargetInput> clips,
                        const EmbeddingTable& embeddings, std::size_t k,
                        double temperature) {
  TargetSet out;
  for (const auto& clip : clips) {
    if (clip.features.empty()) {
      ++out.skipped;
      continue;
    }
    out.pairs.push_back(TrainingPair{
        std::vector<double>(clip.features.begin(), clip.features.end()),
        smoothed_target(clip.top_actions, embeddings, k, temperature)});
    out.clip_ids.push_back(clip.clip_id);
  }
  return out;
}

std::vector<double> predict_actions(const ProjectionModel& model,
                                    std::span<const double> features,
                                    std::span<const std::string> actions,
                                    const EmbeddingTable& embeddings) {
  std::string missing;
  for (const auto& a : actions) {
    if (!embeddings.contains(a)) missing += (missing.empty() ? "" : ", ") + a;
  }
  if (!missing.empty()) throw DataError("actions without embeddings: " + missing);
  if (model.output_dim() != kSemanticDim) {
    throw ContractError("projection output is not in the embedding space");
  }

  const Eigen::VectorXd projected = model.apply(features);
  const double norm = projected.norm();
  std::vector<double> scores(actions.size(), 0.5);
  if (!(norm > 0.0)) return scores;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto e = embeddings.at(actions[i]);
    double dot = 0.0;
    for (std::size_t j = 0; j < kSemanticDim; ++j) dot += projected[j] * e[j];
    const double cosine = std::clamp(dot / norm, -1.0, 1.0);
    scores[i] = 0.5 * (cosine + 1.0);
  }
  return scores;
}

ActionPosterior refine(const ActionPosterior& posterior,
                       std::span<const double> predictions, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ContractError("refine: alpha must lie in [0, 1]");
  }
  if (predictions.size() != posterior.probabilities.size()) {
    throw ContractError("refine: prediction count does not match vocabulary");
  }
  double pred_sum = 0.0;
  for (const double p : predictions) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ContractError("refine: predictions must be finite and >= 0");
    }
    pred_sum += p;
  }
  const double n = static_cast<double>(predictions.size());

  ActionPosterior next;
  next.actions = posterior.actions;
  next.iteration = posterior.iteration + 1;
  next.probabilities.resize(predictions.size());
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double normalized = pred_sum > 0.0 ? predictions[i] / pred_sum : 1.0 / n;
    next.probabilities[i] =
        alpha * posterior.probabilities[i] + (1.0 - alpha) * normalized;
    total += next.probabilities[i];
  }
  for (auto& p : next.probabilities) p /= total;
  return next;
}

}  // namespace kgact
