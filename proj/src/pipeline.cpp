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

#include "kgact/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "internal/parallel.hpp"
#include "kgact/error.hpp"
#include "kgact/hashing.hpp"

namespace kgact {

std::vector<std::string> Vocabulary::action_labels() const {
  std::vector<std::string> out;
  out.reserve(actions.size());
  for (const auto& a : actions) out.push_back(a.label);
  return out;
}

Vocabulary resolve_vocabulary(const KnowledgeGraph& graph,
                              const EngineConfig& config,
                              const AliasMap& aliases) {
  const auto resolve = [&](const std::vector<std::string>& labels,
                           ConceptKind kind, std::string_view what) {
    if (labels.empty()) {
      throw ConfigError(std::string(what) + " vocabulary is empty");
    }
    std::vector<Generator> out;
    std::set<std::string> seen;
    std::string missing;
    for (const auto& raw : labels) {
      const std::string label = resolve_label(aliases, raw);
      if (!seen.insert(label).second) {
        throw ConfigError("duplicate " + std::string(what) + " '" + label + "'");
      }
      if (!graph.contains(label)) {
        missing += (missing.empty() ? "" : ", ") + label;
        continue;
      }
      out.push_back(graph.generator(label, kind));
    }
    if (!missing.empty()) {
      throw NotFoundError(std::string(what) +
                          " concepts missing from the knowledge graph: " + missing);
    }
    return out;
  };
  return Vocabulary{resolve(config.actions, ConceptKind::kAction, "action"),
                    resolve(config.objects, ConceptKind::kObject, "object")};
}

AffinityFingerprint make_fingerprint(const EngineConfig& config,
                                     const Vocabulary& vocab) {
  std::vector<std::string> objects;
  for (const auto& o : vocab.objects) objects.push_back(o.label);
  return AffinityFingerprint{config.lambda, config.l_max,
                             whitelist_digest(config.whitelist),
                             vocab_digest(vocab.action_labels(), objects)};
}

Engine::Engine(KnowledgeGraph graph, EngineConfig config, AliasMap aliases,
               std::optional<AffinityCache> cache)
    : graph_(std::move(graph)),
      config_(std::move(config)),
      aliases_(std::move(aliases)) {
  config_.validate();
  vocab_ = resolve_vocabulary(graph_, config_, aliases_);
  egos_ = build_ego_graphs(vocab_.objects, graph_, config_.max_evidence);
  if (cache) {
    if (cache->fingerprint != fingerprint()) {
      throw ConfigError(
          "affinity cache fingerprint does not match the current configuration");
    }
    affinity_ = std::move(*cache);
    affinity_.epsilon = config_.eps_p;
    normalize_affinities(affinity_);
  } else {
    affinity_ = build_affinity_matrix(graph_, vocab_.actions, vocab_.objects,
                                      config_.affinity_params(),
                                      config_.whitelist);
  }
}

AffinityFingerprint Engine::fingerprint() const {
  return make_fingerprint(config_, vocab_);
}

ClipResult Engine::score(const LikelihoodTable& table,
                         const ActionPosterior* posterior) const {
  const auto hypotheses = ground_objects(table, egos_);
  const std::size_t n_obj = vocab_.objects.size();
  const std::size_t n_act = vocab_.actions.size();

  std::unordered_map<std::string_view, std::size_t> object_slot;
  for (std::size_t o = 0; o < n_obj; ++o) object_slot[affinity_.objects[o]] = o;

  if (posterior && posterior->probabilities.size() != n_act) {
    throw ContractError("posterior does not cover the action vocabulary");
  }

  ClipResult result;
  result.clip_id = table.clip_id;
  std::vector<double> object_scores(n_obj);
  std::vector<double> priors(n_act);
  for (const auto& [frame, row] : table.frames) {
    for (const auto& h : hypotheses) {
      object_scores[object_slot.at(h.object.label)] = h.frame_scores.at(frame);
    }
    std::optional<std::span<const double>> frame_priors;
    if (posterior) {
      frame_priors = posterior->probabilities;
    } else {
      bool any = false;
      for (std::size_t a = 0; a < n_act; ++a) {
        const auto it = row.find(affinity_.actions[a]);
        const bool is_action =
            it != row.end() && table.kinds.at(it->first) == ConceptKind::kAction;
        priors[a] = is_action ? it->second : 0.0;
        any = any || is_action;
      }
      if (any) frame_priors = priors;
    }
    Ranking ranking =
        rank_frame(object_scores, affinity_, frame_priors, config_.eps_e);
    ranking.frame = frame;
    result.frames.push_back(std::move(ranking));
  }
  result.clip = rank_clip(result.frames, config_.k, config_.eps_e);
  return result;
}

LoadedClip load_clip(const Engine& engine, const ClipManifest& manifest) {
  LoadedClip clip;
  clip.manifest = manifest;
  clip.table = read_likelihoods_file(manifest.likelihoods, engine.resolver());
  if (clip.table.clip_id.empty()) {
    clip.table.clip_id = manifest.clip_id;
  } else if (clip.table.clip_id != manifest.clip_id) {
    throw DataError("likelihood table belongs to clip '" + clip.table.clip_id +
                    "', manifest says '" + manifest.clip_id + "'");
  }
  if (manifest.features) {
    const auto f = read_features(*manifest.features);
    clip.features.assign(f.begin(), f.end());
  }
  return clip;
}

bool in_training_split(std::string_view clip_id, double train_ratio) {
  constexpr std::uint64_t kBuckets = 10000;
  const auto bucket = stable_hash(clip_id) % kBuckets;
  return static_cast<double>(bucket) <
         train_ratio * static_cast<double>(kBuckets);
}

namespace {

ActionPosterior initial_posterior(const LikelihoodTable& table,
                                  const Vocabulary& vocab) {
  auto posterior = ActionPosterior::uniform(vocab.action_labels());
  if (!table.has_kind(ConceptKind::kAction) || table.frames.empty()) {
    return posterior;
  }
  std::vector<double> mean(vocab.actions.size(), 0.0);
  double total = 0.0;
  for (const auto& [_, row] : table.frames) {
    for (std::size_t a = 0; a < mean.size(); ++a) {
      const auto it = row.find(vocab.actions[a].label);
      if (it != row.end() &&
          table.kinds.at(it->first) == ConceptKind::kAction) {
        mean[a] += it->second;
        total += it->second;
      }
    }
  }
  if (total > 0.0) {
    for (std::size_t a = 0; a < mean.size(); ++a) {
      posterior.probabilities[a] = mean[a] / total;
    }
  }
  return posterior;
}

std::vector<ClipResult> score_all(
    const Engine& engine, std::span<const LoadedClip> clips,
    const std::vector<const ActionPosterior*>& posteriors) {
  std::vector<ClipResult> results(clips.size());
  internal::ErrorSlot error;
  const auto n = static_cast<std::ptrdiff_t>(clips.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    error.capture([&] {
      results[i] = engine.score(clips[i].table,
                                posteriors.empty() ? nullptr : posteriors[i]);
    });
  }
  error.rethrow();
  return results;
}

std::optional<double> action_accuracy(std::span<const LoadedClip> clips,
                                      std::span<const ClipResult> results) {
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (!clips[i].manifest.truth) continue;
    ++total;
    correct += results[i].top1().verb == clips[i].manifest.truth->verb;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

RefinementResult refinement_loop(const Engine& engine,
                                 std::span<const LoadedClip> clips,
                                 const EmbeddingTable& embeddings) {
  const EngineConfig& cfg = engine.config();
  const auto actions = engine.vocab().action_labels();

  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  RefinementResult out;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (clips[i].features.empty()) {
      ++out.skipped_without_features;
      continue;
    }
    (in_training_split(clips[i].manifest.clip_id, cfg.train_ratio) ? train
                                                                 : validation)
        .push_back(i);
  }
  if (train.empty()) throw DataError("refinement: empty training split");
  if (validation.empty()) throw DataError("refinement: empty validation split");

  std::vector<ActionPosterior> current;
  current.reserve(clips.size());
  for (const auto& clip : clips) {
    current.push_back(initial_posterior(clip.table, engine.vocab()));
  }
  std::vector<const ActionPosterior*> active;  // empty: oracle priors only
  double previous_mse = 0.0;

  for (int iteration = 0; iteration < cfg.iteration_cap; ++iteration) {
    const auto results = score_all(engine, clips, active);
    RefinementStep step;
    step.iteration = iteration;
    step.top1_action_acc = action_accuracy(clips, results);
    if (iteration == 0) out.initial_action_accuracy = step.top1_action_acc;

    const auto make_pairs = [&](const std::vector<std::size_t>& idx) {
      std::vector<TrainingPair> pairs;
      for (const auto i : idx) {
        pairs.push_back(TrainingPair{
            clips[i].features,
            smoothed_target(results[i].clip.top_actions, embeddings, cfg.k,
                            cfg.tau)});
      }
      return pairs;
    };
    const auto train_pairs = make_pairs(train);
    const auto val_pairs = make_pairs(validation);
    ProjectionModel model = train_projection(train_pairs, cfg.mu);
    model.iterations = iteration;
    step.val_mse = model.mse(val_pairs);

    if (iteration > 0 && step.val_mse > previous_mse) {
      step.accepted = false;
      out.trace.push_back(step);
      break;
    }
    out.trace.push_back(step);

    std::vector<ActionPosterior> next = current;
    const auto n = static_cast<std::ptrdiff_t>(clips.size());
    internal::ErrorSlot error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (clips[i].features.empty()) continue;
      error.capture([&] {
        const auto predictions =
            predict_actions(model, clips[i].features, actions, embeddings);
        next[i] = refine(current[i], predictions, cfg.alpha);
      });
    }
    error.rethrow();
    current = std::move(next);
    active.clear();
    for (const auto& p : current) active.push_back(&p);
    out.model = std::move(model);

    const bool saturated =
        iteration > 0 &&
        (previous_mse > 0.0 ? (previous_mse - step.val_mse) / previous_mse : 0.0) <
            cfg.delta_stop;
    previous_mse = step.val_mse;
    if (saturated) break;
  }

  const auto final_results = score_all(engine, clips, active);
  out.final_action_accuracy = action_accuracy(clips, final_results);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    out.posteriors.emplace(clips[i].manifest.clip_id, current[i]);
  }
  return out;
}

void write_trace_csv(std::ostream& out, std::span<const RefinementStep> trace) {
  out << "iteration,val_mse,top1_action_acc\n";
  char buf[96];
  for (const auto& step : trace) {
    if (!step.accepted) continue;
    std::snprintf(buf, sizeof buf, "%d,%.17g,", step.iteration, step.val_mse);
    out << buf;
    if (step.top1_action_acc) {
      std::snprintf(buf, sizeof buf, "%.17g", *step.top1_action_acc);
      out << buf;
    }
    out << '\n';
  }
}

RunOutput run_loaded(const Engine& engine, std::span<const LoadedClip> clips,
                     std::vector<ClipFailure> failures,
                     const EmbeddingTable* embeddings) {
  RunOutput out;
  out.failures = std::move(failures);

  // First pass isolates clips that cannot be scored at all.
  std::vector<std::optional<ClipResult>> first(clips.size());
  std::vector<std::string> errors(clips.size());
  const auto n = static_cast<std::ptrdiff_t>(clips.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      first[i] = engine.score(clips[i].table);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  std::vector<LoadedClip> good;
  std::vector<ClipResult> results;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (first[i]) {
      good.push_back(clips[i]);
      results.push_back(std::move(*first[i]));
    } else {
      out.failures.push_back(ClipFailure{clips[i].manifest.clip_id, errors[i]});
    }
  }

  if (engine.config().refine && !good.empty()) {
    if (!embeddings) throw ConfigError("refinement needs an embedding table");
    out.refinement = refinement_loop(engine, good, *embeddings);
    for (std::size_t i = 0; i < good.size(); ++i) {
      results[i] = engine.score(
          good[i].table, &out.refinement->posteriors.at(good[i].manifest.clip_id));
    }
  }
  if (!engine.config().dump_frames) {
    for (auto& r : results) r.frames.clear();
  }

  std::map<std::string, ActivityLabel> predictions;
  std::map<std::string, ActivityLabel> truths;
  for (std::size_t i = 0; i < good.size(); ++i) {
    results[i].clip_id = good[i].manifest.clip_id;
    if (good[i].manifest.truth) {
      predictions.emplace(results[i].clip_id, results[i].top1());
      truths.emplace(results[i].clip_id, *good[i].manifest.truth);
    }
  }
  std::sort(results.begin(), results.end(),
            [](const ClipResult& a, const ClipResult& b) {
              return a.clip_id < b.clip_id;
            });
  std::sort(out.failures.begin(), out.failures.end(),
            [](const ClipFailure& a, const ClipFailure& b) {
              return a.clip_id < b.clip_id;
            });
  out.results = std::move(results);

  if (!predictions.empty()) {
    EvaluationReport report = evaluate(predictions, truths);
    report.search_space = engine.vocab().search_space();
    report.failures = out.failures;
    report.config = engine.config().to_json();
    out.report = std::move(report);
  }
  return out;
}

RunOutput run(const Engine& engine, std::span<const ClipManifest> manifest,
              const EmbeddingTable* embeddings) {
  std::vector<LoadedClip> loaded;
  std::vector<ClipFailure> failures;
  for (const auto& entry : manifest) {
    try {
      loaded.push_back(load_clip(engine, entry));
    } catch (const Error& e) {
      failures.push_back(ClipFailure{entry.clip_id, e.what()});
    }
  }
  return run_loaded(engine, loaded, std::move(failures), embeddings);
}

void write_predictions(std::ostream& out, std::span<const ClipResult> results,
                       std::size_t top_n, bool include_frames) {
  const auto emit = [&](const std::string& clip, const Ranking& ranking) {
    const std::size_t n = std::min(top_n, ranking.configurations.size());
    for (std::size_t r = 0; r < n; ++r) {
      const auto& c = ranking.configurations[r];
      nlohmann::ordered_json j;
      j["clip"] = clip;
      j["scope"] = ranking.scope();
      j["rank"] = r + 1;
      j["verb"] = c.action;
      j["noun"] = c.object;
      j["energy"] = c.energy;
      out << j.dump() << '\n';
    }
  };
  for (const auto& result : results) {
    emit(result.clip_id, result.clip.ranking);
    if (include_frames) {
      for (const auto& frame : result.frames) emit(result.clip_id, frame);
    }
  }
}

std::map<std::string, ActivityLabel> read_predictions(std::istream& in) {
  std::map<std::string, ActivityLabel> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.at("scope").get<std::string>() != "clip" ||
          j.at("rank").get<int>() != 1) {
        continue;
      }
      const auto clip = j.at("clip").get<std::string>();
      if (!out.emplace(clip, ActivityLabel{j.at("verb").get<std::string>(),
                                           j.at("noun").get<std::string>()})
               .second) {
        throw ParseError("duplicate rank-1 row for clip '" + clip + "'", line_no);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace kgact
