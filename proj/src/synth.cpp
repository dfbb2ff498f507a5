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

#include "kgact/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "internal/text.hpp"
#include "kgact/affinity.hpp"
#include "kgact/error.hpp"
#include "kgact/knowledge_graph.hpp"
#include "kgact/rng.hpp"

namespace kgact {
namespace {

constexpr double kPlantedRawWeight = 10.0;

std::string indexed(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%02zu", prefix, i);
  return buf;
}

std::string cue_label(std::size_t object, std::size_t m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "cue_%02zu_%zu", object, m);
  return buf;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct RawEdge {
  std::string src;
  std::string relation;
  std::string dst;
  double raw;
  bool noise;
};

std::string render(const std::vector<RawEdge>& edges) {
  std::string out;
  for (const auto& e : edges) {
    out += e.src + '\t' + e.relation + '\t' + e.dst + '\t' + number(e.raw) + '\n';
  }
  return out;
}

// Smallest planted affinity must beat the largest distractor affinity.
// Returns the index of a noise edge to drop, or nothing when separated.
std::optional<std::size_t> separation_violation(
    const std::vector<RawEdge>& edges, const std::vector<std::string>& actions,
    const std::vector<std::string>& objects,
    const std::vector<std::size_t>& planted_action, const EngineConfig& cfg) {
  std::istringstream in(render(edges));
  const KnowledgeGraph graph = load_edges(in, cfg.whitelist);
  std::vector<Generator> a_gen;
  std::vector<Generator> o_gen;
  for (const auto& a : actions) a_gen.push_back(graph.generator(a, ConceptKind::kAction));
  for (const auto& o : objects) o_gen.push_back(graph.generator(o, ConceptKind::kObject));
  const AffinityCache cache = build_affinity_matrix(
      graph, a_gen, o_gen, cfg.affinity_params(), cfg.whitelist);

  double min_planted = std::numeric_limits<double>::infinity();
  double max_distractor = -1.0;
  std::size_t worst_a = 0;
  std::size_t worst_o = 0;
  for (std::size_t a = 0; a < actions.size(); ++a) {
    for (std::size_t o = 0; o < objects.size(); ++o) {
      const double v = cache.raw_at(a, o);
      if (planted_action[o] == a) {
        min_planted = std::min(min_planted, v);
      } else if (v > max_distractor) {
        max_distractor = v;
        worst_a = a;
        worst_o = o;
      }
    }
  }
  if (max_distractor < min_planted) return std::nullopt;

  const auto path = best_path(graph, a_gen[worst_a].id, o_gen[worst_o].id,
                              cfg.lambda, cfg.l_max);
  if (!path) throw Error("synth: distractor has affinity without a path");
  std::set<std::pair<std::string, std::string>> hops;
  for (std::size_t i = 0; i + 1 < path->nodes.size(); ++i) {
    const auto& x = graph.label(path->nodes[i]);
    const auto& y = graph.label(path->nodes[i + 1]);
    hops.emplace(std::min(x, y), std::max(x, y));
  }
  for (std::size_t e = edges.size(); e-- > 0;) {
    if (edges[e].noise &&
        hops.contains({std::min(edges[e].src, edges[e].dst),
                       std::max(edges[e].src, edges[e].dst)})) {
      return e;
    }
  }
  throw Error("synth: cannot separate planted activities from distractors");
}

}  // namespace

void SyntheticWorldSpec::validate() const {
  if (actions == 0 || objects == 0) {
    throw ConfigError("synthetic world needs at least one activity");
  }
  if (objects < actions) {
    throw ConfigError("synthetic world needs at least as many objects as actions");
  }
  if (clips_per_activity == 0 || frames_per_clip == 0) {
    throw ConfigError("synthetic world needs clips and frames");
  }
  if (feature_dim == 0) throw ConfigError("feature_dim must be >= 1");
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw ConfigError("sigma must lie in [0, 1]");
  if (!(feature_noise >= 0.0) || !std::isfinite(feature_noise)) {
    throw ConfigError("feature_noise must be >= 0");
  }
  if (!engine.whitelist.contains("RelatedTo") || !engine.whitelist.contains("HasA")) {
    throw ConfigError("synthetic worlds need RelatedTo and HasA whitelisted");
  }
  engine.validate();
}

SyntheticWorldSpec parse_synth_spec(const KeyValues& values,
                                    const std::filesystem::path& base_dir) {
  SyntheticWorldSpec spec;
  spec.engine = parse_config(values, base_dir);
  const auto count = [](const std::string& key, const std::string& v) {
    const auto i = internal::parse_int<long long>(v);
    if (!i || *i < 0) throw ConfigError(key + ": expected a count");
    return static_cast<std::size_t>(*i);
  };
  const auto real = [](const std::string& key, const std::string& v) {
    const auto d = internal::parse_double(v);
    if (!d) throw ConfigError(key + ": expected a number");
    return *d;
  };
  for (const auto& [key, value] : values) {
    if (!key.starts_with("synth.")) continue;
    const std::string name = key.substr(6);
    if (name == "actions") spec.actions = count(key, value);
    else if (name == "objects") spec.objects = count(key, value);
    else if (name == "evidence") spec.evidence_per_object = count(key, value);
    else if (name == "clips_per_activity") spec.clips_per_activity = count(key, value);
    else if (name == "frames") spec.frames_per_clip = count(key, value);
    else if (name == "noise_edges") spec.noise_edges = count(key, value);
    else if (name == "feature_dim") spec.feature_dim = count(key, value);
    else if (name == "sigma") spec.sigma = real(key, value);
    else if (name == "feature_noise") spec.feature_noise = real(key, value);
    else if (name == "seed") spec.seed = count(key, value);
    else if (name == "action_priors") {
      if (value != "true" && value != "false") {
        throw ConfigError(key + ": expected true or false");
      }
      spec.emit_action_priors = value == "true";
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

SyntheticWorld synth_generate(const SyntheticWorldSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticWorld world;

  std::vector<std::string> actions;
  std::vector<std::string> objects;
  for (std::size_t a = 0; a < spec.actions; ++a) actions.push_back(indexed("verb", a));
  for (std::size_t o = 0; o < spec.objects; ++o) objects.push_back(indexed("noun", o));
  std::vector<std::size_t> planted_action(spec.objects);
  for (std::size_t o = 0; o < spec.objects; ++o) {
    planted_action[o] = o % spec.actions;
    world.activities.push_back(ActivityLabel{actions[planted_action[o]], objects[o]});
  }

  // Graph: one planted action per object, private evidence cues, and
  // weak distractor links from actions to cues of objects they are not
  // planted with.
  std::vector<RawEdge> edges;
  for (std::size_t o = 0; o < spec.objects; ++o) {
    edges.push_back(RawEdge{actions[planted_action[o]], "RelatedTo", objects[o],
                            kPlantedRawWeight, false});
  }
  for (std::size_t o = 0; o < spec.objects; ++o) {
    for (std::size_t m = 0; m < spec.evidence_per_object; ++m) {
      edges.push_back(RawEdge{objects[o], "HasA", cue_label(o, m),
                              rng.uniform(0.5, 1.0), false});
    }
  }
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> noisy;
  const std::size_t max_noise =
      (spec.actions - 1) * spec.objects * spec.evidence_per_object;
  for (std::size_t i = 0; i < spec.noise_edges && noisy.size() < max_noise; ++i) {
    std::size_t a;
    std::size_t o;
    std::size_t m;
    do {
      a = rng.below(spec.actions);
      o = rng.below(spec.objects);
      m = rng.below(spec.evidence_per_object);
    } while (planted_action[o] == a || noisy.contains({a, o, m}));
    noisy.emplace(a, o, m);
    edges.push_back(RawEdge{actions[a], "RelatedTo", cue_label(o, m),
                            rng.uniform(0.1, 1.0), true});
  }
  while (const auto drop = separation_violation(edges, actions, objects,
                                                planted_action, spec.engine)) {
    edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(*drop));
    ++world.pruned_noise_edges;
  }
  world.edge_dump = render(edges);

  // Embeddings for every concept, in a fixed label order.
  std::vector<std::string> all = actions;
  all.insert(all.end(), objects.begin(), objects.end());
  for (std::size_t o = 0; o < spec.objects; ++o) {
    for (std::size_t m = 0; m < spec.evidence_per_object; ++m) {
      all.push_back(cue_label(o, m));
    }
  }
  std::vector<double> v(kSemanticDim);
  for (const auto& label : all) {
    for (auto& x : v) x = rng.normal();
    world.embeddings.add(label, v);
  }

  // Features: a fixed random linear image of the true action embedding.
  std::vector<double> mixing(spec.feature_dim * kSemanticDim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(kSemanticDim));
  for (auto& x : mixing) x = rng.normal() * scale;

  const auto noisy_p = [&](bool truth) {
    const double u = rng.uniform();
    return truth ? std::clamp(1.0 - spec.sigma * u, 0.0, 1.0) : spec.sigma * u;
  };

  std::size_t clip_no = 0;
  for (std::size_t o = 0; o < spec.objects; ++o) {
    const std::size_t a_true = planted_action[o];
    for (std::size_t c = 0; c < spec.clips_per_activity; ++c, ++clip_no) {
      LikelihoodTable table;
      char id[32];
      std::snprintf(id, sizeof id, "clip_%04zu", clip_no);
      table.clip_id = id;
      for (std::size_t f = 0; f < spec.frames_per_clip; ++f) {
        FrameRow row;
        for (std::size_t j = 0; j < spec.objects; ++j) {
          row[objects[j]] = noisy_p(j == o);
          table.kinds[objects[j]] = ConceptKind::kObject;
        }
        for (std::size_t j = 0; j < spec.objects; ++j) {
          for (std::size_t m = 0; m < spec.evidence_per_object; ++m) {
            row[cue_label(j, m)] = noisy_p(j == o);
            table.kinds[cue_label(j, m)] = ConceptKind::kEvidence;
          }
        }
        if (spec.emit_action_priors) {
          for (std::size_t j = 0; j < spec.actions; ++j) {
            row[actions[j]] = noisy_p(j == a_true);
            table.kinds[actions[j]] = ConceptKind::kAction;
          }
        }
        table.frames.emplace(static_cast<std::int64_t>(f), std::move(row));
      }

      const auto e = world.embeddings.at(actions[a_true]);
      std::vector<float> feature(spec.feature_dim);
      for (std::size_t i = 0; i < spec.feature_dim; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < kSemanticDim; ++j) {
          sum += mixing[i * kSemanticDim + j] * e[j];
        }
        feature[i] = static_cast<float>(sum + spec.feature_noise * rng.normal());
      }

      world.tables.push_back(std::move(table));
      world.features.push_back(std::move(feature));
      world.truths.push_back(world.activities[o]);
    }
  }

  world.config = spec.engine;
  world.config.actions = actions;
  world.config.objects = objects;
  world.config.aliases.reset();
  return world;
}

std::filesystem::path write_world(const SyntheticWorld& world,
                                  const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "clips");
  fs::create_directories(dir / "features");
  const auto write_text = [](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NotFoundError("cannot write " + path.string());
    out << text;
  };
  write_text(dir / "kb.tsv", world.edge_dump);
  write_text(dir / "config.toml", world.config.to_text());
  {
    std::ofstream out(dir / "embeddings.txt", std::ios::binary);
    if (!out) throw NotFoundError("cannot write embeddings");
    write_embeddings(out, world.embeddings);
  }
  std::vector<ClipManifest> manifest;
  for (std::size_t i = 0; i < world.tables.size(); ++i) {
    const auto& table = world.tables[i];
    ClipManifest entry;
    entry.clip_id = table.clip_id;
    entry.likelihoods = dir / "clips" / (table.clip_id + ".ltab.jsonl");
    entry.features = dir / "features" / (table.clip_id + ".fvec");
    entry.truth = world.truths[i];
    write_likelihoods_file(entry.likelihoods, table);
    write_features(*entry.features, world.features[i]);
    manifest.push_back(std::move(entry));
  }
  const auto path = dir / "manifest.json";
  write_manifest(path, manifest);
  return path;
}

}  // namespace kgact
