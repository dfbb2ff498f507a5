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

#ifndef KGACT_SYNTH_HPP_
#define KGACT_SYNTH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kgact/config.hpp"
#include "kgact/embeddings.hpp"
#include "kgact/oracle_io.hpp"

namespace kgact {

// Parameters of a generated test world. Every object is one planted
// activity, paired with action (object index mod actions).
struct SyntheticWorldSpec {
  std::size_t actions = 5;
  std::size_t objects = 8;
  std::size_t evidence_per_object = 3;
  std::size_t clips_per_activity = 7;
  std::size_t frames_per_clip = 3;
  std::size_t noise_edges = 12;  // candidate distractor edges before pruning
  std::size_t feature_dim = 16;
  double sigma = 0.0;            // oracle noise level in [0, 1]
  double feature_noise = 0.05;   // stddev added to visual features
  bool emit_action_priors = false;
  std::uint64_t seed = 1;
  EngineConfig engine;  // path-search settings the separation is checked with

  // Throws ConfigError.
  void validate() const;
};

// Reads `synth.*` keys on top of the engine keys of the same file.
SyntheticWorldSpec parse_synth_spec(const KeyValues& values,
                                    const std::filesystem::path& base_dir = {});

struct SyntheticWorld {
  std::string edge_dump;  // TSV edge records
  EmbeddingTable embeddings;
  std::vector<ActivityLabel> activities;  // planted (verb, noun) pairs
  std::vector<LikelihoodTable> tables;    // one per clip
  std::vector<std::vector<float>> features;
  std::vector<ActivityLabel> truths;      // parallel to tables
  EngineConfig config;
  std::size_t pruned_noise_edges = 0;
};

// Deterministic in the seed. Every planted pair ends up with a strictly
// higher path affinity than every distractor pair: noise edges on the best
// path of an offending distractor are removed until that holds.
SyntheticWorld synth_generate(const SyntheticWorldSpec& spec);

// Writes kb.tsv, embeddings.txt, config.toml, manifest.json, clips/ and
// features/ under `dir`. Returns the manifest path.
std::filesystem::path write_world(const SyntheticWorld& world,
                                  const std::filesystem::path& dir);

}  // namespace kgact

#endif  // KGACT_SYNTH_HPP_
