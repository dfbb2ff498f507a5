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

#ifndef KGACT_CONFIG_HPP_
#define KGACT_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgact/affinity.hpp"
#include "kgact/knowledge_graph.hpp"

namespace kgact {

// Flat `key = value` entries. Values may be quoted strings, numbers,
// booleans, `inf`, or `[a, b, c]` lists. '#' starts a comment.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues parse_key_values(std::istream& in);

std::vector<std::string> parse_list(std::string_view value);

struct EngineConfig {
  // Path search.
  double lambda = 0.5;
  int l_max = 3;
  RelationSet whitelist = default_relation_whitelist();
  double eps_p = 1e-4;
  // Energy.
  double eps_e = 1e-6;
  // Grounding.
  std::size_t max_evidence = 10;
  // Refinement.
  bool refine = false;
  std::size_t k = 5;
  double tau = 1.0;
  double alpha = 0.5;
  double mu = 1e-3;
  double delta_stop = 1e-3;
  int iteration_cap = 10;
  double train_ratio = 0.8;
  // Vocabulary and outputs.
  std::vector<std::string> actions;
  std::vector<std::string> objects;
  std::optional<std::filesystem::path> aliases;
  std::size_t dump_top = 5;
  bool dump_frames = false;

  AffinityParams affinity_params() const {
    return AffinityParams{lambda, l_max, eps_p};
  }

  // Throws ConfigError on out-of-range values.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  // TOML-style rendering that parse_config() reads back.
  std::string to_text() const;
};

// Keys prefixed "synth." are skipped; any other unknown key is a
// ConfigError. Relative alias paths resolve against `base_dir`.
EngineConfig parse_config(const KeyValues& values,
                          const std::filesystem::path& base_dir = {});
EngineConfig load_config_file(const std::filesystem::path& path);

}  // namespace kgact

#endif  // KGACT_CONFIG_HPP_
