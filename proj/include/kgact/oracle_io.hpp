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

#ifndef KGACT_ORACLE_IO_HPP_
#define KGACT_ORACLE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgact/knowledge_graph.hpp"

namespace kgact {

// concept label -> probability for one frame. Absent concepts were not
// scored and count as 0.
using FrameRow = std::map<std::string, double, std::less<>>;

// Per-frame concept likelihoods emitted by an external oracle for one clip.
struct LikelihoodTable {
  std::string clip_id;
  std::map<std::string, ConceptKind, std::less<>> kinds;
  std::map<std::int64_t, FrameRow> frames;

  std::size_t frame_count() const { return frames.size(); }
  bool has_kind(ConceptKind kind) const;

  friend bool operator==(const LikelihoodTable&,
                         const LikelihoodTable&) = default;
};

// Optional vocabulary check applied while reading. Labels go through the
// alias map; when `graph` is set every resolved label must be a node.
struct ConceptResolver {
  const AliasMap* aliases = nullptr;
  const KnowledgeGraph* graph = nullptr;
};

// JSON-lines rows `{"clip","frame","concept","kind","p"}`. Frames must be
// non-decreasing across rows, p in [0, 1], one row per (frame, concept),
// one clip per file and one kind per concept.
LikelihoodTable read_likelihoods(std::istream& in,
                                 const ConceptResolver& resolver = {});
LikelihoodTable read_likelihoods_file(const std::filesystem::path& path,
                                      const ConceptResolver& resolver = {});

// Canonical form: rows sorted by frame then concept, fixed key order.
void write_likelihoods(std::ostream& out, const LikelihoodTable& table);
void write_likelihoods_file(const std::filesystem::path& path,
                            const LikelihoodTable& table);

struct ActivityLabel {
  std::string verb;
  std::string noun;

  friend bool operator==(const ActivityLabel&, const ActivityLabel&) = default;
};

struct ClipManifest {
  std::string clip_id;
  std::filesystem::path likelihoods;
  std::optional<std::filesystem::path> features;
  std::optional<ActivityLabel> truth;
};

// `manifest.json`: array of {"clip_id", "likelihoods", "features"?,
// "truth": {"verb", "noun"}?}. Relative paths resolve against the manifest's
// directory and must exist.
std::vector<ClipManifest> read_manifest(const std::filesystem::path& path);
// Paths are written relative to the manifest's directory.
void write_manifest(const std::filesystem::path& path,
                    const std::vector<ClipManifest>& clips);

inline constexpr std::uint32_t kFeatureMagic = 0x5646474bu;  // "KGFV"

// Little-endian u32 magic, u32 dim, then dim f32 values.
std::vector<float> read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path,
                    const std::vector<float>& values);

}  // namespace kgact

#endif  // KGACT_ORACLE_IO_HPP_
