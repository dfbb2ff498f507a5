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

#include "kgact/oracle_io.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "internal/text.hpp"
#include "kgact/error.hpp"

namespace kgact {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::array<std::string_view, 5> kRowKeys = {"clip", "frame",
                                                      "concept", "kind", "p"};

std::string resolve(const ConceptResolver& resolver, std::string_view raw) {
  static const AliasMap kNoAliases;
  return resolve_label(resolver.aliases ? *resolver.aliases : kNoAliases, raw);
}

}  // namespace

bool LikelihoodTable::has_kind(ConceptKind kind) const {
  for (const auto& [_, k] : kinds) {
    if (k == kind) return true;
  }
  return false;
}

LikelihoodTable read_likelihoods(std::istream& in,
                                 const ConceptResolver& resolver) {
  LikelihoodTable table;
  std::set<std::string> unknown;
  bool have_clip = false;
  std::int64_t last_frame = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (internal::trim(line).empty()) continue;
    Json row;
    try {
      row = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!row.is_object()) throw ParseError("row is not an object", line_no);
    for (const auto& [key, _] : row.items()) {
      if (std::find(kRowKeys.begin(), kRowKeys.end(), key) == kRowKeys.end()) {
        throw ParseError("unexpected key '" + key + "'", line_no);
      }
    }
    for (const auto key : kRowKeys) {
      if (!row.contains(key)) {
        throw ParseError("missing key '" + std::string(key) + "'", line_no);
      }
    }
    if (!row["clip"].is_string() || !row["concept"].is_string() ||
        !row["kind"].is_string()) {
      throw ParseError("clip, concept and kind must be strings", line_no);
    }
    if (!row["frame"].is_number_integer()) {
      throw ParseError("frame must be an integer", line_no);
    }
    if (!row["p"].is_number()) throw ParseError("p must be a number", line_no);

    const auto clip = row["clip"].get<std::string>();
    if (!have_clip) {
      table.clip_id = clip;
      have_clip = true;
    } else if (clip != table.clip_id) {
      throw ParseError("clip '" + clip + "' differs from '" + table.clip_id +
                           "'",
                       line_no);
    }
    const auto frame = row["frame"].get<std::int64_t>();
    if (frame < 0) throw ParseError("negative frame index", line_no);
    if (frame < last_frame) {
      throw ParseError("frame indices must not decrease", line_no);
    }
    last_frame = frame;

    const double p = row["p"].get<double>();
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw DataError("line " + std::to_string(line_no) + ": probability " +
                      row["p"].dump() + " outside [0, 1]");
    }
    ConceptKind kind;
    std::string concept_label;
    try {
      kind = parse_concept_kind(row["kind"].get<std::string>());
      concept_label = resolve(resolver, row["concept"].get<std::string>());
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
    if (resolver.graph && !resolver.graph->contains(concept_label)) {
      unknown.insert(concept_label);
    }
    if (auto [it, inserted] = table.kinds.emplace(concept_label, kind);
        !inserted && it->second != kind) {
      throw ParseError("concept '" + concept_label + "' changes kind", line_no);
    }
    if (!table.frames[frame].emplace(concept_label, p).second) {
      throw ParseError("duplicate concept '" + concept_label + "' in frame " +
                           std::to_string(frame),
                       line_no);
    }
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
    throw DataError("unknown concepts: " + list);
  }
  return table;
}

LikelihoodTable read_likelihoods_file(const std::filesystem::path& path,
                                      const ConceptResolver& resolver) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open likelihood table " + path.string());
  try {
    return read_likelihoods(in, resolver);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_likelihoods(std::ostream& out, const LikelihoodTable& table) {
  for (const auto& [frame, row] : table.frames) {
    for (const auto& [label, p] : row) {
      const auto kind = table.kinds.find(label);
      if (kind == table.kinds.end()) {
        throw ContractError("concept '" + label + "' has no kind");
      }
      Json j;
      j["clip"] = table.clip_id;
      j["frame"] = frame;
      j["concept"] = label;
      j["kind"] = std::string(to_string(kind->second));
      j["p"] = p;
      out << j.dump() << '\n';
    }
  }
}

void write_likelihoods_file(const std::filesystem::path& path,
                            const LikelihoodTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  write_likelihoods(out, table);
}

std::vector<ClipManifest> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open manifest " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.is_array()) throw ParseError(path.string() + ": expected an array");

  const auto base = path.parent_path();
  const auto existing = [&](const Json& value, std::size_t i) {
    if (!value.is_string()) {
      throw ParseError("manifest entry " + std::to_string(i) +
                       ": paths must be strings");
    }
    std::filesystem::path p = value.get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p)) {
      throw NotFoundError("manifest entry " + std::to_string(i) +
                          " references missing file " + p.string());
    }
    return p;
  };

  std::vector<ClipManifest> clips;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& entry = doc[i];
    const std::string where = "manifest entry " + std::to_string(i);
    if (!entry.is_object() || !entry.contains("clip_id") ||
        !entry["clip_id"].is_string() || !entry.contains("likelihoods")) {
      throw ParseError(where + ": needs string clip_id and likelihoods");
    }
    ClipManifest clip;
    clip.clip_id = entry["clip_id"].get<std::string>();
    if (clip.clip_id.empty()) throw ParseError(where + ": empty clip_id");
    if (!seen.insert(clip.clip_id).second) {
      throw ParseError(where + ": duplicate clip_id '" + clip.clip_id + "'");
    }
    clip.likelihoods = existing(entry["likelihoods"], i);
    if (entry.contains("features") && !entry["features"].is_null()) {
      clip.features = existing(entry["features"], i);
    }
    if (entry.contains("truth") && !entry["truth"].is_null()) {
      const Json& t = entry["truth"];
      if (!t.is_object() || !t.contains("verb") || !t.contains("noun") ||
          !t["verb"].is_string() || !t["noun"].is_string()) {
        throw ParseError(where + ": truth needs string verb and noun");
      }
      try {
        clip.truth = ActivityLabel{canonical_label(t["verb"].get<std::string>()),
                                   canonical_label(t["noun"].get<std::string>())};
      } catch (const DataError& e) {
        throw ParseError(where + ": " + e.what());
      }
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ClipManifest>& clips) {
  const auto base = path.parent_path();
  const auto relative = [&](const std::filesystem::path& p) {
    const auto rel = p.lexically_relative(base);
    return (rel.empty() ? p : rel).generic_string();
  };
  Json doc = Json::array();
  for (const auto& clip : clips) {
    Json entry;
    entry["clip_id"] = clip.clip_id;
    entry["likelihoods"] = relative(clip.likelihoods);
    if (clip.features) entry["features"] = relative(*clip.features);
    if (clip.truth) {
      entry["truth"] = {{"verb", clip.truth->verb}, {"noun", clip.truth->noun}};
    }
    doc.push_back(std::move(entry));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

namespace {

std::uint32_t load_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void store_u32(std::uint32_t v, unsigned char* b) {
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
}

}  // namespace

std::vector<float> read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open feature file " + path.string());
  unsigned char header[8];
  if (!in.read(reinterpret_cast<char*>(header), 8)) {
    throw ParseError(path.string() + ": truncated feature header");
  }
  if (load_u32(header) != kFeatureMagic) {
    throw ParseError(path.string() + ": bad feature magic");
  }
  const std::uint32_t dim = load_u32(header + 4);
  if (dim == 0) throw ParseError(path.string() + ": zero feature dimension");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(dim) * 4);
  if (!in.read(reinterpret_cast<char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()))) {
    throw ParseError(path.string() + ": truncated feature payload");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(path.string() + ": trailing bytes after feature payload");
  }
  std::vector<float> values(dim);
  for (std::uint32_t i = 0; i < dim; ++i) {
    const std::uint32_t bits = load_u32(bytes.data() + 4 * i);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    if (!std::isfinite(f)) {
      throw DataError(path.string() + ": non-finite feature value");
    }
    values[i] = f;
  }
  return values;
}

void write_features(const std::filesystem::path& path,
                    const std::vector<float>& values) {
  std::vector<unsigned char> bytes(8 + 4 * values.size());
  store_u32(kFeatureMagic, bytes.data());
  store_u32(static_cast<std::uint32_t>(values.size()), bytes.data() + 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &values[i], sizeof bits);
    store_u32(bits, bytes.data() + 8 + 4 * i);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace kgact
