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

#include <cstring>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "kgact/error.hpp"
#include "kgact/oracle_io.hpp"
#include "support.hpp"

using namespace kgact;
using kgact::testing::TempDir;
using kgact::testing::write_text;

namespace {

std::string row(const std::string& clip, long frame, const std::string& concept_label,
                const std::string& kind, const std::string& p) {
  return R"({"clip":")" + clip + R"(","frame":)" + std::to_string(frame) +
         R"(,"concept":")" + concept_label + R"(","kind":")" + kind +
         R"(","p":)" + p + "}\n";
}

LikelihoodTable parse(const std::string& text, const ConceptResolver& r = {}) {
  std::istringstream in(text);
  return read_likelihoods(in, r);
}

}  // namespace

TEST_SUITE("oracle_io") {

TEST_CASE("rows are grouped by frame and concept") {
  const auto t = parse(row("c1", 0, "Cup", "object", "0.5") +
                       row("c1", 0, "handle", "evidence", "0.25") +
                       row("c1", 2, "cup", "object", "1") +
                       row("c1", 2, "pour", "action", "0.125"));
  CHECK(t.clip_id == "c1");
  CHECK(t.frame_count() == 2);
  CHECK(t.frames.at(0).at("cup") == 0.5);
  CHECK(t.frames.at(2).at("pour") == 0.125);
  CHECK(t.kinds.at("handle") == ConceptKind::kEvidence);
  CHECK(t.has_kind(ConceptKind::kAction));
}

TEST_CASE("out-of-range probability is an error at its line") {
  try {
    parse(row("c", 0, "cup", "object", "0.5") + row("c", 0, "pan", "object", "1.3"));
    FAIL("expected a range error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse(row("c", 0, "cup", "object", "-0.1")), DataError);
}

TEST_CASE("empty rows give a table with no frames") {
  const auto t = parse("\n");
  CHECK(t.frame_count() == 0);
}

TEST_CASE("schema violations carry the row number") {
  const auto expect_line = [](const std::string& text, std::size_t line) {
    try {
      parse(text);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  };
  const std::string ok = row("c", 1, "cup", "object", "0.5");
  expect_line(ok + "{not json\n", 2);
  expect_line(ok + R"({"clip":"c","frame":1,"concept":"x","kind":"object"})" "\n", 2);
  expect_line(ok + R"({"clip":"c","frame":1,"concept":"x","kind":"object","p":1,"q":2})" "\n", 2);
  expect_line(ok + row("d", 1, "pan", "object", "0.5"), 2);
  expect_line(ok + row("c", 0, "pan", "object", "0.5"), 2);
  expect_line(row("c", -1, "pan", "object", "0.5"), 1);
  expect_line(ok + row("c", 1, "cup", "object", "0.4"), 2);
  expect_line(ok + row("c", 2, "cup", "action", "0.4"), 2);
  expect_line(row("c", 0, "cup", "noun", "0.4"), 1);
}

TEST_CASE("unknown concepts are listed together") {
  GraphBuilder b;
  b.add_edge("cup", "HasA", "handle", 1.0);
  const auto g = std::move(b).build();
  AliasMap aliases{{"Mug", "cup"}};
  const ConceptResolver resolver{&aliases, &g};
  const auto t = parse(row("c", 0, "Mug", "object", "0.5"), resolver);
  CHECK(t.frames.at(0).count("cup") == 1);
  try {
    parse(row("c", 0, "zebra", "object", "0.5") + row("c", 0, "cup", "object", "1") +
              row("c", 1, "apple", "evidence", "0.5"),
          resolver);
    FAIL("expected unknown concepts");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("apple") != std::string::npos);
    CHECK(msg.find("zebra") != std::string::npos);
  }
}

TEST_CASE("write then read is the identity") {
  Rng rng(5);
  LikelihoodTable t;
  t.clip_id = "clip_x";
  for (std::int64_t f = 0; f < 6; f += 2) {
    for (int c = 0; c < 4; ++c) {
      const std::string label = "c" + std::to_string(c);
      t.kinds[label] = c == 0 ? ConceptKind::kAction : ConceptKind::kObject;
      t.frames[f][label] = rng.uniform();
    }
  }
  t.frames[4]["c0"] = 1.0;
  t.frames[4]["c1"] = 0.0;
  std::ostringstream first;
  write_likelihoods(first, t);
  const auto back = parse(first.str());
  CHECK(back == t);
  std::ostringstream second;
  write_likelihoods(second, back);
  CHECK(second.str() == first.str());
}

TEST_CASE("manifest parsing") {
  TempDir dir;
  write_text(dir / "a.ltab.jsonl", row("a", 0, "cup", "object", "1"));
  write_text(dir / "b.ltab.jsonl", row("b", 0, "cup", "object", "1"));
  write_features(dir / "a.fvec", {1.0f, -2.5f, 0.0f});
  write_text(dir / "manifest.json", R"([
    {"clip_id": "a", "likelihoods": "a.ltab.jsonl", "features": "a.fvec",
     "truth": {"verb": "Pour", "noun": "cup"}},
    {"clip_id": "b", "likelihoods": "b.ltab.jsonl",
     "truth": {"verb": "take", "noun": "cup"}}
  ])");
  const auto clips = read_manifest(dir / "manifest.json");
  REQUIRE(clips.size() == 2);
  CHECK(clips[0].truth == ActivityLabel{"pour", "cup"});
  CHECK(clips[1].truth == ActivityLabel{"take", "cup"});
  CHECK(clips[0].likelihoods == dir / "a.ltab.jsonl");
  REQUIRE(clips[0].features);
  CHECK(read_features(*clips[0].features) == std::vector<float>{1.0f, -2.5f, 0.0f});
  CHECK_FALSE(clips[1].features);

  write_manifest(dir / "copy.json", clips);
  const auto again = read_manifest(dir / "copy.json");
  REQUIRE(again.size() == 2);
  CHECK(again[0].likelihoods == clips[0].likelihoods);
  CHECK(again[0].truth == clips[0].truth);
  const auto raw = nlohmann::json::parse(testing::read_text(dir / "copy.json"));
  CHECK(raw[0]["likelihoods"] == "a.ltab.jsonl");
}

TEST_CASE("manifest errors") {
  TempDir dir;
  write_text(dir / "a.ltab.jsonl", row("a", 0, "cup", "object", "1"));
  write_text(dir / "dup.json", R"([
    {"clip_id": "a", "likelihoods": "a.ltab.jsonl"},
    {"clip_id": "a", "likelihoods": "a.ltab.jsonl"}])");
  CHECK_THROWS_AS(read_manifest(dir / "dup.json"), ParseError);

  write_text(dir / "missing.json",
             R"([{"clip_id": "a", "likelihoods": "nowhere.ltab.jsonl"}])");
  try {
    read_manifest(dir / "missing.json");
    FAIL("expected a missing-file error");
  } catch (const NotFoundError& e) {
    CHECK(std::string(e.what()).find("nowhere.ltab.jsonl") != std::string::npos);
  }
  write_text(dir / "object.json", R"({"clip_id": "a"})");
  CHECK_THROWS_AS(read_manifest(dir / "object.json"), ParseError);
  CHECK_THROWS_AS(read_manifest(dir / "absent.json"), NotFoundError);
}

TEST_CASE("feature files") {
  TempDir dir;
  write_features(dir / "f.fvec", {0.5f, 2.0f});
  const auto bytes = testing::read_text(dir / "f.fvec");
  REQUIRE(bytes.size() == 16);
  std::uint32_t magic = 0;
  std::uint32_t dim = 0;
  std::memcpy(&magic, bytes.data(), 4);
  std::memcpy(&dim, bytes.data() + 4, 4);
  CHECK(magic == kFeatureMagic);
  CHECK(dim == 2);

  write_text(dir / "bad.fvec", std::string(bytes.begin(), bytes.begin() + 12));
  CHECK_THROWS_AS(read_features(dir / "bad.fvec"), ParseError);
  std::string wrong = bytes;
  wrong[0] = 'X';
  write_text(dir / "magic.fvec", wrong);
  CHECK_THROWS_AS(read_features(dir / "magic.fvec"), ParseError);
}

}  // TEST_SUITE
