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

#include <cmath>
#include <limits>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "kgact/config.hpp"
#include "kgact/error.hpp"
#include "kgact/evaluation.hpp"
#include "kgact/hashing.hpp"
#include "kgact/pipeline.hpp"
#include "kgact/synth.hpp"
#include "support.hpp"
#include "world.hpp"

using namespace kgact;
using kgact::testing::TempDir;
using kgact::testing::WorldRun;
using kgact::testing::world_spec;

namespace {

KeyValues kv(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in);
}

std::map<std::string, ActivityLabel> labels(
    std::initializer_list<std::tuple<std::string, std::string, std::string>> rows) {
  std::map<std::string, ActivityLabel> out;
  for (const auto& [clip, verb, noun] : rows) out[clip] = ActivityLabel{verb, noun};
  return out;
}

EvaluationReport four_clip_report() {
  const auto truths = labels({{"c1", "cut", "knife"},
                              {"c2", "pour", "cup"},
                              {"c3", "wash", "cup"},
                              {"c4", "open", "jar"}});
  const auto preds = labels({{"c1", "cut", "knife"},
                             {"c2", "pour", "cup"},
                             {"c3", "wash", "plate"},
                             {"c4", "take", "pan"}});
  return evaluate(preds, truths);
}

// A verbs x nouns vocabulary where every noun hangs off one verb.
Engine vocab_engine(std::size_t verbs, std::size_t nouns) {
  GraphBuilder b;
  EngineConfig config;
  for (std::size_t v = 0; v < verbs; ++v) config.actions.push_back("verb" + std::to_string(v));
  for (std::size_t n = 0; n < nouns; ++n) {
    config.objects.push_back("noun" + std::to_string(n));
    b.add_edge(config.actions[n % verbs], "RelatedTo", config.objects[n], 1.0);
    b.add_edge(config.objects[n], "HasA", "part" + std::to_string(n), 0.5);
  }
  return Engine(std::move(b).build(), config);
}

LikelihoodTable one_frame_table(const Engine& engine, const std::string& clip) {
  LikelihoodTable t;
  t.clip_id = clip;
  for (const auto& o : engine.vocab().objects) {
    t.kinds[o.label] = ConceptKind::kObject;
    t.frames[0][o.label] = 0.5;
  }
  return t;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing") {
  const auto values = kv(R"(# engine settings
lambda = 0.7   # decay
l_max = 4
whitelist = ["RelatedTo", "/r/HasA"]
delta_stop = inf
refine = true
actions = [cut, "pour"]
objects = knife, cup
aliases = "names.tsv"
synth.sigma = 0.3
)");
  const auto c = parse_config(values, "/data");
  CHECK(c.lambda == 0.7);
  CHECK(c.l_max == 4);
  CHECK(c.whitelist == RelationSet{"HasA", "RelatedTo"});
  CHECK(std::isinf(c.delta_stop));
  CHECK(c.refine);
  CHECK(c.actions == std::vector<std::string>{"cut", "pour"});
  CHECK(c.objects == std::vector<std::string>{"knife", "cup"});
  REQUIRE(c.aliases);
  CHECK(*c.aliases == std::filesystem::path("/data/names.tsv"));
  CHECK(c.affinity_params().lambda == 0.7);

  const auto again = parse_config(kv(c.to_text()), "/data");
  CHECK(again.to_json() == c.to_json());
}

TEST_CASE("config defaults") {
  const auto c = parse_config({});
  CHECK(c.lambda == 0.5);
  CHECK(c.l_max == 3);
  CHECK(c.eps_p == 1e-4);
  CHECK(c.eps_e == 1e-6);
  CHECK(c.k == 5);
  CHECK(c.tau == 1.0);
  CHECK(c.alpha == 0.5);
  CHECK(c.mu == 1e-3);
  CHECK(c.delta_stop == 1e-3);
  CHECK(c.iteration_cap == 10);
  CHECK(c.train_ratio == 0.8);
  CHECK(c.whitelist == default_relation_whitelist());
  CHECK(c.whitelist.size() == 8);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config(kv("lamda = 0.5\n")), ConfigError);
  CHECK_THROWS_AS(parse_config(kv("l_max = 9\n")), ConfigError);
  CHECK_THROWS_AS(parse_config(kv("alpha = 2\n")), ConfigError);
  CHECK_THROWS_AS(parse_config(kv("tau = 0\n")), ConfigError);
  CHECK_THROWS_AS(parse_config(kv("lambda = fast\n")), ConfigError);
  CHECK_THROWS_AS(kv("k = 1\nk = 2\n"), ParseError);
  CHECK_THROWS_AS(kv("[section]\n"), ParseError);
  CHECK_THROWS_AS(kv("novalue\n"), ParseError);
}

TEST_CASE("four hand-counted clips") {
  const auto r = four_clip_report();
  CHECK(r.object == MetricCount{2, 4});
  CHECK(r.action == MetricCount{3, 4});
  CHECK(r.activity == MetricCount{2, 4});
  CHECK(r.object.accuracy() == 0.5);
  CHECK(r.action.accuracy() == 0.75);
  CHECK(r.activity.accuracy() == 0.5);
  REQUIRE(r.clips.size() == 4);
  CHECK(r.clips[2].action_correct());
  CHECK_FALSE(r.clips[2].object_correct());
}

TEST_CASE("evaluation edge cases") {
  CHECK_THROWS_AS(evaluate({}, {}), DataError);
  const auto truths = labels({{"a", "cut", "knife"}, {"b", "pour", "cup"}});
  const auto same = evaluate(truths, truths);
  CHECK(same.activity.accuracy() == 1.0);
  CHECK(same.object.accuracy() == 1.0);
  CHECK_THROWS_AS(evaluate(labels({{"z", "cut", "knife"}}), truths), DataError);
  // Truths without a prediction are ignored.
  CHECK(evaluate(labels({{"a", "cut", "knife"}}), truths).activity.total == 1);
}

TEST_CASE("report formats") {
  auto r = four_clip_report();
  r.search_space = SearchSpace{10, 38};
  r.failures.push_back(ClipFailure{"c9", "unscorable"});
  r.config = EngineConfig{}.to_json();

  std::ostringstream json;
  write_report(json, r, "json");
  CHECK(report_from_json(nlohmann::ordered_json::parse(json.str())) == r);
  const auto parsed = nlohmann::json::parse(json.str());
  CHECK(parsed["search_space"]["activities"] == 380);

  std::ostringstream csv;
  write_report(csv, r, "csv");
  CHECK(csv.str() ==
        "metric,correct,total,accuracy\n"
        "object,2,4,50.00\n"
        "action,3,4,75.00\n"
        "activity,2,4,50.00\n");
  CHECK_THROWS_AS(write_report(csv, r, "xml"), ConfigError);

  auto thirds = evaluate(labels({{"a", "x", "y"}, {"b", "x", "z"}, {"c", "x", "w"}}),
                         labels({{"a", "x", "y"}, {"b", "q", "q"}, {"c", "q", "q"}}));
  std::ostringstream rounded;
  write_report(rounded, thirds, "csv");
  CHECK(rounded.str().find("object,1,3,33.33\n") != std::string::npos);

  TempDir dir;
  write_report_file(dir / "r.csv", r, "csv");
  CHECK(testing::read_text(dir / "r.csv") == csv.str());
}

TEST_CASE("search space reporting") {
  const auto check = [](std::size_t verbs, std::size_t nouns, std::size_t expected) {
    const auto engine = vocab_engine(verbs, nouns);
    LoadedClip clip;
    clip.manifest.clip_id = "c";
    clip.manifest.truth = ActivityLabel{"verb0", "noun0"};
    clip.table = one_frame_table(engine, "c");
    const std::vector<LoadedClip> clips{clip};
    const auto out = run_loaded(engine, clips, {});
    REQUIRE(out.report);
    CHECK(out.report->search_space.activities() == expected);
    CHECK(out.results[0].clip.ranking.configurations.size() == expected);
  };
  check(10, 38, 380);
  check(97, 300, 29100);
}

TEST_CASE("vocabulary resolution") {
  GraphBuilder b;
  b.add_edge("cut", "RelatedTo", "knife", 1.0);
  const auto g = std::move(b).build();
  EngineConfig config;
  config.actions = {"Chop"};
  config.objects = {"knife"};
  const AliasMap aliases{{"Chop", "cut"}};
  const auto vocab = resolve_vocabulary(g, config, aliases);
  CHECK(vocab.actions[0].label == "cut");
  CHECK(vocab.actions[0].kind == ConceptKind::kAction);
  CHECK_THROWS_AS(resolve_vocabulary(g, config, {}), NotFoundError);
  config.actions = {};
  CHECK_THROWS_AS(resolve_vocabulary(g, config, aliases), ConfigError);
}

TEST_CASE("one bad clip does not abort the run") {
  WorldRun w(world_spec(0.0, 2, 5));
  auto clips = w.clips;
  clips[3].table.frames.clear();
  const auto out = run_loaded(w.engine, clips, {});
  REQUIRE(out.failures.size() == 1);
  CHECK(out.failures[0].clip_id == clips[3].manifest.clip_id);
  CHECK(out.results.size() == clips.size() - 1);
  REQUIRE(out.report);
  CHECK(out.report->failures == out.failures);
  CHECK(out.report->activity.total == clips.size() - 1);
}

TEST_CASE("noiseless world is solved and dumps are deterministic") {
  WorldRun w(world_spec(0.0, 3, 9));
  const auto a = w.run();
  REQUIRE(a.report);
  CHECK(a.report->activity.accuracy() == 1.0);
  std::ostringstream d1, d2;
  write_predictions(d1, a.results, 5, false);
  write_predictions(d2, w.run().results, 5, false);
  CHECK(d1.str() == d2.str());
  std::istringstream in(d1.str());
  const auto preds = read_predictions(in);
  CHECK(preds.size() == w.clips.size());
  for (const auto& clip : w.clips) {
    CHECK(preds.at(clip.manifest.clip_id) == *clip.manifest.truth);
  }
  const auto first = nlohmann::json::parse(d1.str().substr(0, d1.str().find('\n')));
  CHECK(first["scope"] == "clip");
  CHECK(first["rank"] == 1);
}

TEST_CASE("activity never beats object or action accuracy") {
  for (const double sigma : {0.2, 0.5, 0.8}) {
    WorldRun w(world_spec(sigma, 4, 77));
    const auto out = w.run();
    REQUIRE(out.report);
    const auto& r = *out.report;
    CHECK(r.activity.accuracy() <= std::min(r.object.accuracy(), r.action.accuracy()));
    for (const auto& c : r.clips) {
      if (c.activity_correct()) CHECK((c.object_correct() && c.action_correct()));
    }
  }
}

TEST_CASE("same seed gives byte-identical worlds") {
  TempDir a, b, c;
  auto spec = world_spec(0.3, 2, 1234);
  write_world(synth_generate(spec), a.path());
  write_world(synth_generate(spec), b.path());
  spec.seed = 1235;
  write_world(synth_generate(spec), c.path());
  bool any_diff = false;
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto rel = std::filesystem::relative(entry.path(), a.path());
    CHECK(testing::read_text(entry.path()) == testing::read_text(b.path() / rel));
    if (std::filesystem::exists(c.path() / rel) &&
        testing::read_text(entry.path()) != testing::read_text(c.path() / rel)) {
      any_diff = true;
    }
  }
  CHECK(files > 5);
  CHECK(any_diff);
}

TEST_CASE("written worlds load back through the file pipeline") {
  TempDir dir;
  const auto world = synth_generate(world_spec(0.0, 2, 3));
  const auto manifest_path = write_world(world, dir.path());
  const auto config = load_config_file(dir / "config.toml");
  Engine engine(load_edges_file(dir / "kb.tsv", config.whitelist), config);
  const auto manifest = read_manifest(manifest_path);
  CHECK(manifest.size() == world.tables.size());
  const auto embeddings = load_embeddings_file(dir / "embeddings.txt");
  CHECK(embeddings.size() == world.embeddings.size());
  const auto out = run(engine, manifest, &embeddings);
  REQUIRE(out.report);
  CHECK(out.report->activity.accuracy() == 1.0);
}

TEST_CASE("planted pairs beat every distractor") {
  const auto world = synth_generate(world_spec(0.0, 1, 42));
  const auto g = testing::world_graph(world);
  const auto& cfg = world.config;
  double planted_min = std::numeric_limits<double>::infinity();
  double distractor_max = 0.0;
  for (const auto& act : world.activities) {
    const double v = path_affinity(g, g.id(act.verb), g.id(act.noun), cfg.lambda,
                                   cfg.l_max);
    planted_min = std::min(planted_min, v);
  }
  for (const auto& verb : cfg.actions) {
    for (const auto& noun : cfg.objects) {
      if (std::find(world.activities.begin(), world.activities.end(),
                    ActivityLabel{verb, noun}) != world.activities.end()) {
        continue;
      }
      distractor_max = std::max(
          distractor_max,
          path_affinity(g, g.id(verb), g.id(noun), cfg.lambda, cfg.l_max));
    }
  }
  CHECK(planted_min > distractor_max);
  // Distractor links survive separation and give distractors some affinity.
  CHECK(world.pruned_noise_edges == 0);
  CHECK(distractor_max > 0.0);
}

TEST_CASE("spec validation") {
  SyntheticWorldSpec spec;
  spec.actions = 0;
  CHECK_THROWS_AS(synth_generate(spec), ConfigError);
  spec = SyntheticWorldSpec{};
  spec.objects = 3;
  CHECK_THROWS_AS(synth_generate(spec), ConfigError);
  spec = SyntheticWorldSpec{};
  spec.sigma = 1.5;
  CHECK_THROWS_AS(synth_generate(spec), ConfigError);
  const auto parsed = parse_synth_spec(kv("synth.sigma = 0.25\nsynth.seed = 8\nlambda = 0.4\n"));
  CHECK(parsed.sigma == 0.25);
  CHECK(parsed.seed == 8);
  CHECK(parsed.engine.lambda == 0.4);
  CHECK_THROWS_AS(parse_synth_spec(kv("synth.colour = 1\n")), ConfigError);
}

TEST_CASE("full noise is indistinguishable from chance") {
  // Knowledge fixes the verb once the noun is chosen, so chance is 1 / objects.
  const auto spec = world_spec(1.0, 25, 2718);
  WorldRun w(spec);
  const auto out = w.run();
  REQUIRE(out.report);
  const double n = static_cast<double>(out.report->activity.total);
  CHECK(n == 200.0);
  const double chance = 1.0 / static_cast<double>(spec.objects);
  const double sd = std::sqrt(chance * (1.0 - chance) / n);
  CHECK(std::abs(out.report->activity.accuracy() - chance) <= 3.0 * sd);
}

TEST_CASE("training split is a stable hash") {
  CHECK(stable_hash("") == 0xcbf29ce484222325ull);
  CHECK(stable_hash("a") == 0xaf63dc4c8601ec8cull);
  std::size_t train = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto id = "clip_" + std::to_string(i);
    CHECK(in_training_split(id, 0.8) == in_training_split(id, 0.8));
    train += in_training_split(id, 0.8);
  }
  CHECK(train > 1500);
  CHECK(train < 1700);
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("refinement respects the iteration cap") {
  auto spec = world_spec(0.3, 4, 31);
  spec.engine.iteration_cap = 1;
  WorldRun w(spec);
  const auto r = refinement_loop(w.engine, w.clips, w.world.embeddings);
  CHECK(r.trace.size() == 1);
  CHECK(r.trace[0].iteration == 0);
  CHECK(r.posteriors.size() == w.clips.size());
  for (const auto& [_, p] : r.posteriors) CHECK(std::abs(p.sum() - 1.0) < 1e-9);
}

TEST_CASE("infinite stop threshold stops after the first refinement") {
  auto spec = world_spec(0.3, 4, 32);
  spec.engine.delta_stop = std::numeric_limits<double>::infinity();
  WorldRun w(spec);
  const auto r = refinement_loop(w.engine, w.clips, w.world.embeddings);
  CHECK(r.trace.size() == 2);
  CHECK(r.trace.back().iteration == 1);
  std::ostringstream csv;
  write_trace_csv(csv, r.trace);
  CHECK(csv.str().starts_with("iteration,val_mse,top1_action_acc\n0,"));
}

TEST_CASE("refinement needs both splits") {
  WorldRun w(world_spec(0.0, 2, 33));
  std::vector<LoadedClip> train_only;
  for (const auto& c : w.clips) {
    if (in_training_split(c.manifest.clip_id, w.engine.config().train_ratio)) {
      train_only.push_back(c);
    }
  }
  CHECK_THROWS_AS(refinement_loop(w.engine, train_only, w.world.embeddings), DataError);
}

TEST_CASE("refinement through the run entry point") {
  auto spec = world_spec(0.0, 4, 34);
  spec.engine.refine = true;
  WorldRun w(spec);
  CHECK_THROWS_AS(w.run(), ConfigError);
  const auto out = w.run(&w.world.embeddings);
  REQUIRE(out.refinement);
  REQUIRE(out.report);
  CHECK(out.report->activity.accuracy() == 1.0);
  CHECK(*out.refinement->final_action_accuracy >= *out.refinement->initial_action_accuracy);
}

}  // TEST_SUITE
