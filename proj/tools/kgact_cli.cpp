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

// Command-line entry point: run, evaluate, synth, affinity-build, refine.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kgact/affinity.hpp"
#include "kgact/config.hpp"
#include "kgact/embeddings.hpp"
#include "kgact/error.hpp"
#include "kgact/evaluation.hpp"
#include "kgact/pipeline.hpp"
#include "kgact/synth.hpp"

namespace fs = std::filesystem;
using namespace kgact;

namespace {

struct Paths {
  std::string kb;
  std::string embeddings;
  std::string manifest;
  std::string config;
  std::string cache;
  std::string out;
  std::string predictions;
  std::string aliases;
  std::string format = "json";
  std::uint64_t seed = 0;
};

EngineConfig read_config(const Paths& p) {
  EngineConfig config = p.config.empty() ? EngineConfig{} : load_config_file(p.config);
  if (!p.aliases.empty()) config.aliases = p.aliases;
  return config;
}

AliasMap read_aliases(const EngineConfig& config) {
  return config.aliases ? load_aliases_file(*config.aliases) : AliasMap{};
}

Engine make_engine(const Paths& p, const EngineConfig& config) {
  auto graph = load_edges_file(p.kb, config.whitelist);
  auto aliases = read_aliases(config);
  std::optional<AffinityCache> cache;
  if (!p.cache.empty() && fs::exists(p.cache)) {
    const Vocabulary vocab = resolve_vocabulary(graph, config, aliases);
    cache = load_affinity_cache(p.cache, make_fingerprint(config, vocab));
  }
  const bool built = !cache.has_value();
  Engine engine(std::move(graph), config, std::move(aliases), std::move(cache));
  if (built && !p.cache.empty()) save_affinity_cache(p.cache, engine.affinity());
  return engine;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  return out;
}

void write_refinement(const fs::path& dir, const RefinementResult& r) {
  save_projection(dir / "model.bin", r.model);
  auto trace = open_out(dir / "trace.csv");
  write_trace_csv(trace, r.trace);
  nlohmann::ordered_json posteriors;
  for (const auto& [clip, p] : r.posteriors) {
    nlohmann::ordered_json entry;
    for (std::size_t i = 0; i < p.actions.size(); ++i) {
      entry[p.actions[i]] = p.probabilities[i];
    }
    posteriors[clip] = std::move(entry);
  }
  open_out(dir / "posteriors.json") << posteriors.dump(2) << '\n';
}

void print_summary(const EvaluationReport& report) {
  std::cout << "search space: " << report.search_space.verbs << " verbs x "
            << report.search_space.nouns << " nouns = "
            << report.search_space.activities() << " activities\n";
  write_report(std::cout, report, "csv");
  if (!report.failures.empty()) {
    std::cout << report.failures.size() << " clip(s) failed\n";
  }
}

int cmd_run(const Paths& p) {
  EngineConfig config = read_config(p);
  const Engine engine = make_engine(p, config);
  std::optional<EmbeddingTable> embeddings;
  if (!p.embeddings.empty()) embeddings = load_embeddings_file(p.embeddings);
  if (config.refine && !embeddings) {
    throw ConfigError("refine = true needs --embeddings");
  }
  const auto manifest = read_manifest(p.manifest);
  const RunOutput output =
      run(engine, manifest, embeddings ? &*embeddings : nullptr);

  fs::create_directories(p.out);
  auto predictions = open_out(fs::path(p.out) / "predictions.jsonl");
  write_predictions(predictions, output.results, config.dump_top,
                    config.dump_frames);
  if (output.refinement) write_refinement(p.out, *output.refinement);
  if (output.report) {
    write_report_file(fs::path(p.out) / "report.json", *output.report, "json");
    write_report_file(fs::path(p.out) / "report.csv", *output.report, "csv");
    print_summary(*output.report);
  } else {
    std::cout << "scored " << output.results.size()
              << " clip(s); no ground truth to evaluate\n";
  }
  for (const auto& f : output.failures) {
    std::cerr << "clip " << f.clip_id << ": " << f.message << '\n';
  }
  return 0;
}

int cmd_evaluate(const Paths& p) {
  std::ifstream in(p.predictions);
  if (!in) throw NotFoundError("cannot open predictions " + p.predictions);
  const auto predictions = read_predictions(in);
  std::map<std::string, ActivityLabel> truths;
  for (const auto& clip : read_manifest(p.manifest)) {
    if (clip.truth) truths.emplace(clip.clip_id, *clip.truth);
  }
  EvaluationReport report = evaluate(predictions, truths);
  if (!p.config.empty()) {
    const EngineConfig config = read_config(p);
    report.search_space = SearchSpace{config.actions.size(), config.objects.size()};
    report.config = config.to_json();
  }
  if (p.out.empty()) {
    write_report(std::cout, report, p.format);
  } else {
    write_report_file(p.out, report, p.format);
    print_summary(report);
  }
  return 0;
}

int cmd_synth(const Paths& p, bool seed_given) {
  KeyValues values;
  fs::path base;
  if (!p.config.empty()) {
    std::ifstream in(p.config);
    if (!in) throw NotFoundError("cannot open config " + p.config);
    values = parse_key_values(in);
    base = fs::path(p.config).parent_path();
  }
  SyntheticWorldSpec spec = parse_synth_spec(values, base);
  if (seed_given) spec.seed = p.seed;
  const SyntheticWorld world = synth_generate(spec);
  const auto manifest = write_world(world, p.out);
  std::cout << "wrote " << world.tables.size() << " clips ("
            << world.activities.size() << " activities, "
            << world.pruned_noise_edges << " noise edges pruned) to "
            << manifest.parent_path().string() << '\n';
  return 0;
}

int cmd_affinity_build(const Paths& p) {
  const EngineConfig config = read_config(p);
  const auto target = p.cache.empty() ? p.out : p.cache;
  if (target.empty()) throw ConfigError("affinity-build needs --cache or --out");
  auto graph = load_edges_file(p.kb, config.whitelist);
  const Engine engine(std::move(graph), config, read_aliases(config));
  save_affinity_cache(target, engine.affinity());
  std::cout << "affinity matrix " << engine.affinity().rows() << " x "
            << engine.affinity().cols() << " written to " << target << '\n';
  return 0;
}

int cmd_refine(const Paths& p) {
  EngineConfig config = read_config(p);
  const Engine engine = make_engine(p, config);
  const EmbeddingTable embeddings = load_embeddings_file(p.embeddings);
  std::vector<LoadedClip> clips;
  for (const auto& entry : read_manifest(p.manifest)) {
    clips.push_back(load_clip(engine, entry));
  }
  const RefinementResult result = refinement_loop(engine, clips, embeddings);
  fs::create_directories(p.out);
  write_refinement(p.out, result);
  std::cout << "refinement: " << result.trace.size() << " iteration(s)";
  if (result.final_action_accuracy) {
    std::cout << ", action accuracy " << *result.initial_action_accuracy
              << " -> " << *result.final_action_accuracy;
  }
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-world activity inference over a commonsense knowledge graph"};
  app.require_subcommand(1);
  Paths p;

  auto* run_cmd = app.add_subcommand("run", "Score a manifest and evaluate it");
  run_cmd->add_option("--kb", p.kb, "Edge dump (TSV)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--manifest", p.manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--config", p.config, "Config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--embeddings", p.embeddings, "Concept embeddings")->check(CLI::ExistingFile);
  run_cmd->add_option("--cache", p.cache, "Affinity cache (read if present, written otherwise)");
  run_cmd->add_option("--aliases", p.aliases, "Alias file")->check(CLI::ExistingFile);
  run_cmd->add_option("--out", p.out, "Output directory")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a prediction dump");
  eval_cmd->add_option("--predictions", p.predictions, "predictions.jsonl")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--manifest", p.manifest, "manifest.json with truth")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--config", p.config, "Config (for the search space)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--format", p.format, "json or csv");
  eval_cmd->add_option("--out", p.out, "Report file (stdout when omitted)");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic world");
  synth_cmd->add_option("--config", p.config, "Config with synth.* keys")->check(CLI::ExistingFile);
  auto* seed_opt = synth_cmd->add_option("--seed", p.seed, "Seed");
  synth_cmd->add_option("--out", p.out, "Output directory")->required();

  auto* aff_cmd = app.add_subcommand("affinity-build", "Build the affinity cache");
  aff_cmd->add_option("--kb", p.kb, "Edge dump (TSV)")->required()->check(CLI::ExistingFile);
  aff_cmd->add_option("--config", p.config, "Config file")->check(CLI::ExistingFile);
  aff_cmd->add_option("--aliases", p.aliases, "Alias file")->check(CLI::ExistingFile);
  aff_cmd->add_option("--cache", p.cache, "Cache file to write");
  aff_cmd->add_option("--out", p.out, "Alias for --cache");

  auto* refine_cmd = app.add_subcommand("refine", "Run the refinement loop");
  refine_cmd->add_option("--kb", p.kb, "Edge dump (TSV)")->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("--embeddings", p.embeddings, "Concept embeddings")->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("--manifest", p.manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("--config", p.config, "Config file")->check(CLI::ExistingFile);
  refine_cmd->add_option("--cache", p.cache, "Affinity cache");
  refine_cmd->add_option("--aliases", p.aliases, "Alias file")->check(CLI::ExistingFile);
  refine_cmd->add_option("--out", p.out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(p);
    if (*eval_cmd) return cmd_evaluate(p);
    if (*synth_cmd) return cmd_synth(p, seed_opt->count() > 0);
    if (*aff_cmd) return cmd_affinity_build(p);
    if (*refine_cmd) return cmd_refine(p);
  } catch (const kgact::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
