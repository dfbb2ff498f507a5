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

#include "kgact/evaluation.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "kgact/error.hpp"

namespace kgact {

EvaluationReport evaluate(const std::map<std::string, ActivityLabel>& predictions,
                          const std::map<std::string, ActivityLabel>& truths) {
  if (predictions.empty()) throw DataError("evaluate: no predictions");
  EvaluationReport report;
  for (const auto& [clip, predicted] : predictions) {
    const auto truth = truths.find(clip);
    if (truth == truths.end()) {
      throw DataError("evaluate: clip '" + clip + "' has no ground truth");
    }
    ClipOutcome outcome{clip, predicted, truth->second};
    report.object.correct += outcome.object_correct();
    report.action.correct += outcome.action_correct();
    report.activity.correct += outcome.activity_correct();
    report.clips.push_back(std::move(outcome));
  }
  report.object.total = report.action.total = report.activity.total =
      predictions.size();
  return report;
}

namespace {

nlohmann::ordered_json metric_json(const MetricCount& m) {
  return {{"correct", m.correct}, {"total", m.total}, {"accuracy", m.accuracy()}};
}

MetricCount metric_from(const nlohmann::json& j) {
  return MetricCount{j.at("correct").get<std::size_t>(),
                     j.at("total").get<std::size_t>()};
}

}  // namespace

nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["metrics"] = {{"object", metric_json(report.object)},
                  {"action", metric_json(report.action)},
                  {"activity", metric_json(report.activity)}};
  j["search_space"] = {{"verbs", report.search_space.verbs},
                       {"nouns", report.search_space.nouns},
                       {"activities", report.search_space.activities()}};
  auto clips = nlohmann::ordered_json::array();
  for (const auto& c : report.clips) {
    clips.push_back({{"clip", c.clip_id},
                     {"predicted", {{"verb", c.predicted.verb}, {"noun", c.predicted.noun}}},
                     {"truth", {{"verb", c.truth.verb}, {"noun", c.truth.noun}}},
                     {"object_correct", c.object_correct()},
                     {"action_correct", c.action_correct()},
                     {"activity_correct", c.activity_correct()}});
  }
  j["clips"] = std::move(clips);
  auto failures = nlohmann::ordered_json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"clip", f.clip_id}, {"error", f.message}});
  }
  j["failures"] = std::move(failures);
  j["config"] = report.config;
  return j;
}

EvaluationReport report_from_json(const nlohmann::ordered_json& j) {
  EvaluationReport r;
  try {
    const auto& m = j.at("metrics");
    r.object = metric_from(m.at("object"));
    r.action = metric_from(m.at("action"));
    r.activity = metric_from(m.at("activity"));
    r.search_space = SearchSpace{j.at("search_space").at("verbs").get<std::size_t>(),
                                 j.at("search_space").at("nouns").get<std::size_t>()};
    for (const auto& c : j.at("clips")) {
      r.clips.push_back(ClipOutcome{
          c.at("clip").get<std::string>(),
          ActivityLabel{c.at("predicted").at("verb").get<std::string>(),
                        c.at("predicted").at("noun").get<std::string>()},
          ActivityLabel{c.at("truth").at("verb").get<std::string>(),
                        c.at("truth").at("noun").get<std::string>()}});
    }
    for (const auto& f : j.at("failures")) {
      r.failures.push_back(ClipFailure{f.at("clip").get<std::string>(),
                                       f.at("error").get<std::string>()});
    }
    r.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return r;
}

void write_report(std::ostream& out, const EvaluationReport& report,
                  std::string_view format) {
  if (format == "json") {
    out << report_to_json(report).dump(2) << '\n';
    return;
  }
  if (format == "csv") {
    out << "metric,correct,total,accuracy\n";
    char buf[128];
    for (const auto& [name, m] :
         {std::pair{"object", report.object}, std::pair{"action", report.action},
          std::pair{"activity", report.activity}}) {
      std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.2f\n", name, m.correct,
                    m.total, 100.0 * m.accuracy());
      out << buf;
    }
    return;
  }
  throw ConfigError("unknown report format '" + std::string(format) + "'");
}

void write_report_file(const std::filesystem::path& path,
                       const EvaluationReport& report, std::string_view format) {
  if (format != "json" && format != "csv") {
    throw ConfigError("unknown report format '" + std::string(format) + "'");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  write_report(out, report, format);
}

}  // namespace kgact
