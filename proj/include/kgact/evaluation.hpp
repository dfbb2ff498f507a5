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

#ifndef KGACT_EVALUATION_HPP_
#define KGACT_EVALUATION_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgact/oracle_io.hpp"

namespace kgact {

struct MetricCount {
  std::size_t correct = 0;
  std::size_t total = 0;

  double accuracy() const {
    return total == 0 ? 0.0
                      : static_cast<double>(correct) / static_cast<double>(total);
  }
  friend bool operator==(const MetricCount&, const MetricCount&) = default;
};

struct SearchSpace {
  std::size_t verbs = 0;
  std::size_t nouns = 0;
  std::size_t activities() const { return verbs * nouns; }
  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;
};

struct ClipOutcome {
  std::string clip_id;
  ActivityLabel predicted;
  ActivityLabel truth;

  bool object_correct() const { return predicted.noun == truth.noun; }
  bool action_correct() const { return predicted.verb == truth.verb; }
  bool activity_correct() const { return predicted == truth; }
  friend bool operator==(const ClipOutcome&, const ClipOutcome&) = default;
};

struct ClipFailure {
  std::string clip_id;
  std::string message;
  friend bool operator==(const ClipFailure&, const ClipFailure&) = default;
};

struct EvaluationReport {
  MetricCount object;
  MetricCount action;
  MetricCount activity;
  SearchSpace search_space;
  std::vector<ClipOutcome> clips;  // ordered by clip_id
  std::vector<ClipFailure> failures;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();

  friend bool operator==(const EvaluationReport&,
                         const EvaluationReport&) = default;
};

// Exact-match top-1 accuracy. Every prediction needs a truth entry; truths
// without a prediction are ignored. Throws DataError on zero predictions.
EvaluationReport evaluate(const std::map<std::string, ActivityLabel>& predictions,
                          const std::map<std::string, ActivityLabel>& truths);

nlohmann::ordered_json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::ordered_json& j);

// "json" or "csv"; anything else is a ConfigError. The CSV has the header
// `metric,correct,total,accuracy` and one row per metric, accuracy in
// percent with two decimals.
void write_report(std::ostream& out, const EvaluationReport& report,
                  std::string_view format);
void write_report_file(const std::filesystem::path& path,
                       const EvaluationReport& report, std::string_view format);

}  // namespace kgact

#endif  // KGACT_EVALUATION_HPP_
