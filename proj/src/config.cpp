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

#include "kgact/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "internal/text.hpp"
#include "kgact/error.hpp"

namespace kgact {
namespace {

std::string unquote(std::string_view v) {
  v = internal::trim(v);
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    v = v.substr(1, v.size() - 2);
  }
  return std::string(v);
}

// Strips a trailing comment that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

double to_double(const std::string& key, std::string_view value) {
  const std::string v = unquote(value);
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  const auto d = internal::parse_double(v);
  if (!d || std::isnan(*d)) throw ConfigError(key + ": expected a number");
  return *d;
}

long long to_int(const std::string& key, std::string_view value) {
  const auto i = internal::parse_int<long long>(unquote(value));
  if (!i) throw ConfigError(key + ": expected an integer");
  return *i;
}

std::size_t to_count(const std::string& key, std::string_view value) {
  const long long i = to_int(key, value);
  if (i < 0) throw ConfigError(key + ": must be >= 0");
  return static_cast<std::size_t>(i);
}

bool to_bool(const std::string& key, std::string_view value) {
  const std::string v = unquote(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false");
}

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string list(const auto& items) {
  std::string out = "[";
  bool first = true;
  for (const auto& item : items) {
    if (!first) out += ", ";
    out += "\"" + std::string(item) + "\"";
    first = false;
  }
  return out + "]";
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = internal::trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      throw ParseError("config sections are not supported", line_no);
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("expected key = value", line_no);
    }
    const std::string key(internal::trim(body.substr(0, eq)));
    if (key.empty()) throw ParseError("empty config key", line_no);
    if (!values.emplace(key, std::string(internal::trim(body.substr(eq + 1))))
             .second) {
      throw ParseError("duplicate config key '" + key + "'", line_no);
    }
  }
  return values;
}

std::vector<std::string> parse_list(std::string_view value) {
  value = internal::trim(value);
  if (!value.empty() && value.front() == '[') {
    if (value.back() != ']') throw ConfigError("unterminated list");
    value = value.substr(1, value.size() - 2);
  }
  std::vector<std::string> out;
  if (internal::trim(value).empty()) return out;
  for (const auto item : internal::split(value, ',')) {
    std::string v = unquote(item);
    if (v.empty()) throw ConfigError("empty list item");
    out.push_back(std::move(v));
  }
  return out;
}

void EngineConfig::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw ConfigError("lambda must be finite and >= 0");
  }
  if (l_max < 1 || l_max > kMaxPathHops) {
    throw ConfigError("l_max must lie in [1, 5]");
  }
  if (whitelist.empty()) throw ConfigError("whitelist must not be empty");
  if (!(eps_p > 0.0 && eps_p <= 1.0)) throw ConfigError("eps_p must lie in (0, 1]");
  if (!(eps_e > 0.0 && eps_e <= 1.0)) throw ConfigError("eps_e must lie in (0, 1]");
  if (max_evidence == 0) throw ConfigError("max_evidence must be >= 1");
  if (k == 0) throw ConfigError("k must be >= 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be > 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be >= 0");
  if (!(delta_stop >= 0.0)) throw ConfigError("delta_stop must be >= 0");
  if (iteration_cap < 1) throw ConfigError("iteration_cap must be >= 1");
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw ConfigError("train_ratio must lie in (0, 1)");
  }
}

nlohmann::ordered_json EngineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["lambda"] = lambda;
  j["l_max"] = l_max;
  j["whitelist"] = std::vector<std::string>(whitelist.begin(), whitelist.end());
  j["eps_p"] = eps_p;
  j["eps_e"] = eps_e;
  j["max_evidence"] = max_evidence;
  j["refine"] = refine;
  j["k"] = k;
  j["tau"] = tau;
  j["alpha"] = alpha;
  j["mu"] = mu;
  j["delta_stop"] = std::isinf(delta_stop) ? nlohmann::ordered_json("inf")
                                           : nlohmann::ordered_json(delta_stop);
  j["iteration_cap"] = iteration_cap;
  j["train_ratio"] = train_ratio;
  j["actions"] = actions;
  j["objects"] = objects;
  if (aliases) j["aliases"] = aliases->generic_string();
  return j;
}

std::string EngineConfig::to_text() const {
  std::ostringstream out;
  out << "lambda = " << number(lambda) << '\n'
      << "l_max = " << l_max << '\n'
      << "whitelist = " << list(whitelist) << '\n'
      << "eps_p = " << number(eps_p) << '\n'
      << "eps_e = " << number(eps_e) << '\n'
      << "max_evidence = " << max_evidence << '\n'
      << "refine = " << (refine ? "true" : "false") << '\n'
      << "k = " << k << '\n'
      << "tau = " << number(tau) << '\n'
      << "alpha = " << number(alpha) << '\n'
      << "mu = " << number(mu) << '\n'
      << "delta_stop = " << number(delta_stop) << '\n'
      << "iteration_cap = " << iteration_cap << '\n'
      << "train_ratio = " << number(train_ratio) << '\n'
      << "dump_top = " << dump_top << '\n'
      << "dump_frames = " << (dump_frames ? "true" : "false") << '\n'
      << "actions = " << list(actions) << '\n'
      << "objects = " << list(objects) << '\n';
  if (aliases) out << "aliases = \"" << aliases->generic_string() << "\"\n";
  return out.str();
}

EngineConfig parse_config(const KeyValues& values,
                          const std::filesystem::path& base_dir) {
  EngineConfig c;
  for (const auto& [key, value] : values) {
    if (key.starts_with("synth.")) continue;
    if (key == "lambda") {
      c.lambda = to_double(key, value);
    } else if (key == "l_max") {
      c.l_max = static_cast<int>(to_int(key, value));
    } else if (key == "whitelist") {
      c.whitelist.clear();
      for (auto& r : parse_list(value)) c.whitelist.insert(normalize_relation(r));
    } else if (key == "eps_p") {
      c.eps_p = to_double(key, value);
    } else if (key == "eps_e") {
      c.eps_e = to_double(key, value);
    } else if (key == "max_evidence") {
      c.max_evidence = to_count(key, value);
    } else if (key == "refine") {
      c.refine = to_bool(key, value);
    } else if (key == "k") {
      c.k = to_count(key, value);
    } else if (key == "tau") {
      c.tau = to_double(key, value);
    } else if (key == "alpha") {
      c.alpha = to_double(key, value);
    } else if (key == "mu") {
      c.mu = to_double(key, value);
    } else if (key == "delta_stop") {
      c.delta_stop = to_double(key, value);
    } else if (key == "iteration_cap") {
      c.iteration_cap = static_cast<int>(to_int(key, value));
    } else if (key == "train_ratio") {
      c.train_ratio = to_double(key, value);
    } else if (key == "actions") {
      c.actions = parse_list(value);
    } else if (key == "objects") {
      c.objects = parse_list(value);
    } else if (key == "aliases") {
      std::filesystem::path p = unquote(value);
      c.aliases = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    } else if (key == "dump_top") {
      c.dump_top = to_count(key, value);
    } else if (key == "dump_frames") {
      c.dump_frames = to_bool(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

EngineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open config " + path.string());
  try {
    return parse_config(parse_key_values(in), path.parent_path());
  } catch (const Error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace kgact
