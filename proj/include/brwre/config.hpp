#pragma once

// Experiment configuration: a flat, line-oriented key = value format with
// one nested env { ... } block. Parsing is strict -- unknown keys are
// rejected (with a nearest-key suggestion), weights and pmfs are validated
// through the environment model, and simulation never starts from a config
// that only partially parsed.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "brwre/environment.hpp"
#include "brwre/sampling.hpp"

namespace brwre {

struct ConfigError : std::runtime_error {
  ConfigError(int line_no, const std::string& message)
      : std::runtime_error("config line " + std::to_string(line_no) + ": " + message),
        line(line_no) {}
  int line;
};

struct ExperimentConfig {
  int dimension = 0;
  std::uint32_t t_max = 0;
  std::optional<EnvironmentLaw> env;

  // ensemble seeding (positional split from master_seed) ...
  std::optional<std::uint64_t> master_seed;
  std::uint64_t n_runs = 1;
  std::uint64_t run_offset = 0;
  // ... or explicit single-run seeds
  std::optional<std::uint64_t> env_seed;
  std::optional<std::uint64_t> run_seed;

  bool exact_mode = false;
  SamplingOptions sampling;

  std::uint32_t record_every = 1;
  std::string out_dir = "out";
  int workers = 1;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "dimension", "t_max",       "master_seed",        "n_runs",
      "run_offset", "env_seed",   "run_seed",           "mode",
      "gaussian_threshold",       "record_every",       "out_dir",
      "workers"};
  return keys;
}

inline std::string suggestion_for(std::string_view key) {
  std::size_t best = 4;
  std::string hit;
  for (const std::string& k : known_keys()) {
    std::size_t d = edit_distance(key, k);
    if (d < best) {
      best = d;
      hit = k;
    }
  }
  return hit;
}

template <class T>
T parse_number(std::string_view v, int line, const std::string& what) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(line, "invalid value for " + what + ": '" + std::string(v) + "'");
  return out;
}

inline double parse_double(std::string_view v, int line, const std::string& what) {
  std::string s(v);
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(line, "invalid value for " + what + ": '" + s + "'");
  }
  if (pos != s.size())
    throw ConfigError(line, "invalid value for " + what + ": '" + s + "'");
  return out;
}

// component weight=<w> pmf=<k>:<p>[,<k>:<p>...]
inline EnvironmentLaw::Component parse_component(std::string_view rest, int line) {
  std::optional<double> weight;
  std::vector<OffspringLaw::Atom> atoms;
  std::istringstream is{std::string(rest)};
  std::string tok;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "component: expected key=value, got '" + tok + "'");
    std::string key = tok.substr(0, eq);
    std::string val = tok.substr(eq + 1);
    if (key == "weight") {
      weight = parse_double(val, line, "weight");
    } else if (key == "pmf") {
      std::istringstream ps(val);
      std::string item;
      while (std::getline(ps, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
          throw ConfigError(line, "component pmf: expected k:p, got '" + item + "'");
        std::uint64_t k =
            parse_number<std::uint64_t>(item.substr(0, colon), line, "pmf support value");
        double p = parse_double(item.substr(colon + 1), line, "pmf probability");
        atoms.push_back({k, p});
      }
    } else {
      throw ConfigError(line, "component: unknown attribute '" + key +
                                  "' (expected weight or pmf)");
    }
  }
  if (!weight) throw ConfigError(line, "component: missing weight");
  if (atoms.empty()) throw ConfigError(line, "component: missing pmf");
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& a, const auto& b) { return a.k < b.k; });
  try {
    return {*weight, OffspringLaw(std::move(atoms))};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line, std::string("component: ") + e.what());
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> gaussian_threshold;
  bool saw_dimension = false, saw_t_max = false, saw_n_runs = false;

  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  bool in_env = false;
  int env_line = 0;
  std::vector<EnvironmentLaw::Component> components;
  bool saw_env = false;

  while (std::getline(is, raw)) {
    ++line_no;
    std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (in_env) {
      if (line == "}") {
        in_env = false;
        try {
          cfg.env = EnvironmentLaw(std::move(components));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(env_line, std::string("env block: ") + e.what());
        }
        components.clear();
        continue;
      }
      if (line.starts_with("component")) {
        components.push_back(
            detail::parse_component(line.substr(std::string_view("component").size()),
                                    line_no));
        continue;
      }
      throw ConfigError(line_no, "env block: expected 'component ...' or '}'");
    }

    if (line == "env {" || line == "env{") {
      if (saw_env) throw ConfigError(line_no, "duplicate env block");
      saw_env = true;
      in_env = true;
      env_line = line_no;
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(line_no, "expected 'key = value'");
    std::string key{detail::trim(line.substr(0, eq))};
    std::string_view val = detail::trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError(line_no, "missing value for '" + key + "'");

    if (key == "dimension") {
      cfg.dimension = detail::parse_number<int>(val, line_no, key);
      saw_dimension = true;
    } else if (key == "t_max") {
      cfg.t_max = detail::parse_number<std::uint32_t>(val, line_no, key);
      saw_t_max = true;
    } else if (key == "master_seed") {
      cfg.master_seed = detail::parse_number<std::uint64_t>(val, line_no, key);
    } else if (key == "n_runs") {
      cfg.n_runs = detail::parse_number<std::uint64_t>(val, line_no, key);
      saw_n_runs = true;
    } else if (key == "run_offset") {
      cfg.run_offset = detail::parse_number<std::uint64_t>(val, line_no, key);
    } else if (key == "env_seed") {
      cfg.env_seed = detail::parse_number<std::uint64_t>(val, line_no, key);
    } else if (key == "run_seed") {
      cfg.run_seed = detail::parse_number<std::uint64_t>(val, line_no, key);
    } else if (key == "mode") {
      mode = std::string(val);
    } else if (key == "gaussian_threshold") {
      gaussian_threshold = detail::parse_number<std::uint64_t>(val, line_no, key);
    } else if (key == "record_every") {
      cfg.record_every = detail::parse_number<std::uint32_t>(val, line_no, key);
    } else if (key == "out_dir") {
      cfg.out_dir = std::string(val);
    } else if (key == "workers") {
      cfg.workers = detail::parse_number<int>(val, line_no, key);
    } else {
      std::string hint = detail::suggestion_for(key);
      std::string msg = "unknown key '" + key + "'";
      if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
      throw ConfigError(line_no, msg);
    }
  }
  if (in_env) throw ConfigError(env_line, "env block: missing closing '}'");

  // cross-field validation; every failure names the offending field
  if (!saw_dimension) throw ConfigError(line_no, "missing required key 'dimension'");
  if (cfg.dimension < 1 || cfg.dimension > kMaxDimension)
    throw ConfigError(line_no, "dimension must be in [1,8]");
  if (!saw_t_max) throw ConfigError(line_no, "missing required key 't_max'");
  if (cfg.t_max < 1) throw ConfigError(line_no, "t_max must be >= 1");
  if (!saw_env) throw ConfigError(line_no, "missing env block");
  if (cfg.record_every < 1) throw ConfigError(line_no, "record_every must be >= 1");
  if (cfg.workers < 1) throw ConfigError(line_no, "workers must be >= 1");

  const bool has_single = cfg.env_seed.has_value() || cfg.run_seed.has_value();
  if (cfg.master_seed && has_single)
    throw ConfigError(line_no,
                      "give either master_seed/n_runs or env_seed+run_seed, not both");
  if (!cfg.master_seed && !(cfg.env_seed && cfg.run_seed))
    throw ConfigError(line_no,
                      "seeds required: master_seed (+ n_runs) or env_seed + run_seed");
  if (has_single && saw_n_runs)
    throw ConfigError(line_no, "n_runs requires master_seed seeding");
  if (cfg.master_seed && cfg.n_runs < 1)
    throw ConfigError(line_no, "n_runs must be >= 1");

  if (mode) {
    if (*mode == "exact") {
      cfg.exact_mode = true;
      cfg.sampling.gaussian_threshold = count_max();
      if (gaussian_threshold)
        throw ConfigError(line_no, "gaussian_threshold conflicts with mode = exact");
    } else if (*mode == "gaussian") {
      cfg.exact_mode = false;
    } else {
      throw ConfigError(line_no, "mode must be 'exact' or 'gaussian'");
    }
  }
  if (gaussian_threshold) {
    if (*gaussian_threshold < 2)
      throw ConfigError(line_no, "gaussian_threshold must be >= 2");
    cfg.sampling.gaussian_threshold = *gaussian_threshold;
  }
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace brwre
