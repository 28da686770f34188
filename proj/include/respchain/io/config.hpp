#pragma once

// Flat `key = value` configuration. Lines starting with '#' are comments.
//
//   states = 5
//   state_labels = never;rarely;sometimes;often;always
//   tolerance = 5e-4
//   max_power = 64
//   epsilon_floor = 0.01
//   smoothing_alpha = 0
//   cutoff = 0
//   mode = strict            # or lenient
//   model.flat.kind = stationary_vector
//   model.flat.vector = 0.2;0.2;0.2;0.2;0.2
//   model.tight.kind = drunkards_walk
//   model.tight.stay = 0.8
//   model.fitted.kind = matrix
//   model.fitted.rows = 0.5,0.5 | 0.3,0.7     # rows separated by '|'
//
// Unknown keys are errors so that typos do not silently fall back to defaults.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"

#include "respchain/chain_core.hpp"
#include "respchain/error.hpp"
#include "respchain/io/cohort_csv.hpp"
#include "respchain/theoretical_models.hpp"

namespace respchain::io {

inline constexpr const char *kConfigEnvVar = "RESPCHAIN_CONFIG";

struct Config {
  std::size_t states = 5;
  std::vector<std::string> state_labels;
  double tolerance = 5e-4;
  int max_power = 64;
  double epsilon_floor = 0.01;
  double smoothing_alpha = 0.0;
  double cutoff = 0.0;
  LoadMode mode = LoadMode::strict;
  std::vector<TheoreticalModelSpec> custom_models;

  StateSpace state_space() const { return StateSpace(states, state_labels); }
  StationaryOptions stationary_options() const { return {tolerance, max_power}; }

  /// Built-in models for the configured scale followed by custom ones; a custom
  /// model with a built-in name replaces it.
  std::vector<TheoreticalModelSpec> models() const;
};

namespace detail {

inline double parse_double(std::string_view v, const std::string &key) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ValidationError("config: '" + key + "' expects a number, got '" +
                          std::string(v) + "'");
  return out;
}

inline long long parse_int(std::string_view v, const std::string &key) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ValidationError("config: '" + key + "' expects an integer, got '" +
                          std::string(v) + "'");
  return out;
}

inline std::vector<double> parse_vector(std::string_view v, const std::string &key,
                                        char sep = ';') {
  std::vector<double> out;
  for (auto tok : split(v, sep))
    out.push_back(parse_double(trim(tok), key));
  return out;
}

inline std::vector<std::vector<double>> parse_rows(std::string_view v, const std::string &key) {
  std::vector<std::vector<double>> out;
  for (auto row : split(v, '|'))
    out.push_back(parse_vector(trim(row), key, ','));
  return out;
}

struct PendingModel {
  std::string kind;
  std::optional<double> stay, step, epsilon_floor;
  std::optional<std::vector<double>> vector;
  std::optional<std::vector<std::vector<double>>> rows;
};

inline TheoreticalModelSpec finish_model(const std::string &name,
                                         const PendingModel &m) {
  const auto reject = [&](bool present, const char *field) {
    if (present)
      throw ValidationError("config: model '" + name + "' of kind '" + m.kind +
                            "' does not take '" + field + "'");
  };
  if (m.kind == "drunkards_walk") {
    reject(m.vector.has_value(), "vector");
    reject(m.rows.has_value(), "rows");
    DrunkardsWalkParams p;
    p.stay = m.stay.value_or(p.stay);
    p.epsilon_floor = m.epsilon_floor.value_or(p.epsilon_floor);
    // step left out: filled in per state space when the model is built
    p.step = m.step.value_or(std::nan(""));
    return {name, p};
  }
  if (m.kind == "max_entropy") {
    reject(m.vector || m.rows, "vector/rows");
    reject(m.stay || m.step || m.epsilon_floor, "stay/step/epsilon_floor");
    return {name, MaxEntropyParams{}};
  }
  if (m.kind == "stationary_vector") {
    reject(m.stay || m.step || m.epsilon_floor, "stay/step/epsilon_floor");
    reject(m.rows.has_value(), "rows");
    if (!m.vector)
      throw ValidationError("config: model '" + name + "' needs 'vector'");
    return {name, StationaryVectorParams{*m.vector}};
  }
  if (m.kind == "matrix") {
    reject(m.stay || m.step || m.epsilon_floor, "stay/step/epsilon_floor");
    reject(m.vector.has_value(), "vector");
    if (!m.rows)
      throw ValidationError("config: model '" + name + "' needs 'rows'");
    return {name, ExplicitMatrixParams{*m.rows}};
  }
  if (m.kind.empty())
    throw ValidationError("config: model '" + name + "' needs 'kind'");
  throw ValidationError("config: model '" + name + "' has unknown kind '" + m.kind +
                        "' (drunkards_walk, max_entropy, stationary_vector, matrix)");
}

} // namespace detail

/// Resolves a drunkard's-walk step left unset in the config.
inline TheoreticalModelSpec resolve_model(TheoreticalModelSpec spec,
                                          const StateSpace &space) {
  if (auto *p = std::get_if<DrunkardsWalkParams>(&spec.parameters)) {
    if (std::isnan(p->step))
      p->step = drunkards_walk_closing_step(space, p->stay, p->epsilon_floor);
  }
  return spec;
}

inline std::vector<TheoreticalModelSpec> Config::models() const {
  const auto space = state_space();
  auto out = builtin_models(space);
  for (const auto &custom : custom_models) {
    auto resolved = resolve_model(custom, space);
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto &m) { return m.name == custom.name; });
    if (it != out.end())
      *it = std::move(resolved);
    else
      out.push_back(std::move(resolved));
  }
  return out;
}

/// Applies one setting. Used for both file lines and command-line overrides.
inline void apply_setting(Config &cfg, const std::string &key, std::string_view value) {
  if (key == "states") {
    const auto k = detail::parse_int(value, key);
    if (k < 2)
      throw ValidationError("config: 'states' must be at least 2");
    cfg.states = static_cast<std::size_t>(k);
  } else if (key == "state_labels") {
    cfg.state_labels.clear();
    for (auto tok : detail::split(value, ';'))
      cfg.state_labels.emplace_back(detail::trim(tok));
  } else if (key == "tolerance") {
    cfg.tolerance = detail::parse_double(value, key);
    if (cfg.tolerance <= 0)
      throw ValidationError("config: 'tolerance' must be positive");
  } else if (key == "max_power") {
    const auto n = detail::parse_int(value, key);
    if (n < 1)
      throw ValidationError("config: 'max_power' must be at least 1");
    cfg.max_power = static_cast<int>(n);
  } else if (key == "epsilon_floor") {
    cfg.epsilon_floor = detail::parse_double(value, key);
    if (cfg.epsilon_floor < 0 || cfg.epsilon_floor >= 1)
      throw ValidationError("config: 'epsilon_floor' must be in [0, 1)");
  } else if (key == "smoothing_alpha") {
    cfg.smoothing_alpha = detail::parse_double(value, key);
    if (cfg.smoothing_alpha < 0)
      throw ValidationError("config: 'smoothing_alpha' must be non-negative");
  } else if (key == "cutoff") {
    cfg.cutoff = detail::parse_double(value, key);
  } else if (key == "mode") {
    if (value == "strict")
      cfg.mode = LoadMode::strict;
    else if (value == "lenient")
      cfg.mode = LoadMode::lenient;
    else
      throw ValidationError("config: 'mode' must be strict or lenient, got '" +
                            std::string(value) + "'");
  } else {
    throw ValidationError("config: unknown key '" + key + "'");
  }
}

inline Config parse_config(std::string_view text, const std::string &source = "<config>") {
  Config cfg;
  std::map<std::string, detail::PendingModel> models; // sorted by name
  std::size_t line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ValidationError(source + ":" + std::to_string(line_no) +
                            ": expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    try {
      if (key.rfind("model.", 0) == 0) {
        const auto dot = key.rfind('.');
        const std::string name = key.substr(6, dot - 6);
        const std::string field = key.substr(dot + 1);
        if (dot <= 6 || name.empty())
          throw ValidationError("config: malformed model key '" + key + "'");
        auto &m = models[name];
        if (field == "kind")
          m.kind = std::string(value);
        else if (field == "stay")
          m.stay = detail::parse_double(value, key);
        else if (field == "step")
          m.step = detail::parse_double(value, key);
        else if (field == "epsilon_floor")
          m.epsilon_floor = detail::parse_double(value, key);
        else if (field == "vector")
          m.vector = detail::parse_vector(value, key);
        else if (field == "rows")
          m.rows = detail::parse_rows(value, key);
        else
          throw ValidationError("config: unknown key '" + key + "'");
      } else {
        apply_setting(cfg, key, value);
      }
    } catch (const ValidationError &e) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const auto &[name, m] : models)
    cfg.custom_models.push_back(detail::finish_model(name, m));
  cfg.state_space(); // validates labels against states
  return cfg;
}

inline Config load_config(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open config '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return parse_config(text, path);
}

/// The explicit path if given, else the environment default, else built-in defaults.
inline Config resolve_config(const std::optional<std::string> &path) {
  if (path)
    return load_config(*path);
  if (const char *env = std::getenv(kConfigEnvVar); env && *env)
    return load_config(env);
  return Config{};
}

inline nlohmann::ordered_json to_json(const TheoreticalModelSpec &m) {
  nlohmann::ordered_json j;
  j["name"] = m.name;
  std::visit(
      [&](const auto &p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, DrunkardsWalkParams>) {
          j["kind"] = "drunkards_walk";
          j["stay"] = p.stay;
          j["step"] = p.step;
          j["epsilon_floor"] = p.epsilon_floor;
        } else if constexpr (std::is_same_v<P, MaxEntropyParams>) {
          j["kind"] = "max_entropy";
        } else if constexpr (std::is_same_v<P, StationaryVectorParams>) {
          j["kind"] = "stationary_vector";
          j["vector"] = p.vector;
        } else {
          j["kind"] = "matrix";
          j["rows"] = p.rows;
        }
      },
      m.parameters);
  return j;
}

inline nlohmann::ordered_json to_json(const Config &cfg) {
  nlohmann::ordered_json j;
  j["states"] = cfg.states;
  j["state_labels"] = cfg.state_space().labels();
  j["tolerance"] = cfg.tolerance;
  j["max_power"] = cfg.max_power;
  j["epsilon_floor"] = cfg.epsilon_floor;
  j["smoothing_alpha"] = cfg.smoothing_alpha;
  j["cutoff"] = cfg.cutoff;
  j["mode"] = cfg.mode == LoadMode::strict ? "strict" : "lenient";
  auto models = nlohmann::ordered_json::array();
  for (const auto &m : cfg.custom_models)
    models.push_back(to_json(resolve_model(m, cfg.state_space())));
  j["custom_models"] = models;
  return j;
}

} // namespace respchain::io
