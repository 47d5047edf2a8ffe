#include "mctrunc/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "mctrunc/errors.hpp"

namespace mctrunc::cli {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

const json& require(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return j.at(key);
}

template <typename T>
T get(const json& j, const std::string& where, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
T get_required(const json& j, const std::string& where, const char* key) {
  const json& v = require(j, where, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

LyapunovChoice parse_lyapunov(const json& j) {
  only_keys(j, "model.lyapunov", {"type", "scale", "radius", "c1", "c2", "c3", "alpha"});
  LyapunovChoice l;
  l.type = get<std::string>(j, "model.lyapunov", "type", "builtin");
  if (l.type != "builtin" && l.type != "linear" && l.type != "zero") {
    throw ConfigError("model.lyapunov.type must be builtin, linear or zero");
  }
  l.scale = get<double>(j, "model.lyapunov", "scale", 1.0);
  l.radius = get<std::int64_t>(j, "model.lyapunov", "radius", 0);
  l.c1 = get<double>(j, "model.lyapunov", "c1", 300.0);
  l.c2 = get<double>(j, "model.lyapunov", "c2", 300.0);
  l.c3 = get<double>(j, "model.lyapunov", "c3", 300.0);
  l.alpha = get<double>(j, "model.lyapunov", "alpha", 4.0);
  if (l.type != "builtin" && l.radius < 0) throw ConfigError("model.lyapunov.radius must be nonnegative");
  if (l.type == "linear" && !(l.scale > 0.0)) throw ConfigError("model.lyapunov.scale must be positive");
  return l;
}

StochasticizationMethod parse_method(const std::string& s) {
  if (s == "row") return StochasticizationMethod::row;
  if (s == "perron") return StochasticizationMethod::perron;
  throw ConfigError("bounds.methods: unknown method '" + s + "'");
}

void check_reward(const std::string& r) {
  if (r == "r" || r == "one") return;
  if (r.rfind("coord:", 0) == 0) {
    const std::string idx = r.substr(6);
    if (!idx.empty() && std::all_of(idx.begin(), idx.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) return;
  }
  throw ConfigError("bounds.rewards: unknown reward '" + r + "'");
}

}  // namespace

Config parse_config(const json& j) {
  only_keys(j, "config", {"model", "truncation", "return_set", "bounds", "output"});
  Config c;
  c.source = j;

  const json& m = require(j, "config", "model");
  only_keys(m, "model", {"name", "params", "lyapunov"});
  c.model.name = get_required<std::string>(m, "model", "name");
  if (c.model.name != "gm1" && c.model.name != "toggle") throw ConfigError("model.name must be gm1 or toggle");
  if (m.contains("params")) {
    if (!m.at("params").is_object()) throw ConfigError("model.params: expected an object");
    c.model.params = m.at("params");
  }
  if (m.contains("lyapunov")) c.model.lyapunov = parse_lyapunov(m.at("lyapunov"));

  const json& t = require(j, "config", "truncation");
  only_keys(t, "truncation", {"A", "schedule"});
  const json& a = require(t, "truncation", "A");
  only_keys(a, "truncation.A", {"type", "level", "box"});
  c.truncation.type = get_required<std::string>(a, "truncation.A", "type");
  if (c.truncation.type == "range" || c.truncation.type == "simplex") {
    c.truncation.level = get_required<std::int64_t>(a, "truncation.A", "level");
    if (c.truncation.level < 0) throw ConfigError("truncation.A.level must be nonnegative");
  } else if (c.truncation.type == "box") {
    c.truncation.box = get_required<std::vector<std::int64_t>>(a, "truncation.A", "box");
    if (c.truncation.box.empty()) throw ConfigError("truncation.A.box must not be empty");
    for (auto v : c.truncation.box) {
      if (v < 0) throw ConfigError("truncation.A.box entries must be nonnegative");
    }
  } else {
    throw ConfigError("truncation.A.type must be range, simplex or box");
  }
  c.truncation.schedule = get<std::vector<std::int64_t>>(t, "truncation", "schedule", {});

  if (j.contains("return_set")) {
    const json& k = j.at("return_set");
    only_keys(k, "return_set", {"mode", "states"});
    c.return_set.mode = get<std::string>(k, "return_set", "mode", "lyapunov");
    if (c.return_set.mode == "explicit") {
      c.return_set.states = get_required<std::vector<std::vector<std::int64_t>>>(k, "return_set", "states");
      if (c.return_set.states.empty()) throw ConfigError("return_set.states must not be empty");
    } else if (c.return_set.mode != "lyapunov") {
      throw ConfigError("return_set.mode must be lyapunov or explicit");
    }
  }

  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    only_keys(b, "bounds", {"methods", "rewards", "singleton", "require_rate_envelope"});
    if (b.contains("methods")) {
      c.bounds.methods.clear();
      for (const auto& s : get_required<std::vector<std::string>>(b, "bounds", "methods")) {
        c.bounds.methods.push_back(parse_method(s));
      }
      if (c.bounds.methods.empty()) throw ConfigError("bounds.methods must not be empty");
    }
    if (b.contains("rewards")) {
      c.bounds.rewards = get_required<std::vector<std::string>>(b, "bounds", "rewards");
      if (c.bounds.rewards.empty()) throw ConfigError("bounds.rewards must not be empty");
      for (const auto& r : c.bounds.rewards) check_reward(r);
    }
    c.bounds.singleton = get<bool>(b, "bounds", "singleton", true);
    c.bounds.require_rate_envelope = get<bool>(b, "bounds", "require_rate_envelope", true);
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    only_keys(o, "output", {"dir", "report", "csv", "approximation"});
    c.output.dir = get<std::string>(o, "output", "dir", "out");
    c.output.report = get<std::string>(o, "output", "report", "report.json");
    c.output.csv = get<std::string>(o, "output", "csv", "sweep.csv");
    c.output.approximation = get<bool>(o, "output", "approximation", true);
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace mctrunc::cli
