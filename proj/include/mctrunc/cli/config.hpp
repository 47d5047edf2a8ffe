#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mctrunc/censor.hpp"

namespace mctrunc::cli {

/// Which Lyapunov pair certifies the run.
struct LyapunovChoice {
  std::string type = "builtin";  // builtin | linear | zero
  double scale = 1.0;            // linear: g1 = g2 = scale * size(x)
  std::int64_t radius = 0;       // linear, zero: analytic radius n1 = n2
  double c1 = 300.0, c2 = 300.0, c3 = 300.0;  // gm1 builtin constants
  double alpha = 4.0;                         // toggle moment constant
};

struct ModelConfig {
  std::string name;  // gm1 | toggle
  nlohmann::json params = nlohmann::json::object();
  LyapunovChoice lyapunov;
};

/// A = {x : size(x) <= level} for range and simplex, or a coordinate box.
struct TruncationConfig {
  std::string type;  // range | simplex | box
  std::int64_t level = 0;
  std::vector<std::int64_t> box;
  std::vector<std::int64_t> schedule;
};

struct ReturnSetConfig {
  std::string mode = "lyapunov";  // lyapunov | explicit
  std::vector<std::vector<std::int64_t>> states;
};

struct BoundsConfig {
  std::vector<StochasticizationMethod> methods{StochasticizationMethod::row};
  std::vector<std::string> rewards{"r"};  // r | one | coord:i
  bool singleton = true;
  bool require_rate_envelope = true;
};

struct OutputConfig {
  std::string dir = "out";
  std::string report = "report.json";
  std::string csv = "sweep.csv";
  bool approximation = true;
};

struct Config {
  ModelConfig model;
  TruncationConfig truncation;
  ReturnSetConfig return_set;
  BoundsConfig bounds;
  OutputConfig output;
  nlohmann::json source;  // the parsed document, echoed into reports
};

/// Throws ConfigError on malformed input or unknown keys.
Config parse_config(const nlohmann::json& j);
Config load_config(const std::string& path);

/// Environment variable that overrides output.dir.
inline constexpr const char* kOutputDirEnv = "MCTRUNC_OUTPUT_DIR";

}  // namespace mctrunc::cli
