#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "msb/common.hpp"
#include "msb/io.hpp"

namespace msb {

inline constexpr const char* kVersion = "0.1.0";

enum class ExitCode : int { kOk = 0, kValidation = 1, kNumeric = 2 };

/// One experiment. Fields not used by `kind` keep their defaults.
struct ExperimentConfig {
  std::string mechanism;  ///< path, resolved against the config file's directory
  std::string kind;       ///< validate | solve-v | moments | simulate | gw-converge | tau-dist | wasserstein | stationary
  Vec2 lambda{1.0, 1.0};
  std::vector<Vec2> lambdas;    ///< stationary: several arguments
  double t = 1.0;
  std::vector<double> t_grid;   ///< moments, tau-dist
  double horizon = 1.0;         ///< solve-v
  double step = 1e-3;           ///< ODE step
  MixedState x{1.0, 1};
  MixedState y{1.0, 1};
  Vec2 r{0.0, 0.0};
  std::vector<std::size_t> k_list{10, 100, 1000};
  std::size_t replicas = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 42;
  std::string metric = "euclidean";
  std::string jump_criterion = "product";
  std::size_t bootstrap = 200;
  double burn_in = 0.0;  ///< stationary; 0 selects the envelope default

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Strict decoding with defaults; unknown keys and type mismatches raise ValidationError.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& base_dir = ".");
ExperimentConfig parse_config(const std::string& path);
inline ExperimentConfig parse_config(const char* path) { return parse_config(std::string(path)); }

/// Every field, defaults included; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& cfg);

std::string config_digest(const ExperimentConfig& cfg);

/// Runs one experiment and writes result.csv (result.json for wasserstein) and meta.json.
ExitCode run(const ExperimentConfig& cfg, const std::string& out_dir, unsigned threads,
             std::ostream& log);

/// Full command line front end.
int cli_main(int argc, char** argv);

}  // namespace msb
