// Experiment configuration: JSON file format, defaults and validation.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bcr/agents.hpp"
#include "bcr/core.hpp"
#include "bcr/evaluation.hpp"
#include "bcr/intervention.hpp"

namespace bcr {

/// Bad configuration or flag values (CLI exit status 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure to read or write a file (CLI exit status 3).
class IoError : public Error {
 public:
  using Error::Error;
};

struct SuiteEntry {
  std::string id;   // hypothesis name, e.g. "p0"
  std::string env;  // name of the matching environment, e.g. "q0"
  std::vector<double> pa;
  std::vector<double> po;
};

struct ChainEvidence {
  std::size_t d = 0;
  std::size_t s = 0;
  std::size_t dp = 0;
};

struct ExperimentConfig {
  std::vector<SuiteEntry> suite;
  std::vector<double> prior;

  // experiment
  UpdateMode mode = UpdateMode::Causal;
  std::string env = "q0";
  std::string reference = "p0";
  /// Unset: 200 steps for the naive agent, 2000 for the causal agent.
  std::optional<std::size_t> steps;
  std::size_t runs = 1000;
  std::uint64_t seed = 1;
  /// Unset: {0, d(t) of an agent fully committed to the farthest model}.
  std::optional<std::vector<double>> basins;
  /// 0 selects the hardware concurrency.
  unsigned jobs = 0;

  // criterion evaluation
  Criterion criterion = Criterion::D;
  std::size_t horizon = 3;
  std::size_t perturbations = 100;

  // intervention demo: bundled chain name or inline chain document
  std::variant<std::string, nlohmann::json> chain = std::string("witness");
  ChainEvidence evidence;

  // output
  std::string out = "-";
  std::string summary;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  Experiment experiment() const;
  std::size_t env_index() const;
  std::size_t resolved_steps() const;
  BasinSpec basin_spec() const;
  unsigned resolved_jobs() const;
  FiniteCausalChain resolved_chain() const;

  nlohmann::json to_json() const;
};

/// Two-model suite, uniform prior, environment q0, reference p0.
ExperimentConfig default_config();

/// Overlays the keys present in `doc` onto the defaults. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Throws IoError if the file cannot be read, ConfigError if it is invalid.
ExperimentConfig load_config(const std::filesystem::path& path);

/// A probability given as a JSON number or a rational string "num/den".
double parse_probability(const nlohmann::json& value);

/// Chain from nested tables:
///   {"prior": [..], "lik_d": [[..]], "lik_s": [[[..]]], "lik_dp": [[[[..]]]]}
/// Cardinalities are inferred from the table shapes.
FiniteCausalChain chain_from_json(const nlohmann::json& doc);

/// "witness" or "uninformative"; throws ConfigError otherwise.
FiniteCausalChain bundled_chain(const std::string& name);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

/// Flattened key=value lines for output headers, in a fixed order.
std::vector<std::pair<std::string, std::string>> provenance(
    const ExperimentConfig& config);

}  // namespace bcr
