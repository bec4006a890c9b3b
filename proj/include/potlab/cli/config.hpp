#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "potlab/geometry/domain.hpp"

namespace potlab::cli {

enum class Experiment { kFlatness, kWos, kRiesz, kJump, kVmo, kCone, kBlowup, kVariational };

std::string experiment_name(Experiment e);
std::optional<Experiment> parse_experiment(const std::string& name);
std::vector<std::string> experiment_names();

using Knob = std::variant<double, std::string, std::vector<double>, std::vector<std::string>>;

struct ExperimentConfig {
  Experiment experiment = Experiment::kFlatness;
  geometry::DomainDescriptor domain;
  std::map<std::string, Knob> knobs;  // every knob of the experiment, defaults filled in
  std::map<std::string, double> tolerances;
  std::uint64_t seed = 1;
  std::string out;

  double num(const std::string& name) const;
  std::size_t count(const std::string& name) const;
  const std::string& str(const std::string& name) const;
  const std::vector<double>& list(const std::string& name) const;
  const std::vector<std::string>& names(const std::string& name) const;
  double tol(const std::string& name) const;
  bool has_check(const std::string& name) const;  // membership in the "checks" knob
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;
};

/// TOML text to a validated config, reporting every error found.
///
///   experiment = "flatness"
///   seed = 7
///   [domain]   kind, dim, normal, offset, theta0, amplitude, frequency, extra_dims, base_kind
///   [knobs]    experiment-specific, see knob_defaults()
///   [tolerances]
ParseResult parse_config(const std::string& text);

/// Config with every default, for a given experiment and domain kind.
ExperimentConfig default_config(Experiment e, const std::string& kind);

/// Defaults of the experiment's knobs and tolerances.
std::map<std::string, Knob> knob_defaults(Experiment e);
std::map<std::string, double> tolerance_defaults(Experiment e);

/// All knob and domain checks on an assembled config.
std::vector<std::string> validate(const ExperimentConfig& cfg);

}  // namespace potlab::cli
