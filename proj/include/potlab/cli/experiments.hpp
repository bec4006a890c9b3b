#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "potlab/cli/config.hpp"
#include "potlab/geometry/domain.hpp"

namespace potlab::cli {

using Json = nlohmann::json;

struct Verdict {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string comparison;  // "<=" or ">="
  bool pass = false;
};

Verdict at_most(std::string name, double value, double tolerance);
Verdict at_least(std::string name, double value, double tolerance);

struct SideFile {
  std::string name;
  std::string content;
};

struct Report {
  std::string experiment;
  std::uint64_t seed = 0;
  Json inputs;
  Json outputs = Json::object();
  std::vector<Verdict> verdicts;
  std::vector<SideFile> side_files;

  bool pass() const;
  Json to_json() const;  // no timing, so equal configs give equal bytes
};

/// Builds the domain of a descriptor. Hong cones with theta0 = 0 (and
/// products over them) carry the solved profile and its explicit solution.
geometry::ImplicitDomain resolve_domain(const geometry::DomainDescriptor& d);

Json config_json(const ExperimentConfig& cfg);

/// Dispatches to the owning module. Module errors propagate with the
/// failing operation prefixed to the message.
Report run_experiment(const ExperimentConfig& cfg);

}  // namespace potlab::cli
