#include <doctest.h>

#include <algorithm>
#include <string>

#include "potlab/cli/config.hpp"
#include "potlab/cli/experiments.hpp"

using namespace potlab::cli;

namespace {

bool has_error(const ParseResult& r, const std::string& needle) {
  return std::any_of(r.errors.begin(), r.errors.end(),
                     [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

const Verdict& verdict(const Report& rep, const std::string& name) {
  const auto it = std::find_if(rep.verdicts.begin(), rep.verdicts.end(), [&](const Verdict& v) { return v.name == name; });
  REQUIRE(it != rep.verdicts.end());
  return *it;
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const auto r = parse_config(R"(
experiment = "flatness"
[domain]
kind = "kp_cone"
[knobs]
radii = [1.0, 2.0, 4.0]
)");
  REQUIRE(r.config);
  CHECK(r.errors.empty());
  CHECK(r.config->list("radii").size() == 3);
  CHECK(r.config->count("boundary_samples") == 6000);
  CHECK(r.config->seed == 1);
}

TEST_CASE("config errors are collected") {
  const auto walks = parse_config(R"(
experiment = "wos"
[domain]
kind = "halfspace"
[knobs]
walks = 0
)");
  CHECK_FALSE(walks.config);
  CHECK(has_error(walks, "walks ≥ 1"));

  const auto many = parse_config(R"(
experiment = "flatness"
colour = "red"
[domain]
kind = "torus"
[knobs]
nonsense = 3
)");
  CHECK_FALSE(many.config);
  CHECK(has_error(many, "unknown kind 'torus' (supported:"));
  CHECK(has_error(many, "halfspace"));
  CHECK(has_error(many, "colour"));
  CHECK(has_error(many, "nonsense"));
  CHECK(many.errors.size() >= 3);

  CHECK(has_error(parse_config("experiment = \"teleport\""), "supported:"));
  CHECK(has_error(parse_config("experiment = ["), ""));
  CHECK_FALSE(parse_config("experiment = [").config);
}

TEST_CASE("defaults validate") {
  for (const auto& name : experiment_names()) {
    const auto e = *parse_experiment(name);
    const std::string kind = e == Experiment::kCone ? "hong_cone" : "halfspace";
    CHECK_MESSAGE(validate(default_config(e, kind)).empty(), name);
  }
  CHECK_FALSE(validate(default_config(Experiment::kCone, "halfspace")).empty());
}

TEST_CASE("cone defaults pass") {
  const auto rep = run_experiment(default_config(Experiment::kCone, "hong_cone"));
  CHECK(rep.pass());
  CHECK(verdict(rep, "abs_f_at_theta0").value <= 1e-12);
}

TEST_CASE("half-space normal profile is identically zero") {
  const auto rep = run_experiment(default_config(Experiment::kVmo, "halfspace"));
  CHECK(rep.pass());
  CHECK(verdict(rep, "max_oscillation").value == 0.0);
}

TEST_CASE("half-space Riesz residual") {
  const auto rep = run_experiment(default_config(Experiment::kRiesz, "halfspace"));
  CHECK(rep.pass());
  CHECK(verdict(rep, "identity_residual").value <= 0.02);
}

TEST_CASE("reports are deterministic") {
  auto cfg = default_config(Experiment::kWos, "halfspace");
  cfg.knobs["walks"] = 20000.0;
  cfg.seed = 11;
  const auto a = run_experiment(cfg).to_json().dump();
  const auto b = run_experiment(cfg).to_json().dump();
  CHECK(a == b);
  cfg.seed = 12;
  CHECK(run_experiment(cfg).to_json().dump() != a);
}
