#include "potlab/cli/config.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "potlab/core/errors.hpp"

namespace potlab::cli {

namespace {

using geometry::DomainDescriptor;
using Strings = std::vector<std::string>;
using Reals = std::vector<double>;

const std::vector<std::pair<Experiment, std::string>>& experiment_table() {
  static const std::vector<std::pair<Experiment, std::string>> table{
      {Experiment::kFlatness, "flatness"}, {Experiment::kWos, "wos"},       {Experiment::kRiesz, "riesz"},
      {Experiment::kJump, "jump"},         {Experiment::kVmo, "vmo"},       {Experiment::kCone, "cone"},
      {Experiment::kBlowup, "blowup"},     {Experiment::kVariational, "variational"}};
  return table;
}

const std::set<std::string> kCounts{"walks",        "max_steps",     "samples",         "centers",
                                    "configs",      "levels",        "windows",         "radial_order",
                                    "angular_order", "boundary_samples", "plane_samples", "gradient_points",
                                    "points",       "sphere_order"};
const std::set<std::string> kPositive{"eps_shell", "support",     "s0",          "inner",      "first_window",
                                      "window_radius", "step",    "ode_tol",     "rk4_step",   "csv_spacing",
                                      "kernel_radius", "separation", "sample_radius", "ac_spacing", "bump_half_width",
                                      "zeta_radius", "eigenvalue", "min_distance"};
const std::set<std::string> kPoints{"point", "pole", "x", "y", "green_point", "green_pole"};
const std::set<std::string> kPositiveLists{"radii", "scales", "kernel_radii", "sphere_radii", "spacings"};

const std::map<std::string, Strings>& choices() {
  static const std::map<std::string, Strings> table{
      {"flatness.mode", {"trace", "lemma83"}},
      {"flatness.expect", {"none", "zero", "constant", "slope1"}},
      {"vmo.field", {"normal", "log_kernel"}},
      {"vmo.mode", {"profile", "vertex"}},
      {"vmo.expect", {"auto", "none", "zero", "scale_invariant"}},
      {"wos.checks", {"harmonic_measure", "green"}},
      {"cone.checks", {"profile", "kernel"}},
      {"blowup.checks", {"gradient_bound", "kernel_mean"}},
      {"variational.checks", {"sphere", "ac", "first_variation", "gauss_green"}},
      {"flatness.lemma_domains", {"halfspace", "perturbed_graph", "kp_cone", "hong_cone"}},
  };
  return table;
}

std::string join(const Strings& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::string kind_of(const Knob& k) {
  switch (k.index()) {
    case 0: return "a number";
    case 1: return "a string";
    case 2: return "a list of numbers";
    default: return "a list of strings";
  }
}

// Converts a TOML node to the type of the default knob.
std::optional<Knob> convert(const toml::node& node, const Knob& like) {
  switch (like.index()) {
    case 0:
      if (auto v = node.value<double>()) return Knob{*v};
      return std::nullopt;
    case 1:
      if (auto v = node.value<std::string>()) return Knob{*v};
      return std::nullopt;
    case 2: {
      const auto* arr = node.as_array();
      if (!arr) return std::nullopt;
      Reals out;
      for (const auto& e : *arr) {
        auto v = e.value<double>();
        if (!v) return std::nullopt;
        out.push_back(*v);
      }
      return Knob{out};
    }
    default: {
      const auto* arr = node.as_array();
      if (!arr) return std::nullopt;
      Strings out;
      for (const auto& e : *arr) {
        auto v = e.value<std::string>();
        if (!v) return std::nullopt;
        out.push_back(*v);
      }
      return Knob{out};
    }
  }
}

void check_domain(const ExperimentConfig& cfg, Strings& errors) {
  const auto& d = cfg.domain;
  const auto kinds = geometry::supported_kinds();
  if (std::find(kinds.begin(), kinds.end(), d.kind) == kinds.end()) {
    errors.push_back("domain.kind: unknown kind '" + d.kind + "' (supported: " + join(kinds) + ")");
    return;
  }
  if (d.kind == "hong_cone" || (d.kind == "product" && d.base_kind == "hong_cone")) {
    if (!(d.theta0 >= 0.0 && d.theta0 < std::numbers::pi / 2)) {
      errors.push_back("domain.theta0 must lie in [0, pi/2) (0 selects the solved profile)");
    }
  } else {
    DomainDescriptor probe = d;
    try {
      geometry::make_domain(probe);
    } catch (const PreconditionError& e) {
      errors.push_back(std::string("domain: ") + e.what());
    }
  }
  if (d.kind == "product" && d.extra_dims < 1) errors.push_back("domain.extra_dims ≥ 1");

  const std::string exp = experiment_name(cfg.experiment);
  auto need_halfspace3 = [&](const std::string& why) {
    if (d.kind != "halfspace" || d.dim != 3 || d.offset != 0.0) {
      errors.push_back(exp + ": " + why + " needs domain.kind = halfspace with dim = 3 and offset = 0");
    }
  };
  switch (cfg.experiment) {
    case Experiment::kCone:
      if (d.kind != "hong_cone") errors.push_back("cone: domain.kind must be hong_cone");
      break;
    case Experiment::kVariational: need_halfspace3("the x3+ oracles"); break;
    case Experiment::kJump:
    case Experiment::kRiesz:
      if (d.kind != "halfspace" && d.kind != "kp_cone" && d.kind != "hong_cone") {
        errors.push_back(exp + ": domain.kind must be halfspace, kp_cone or hong_cone");
      }
      break;
    default: break;
  }
}

}  // namespace

std::string experiment_name(Experiment e) {
  for (const auto& [k, n] : experiment_table()) {
    if (k == e) return n;
  }
  return "unknown";
}

std::optional<Experiment> parse_experiment(const std::string& name) {
  for (const auto& [k, n] : experiment_table()) {
    if (n == name) return k;
  }
  return std::nullopt;
}

Strings experiment_names() {
  Strings out;
  for (const auto& [k, n] : experiment_table()) out.push_back(n);
  return out;
}

std::map<std::string, Knob> knob_defaults(Experiment e) {
  switch (e) {
    case Experiment::kFlatness:
      return {{"mode", "trace"},
              {"radii", Reals{1, 2, 4}},
              {"point", Reals{}},
              {"boundary_samples", 6000.0},
              {"plane_samples", 3000.0},
              {"expect", "none"},
              {"configs", 50.0},
              {"corkscrew_c", 4.0},
              {"lemma_domains", Strings{"halfspace", "perturbed_graph", "kp_cone", "hong_cone"}}};
    case Experiment::kWos:
      return {{"walks", 100000.0},
              {"eps_shell", 1e-4},
              {"max_steps", 10000.0},
              {"pole", Reals{}},
              {"green_point", Reals{}},
              {"green_pole", Reals{}},
              {"checks", Strings{"harmonic_measure", "green"}}};
    case Experiment::kRiesz:
      return {{"x", Reals{}},           {"y", Reals{}},         {"first_window", 8.0},
              {"windows", 4.0},         {"inner", 0.05},        {"ratio", 1.5},
              {"radial_order", 8.0},    {"angular_order", 16.0}};
    case Experiment::kJump:
      return {{"point", Reals{}}, {"support", 1.0}, {"s0", 0.1}, {"levels", 5.0}, {"inner", 1e-3},
              {"angular_order", 16.0}};
    case Experiment::kVmo:
      return {{"field", "normal"},
              {"mode", "profile"},
              {"scales", Reals{1, 0.25, 0.0625, 0.015625}},
              {"samples", 4000.0},
              {"centers", 8.0},
              {"window_radius", 1.0},
              {"expect", "auto"}};
    case Experiment::kCone:
      return {{"step", 1e-3},
              {"ode_tol", 1e-10},
              {"eigenvalue", 3.0},
              {"samples", 200.0},
              {"rk4_step", 1e-3},
              {"csv_spacing", 0.01},
              {"checks", Strings{"profile"}},
              {"gradient_points", 100.0},
              {"kernel_radii", Reals{0.25, 0.125, 0.0625, 0.03125, 0.015625}},
              {"walks", 100000.0},
              {"kernel_phi", 0.7},
              {"kernel_psi", -0.4}};
    case Experiment::kBlowup:
      return {{"checks", Strings{"gradient_bound", "kernel_mean"}},
              {"samples", 10000.0},
              {"sample_radius", 2.0},
              {"min_distance", 1e-3},
              {"point", Reals{}},
              {"levels", 4.0},
              {"separation", 16.0},
              {"walks", 400000.0},
              {"points", 16.0},
              {"kernel_radius", 0.5}};
    case Experiment::kVariational:
      return {{"checks", Strings{"sphere", "ac", "first_variation", "gauss_green"}},
              {"sphere_radii", Reals{0.5, 1, 2, 4}},
              {"sphere_order", 16.0},
              {"ac_spacing", 1.0 / 64},
              {"spacings", Reals{1.0 / 16, 1.0 / 32, 1.0 / 64}},
              {"bump_half_width", 0.4},
              {"zeta_radius", 0.5}};
  }
  return {};
}

std::map<std::string, double> tolerance_defaults(Experiment e) {
  switch (e) {
    case Experiment::kFlatness:
      return {{"zero", 1e-9}, {"slope", 0.1}, {"constant", 0.02}, {"lemma_slack", 0.0}};
    case Experiment::kWos: return {{"se_factor", 3.0}, {"green_rel", 0.02}};
    case Experiment::kRiesz: return {{"residual", 0.02}};
    case Experiment::kJump: return {{"jump", 0.02}};
    case Experiment::kVmo: return {{"zero", 1e-12}, {"invariance", 0.02}, {"lower_bound", 0.1}};
    case Experiment::kCone:
      return {{"root", 1e-12}, {"bc", 1e-10},       {"eigen_factor", 10.0}, {"order", 1.9},
              {"agree", 1e-9}, {"gradient", 1e-3}, {"kernel", 0.05}};
    case Experiment::kBlowup: return {{"gradient_factor", 3.0}, {"kernel", 0.05}};
    case Experiment::kVariational:
      return {{"sphere", 0.01}, {"ac", 0.02}, {"order", 0.9}, {"counterfeit_floor", 0.01}, {"gauss_green", 1.0}};
  }
  return {};
}

ExperimentConfig default_config(Experiment e, const std::string& kind) {
  ExperimentConfig cfg;
  cfg.experiment = e;
  cfg.domain.kind = kind;
  if (kind == "kp_cone" || kind == "hong_cone") cfg.domain.dim = 4;
  cfg.knobs = knob_defaults(e);
  cfg.tolerances = tolerance_defaults(e);
  return cfg;
}

double ExperimentConfig::num(const std::string& name) const { return std::get<double>(knobs.at(name)); }
std::size_t ExperimentConfig::count(const std::string& name) const {
  return static_cast<std::size_t>(num(name));
}
const std::string& ExperimentConfig::str(const std::string& name) const {
  return std::get<std::string>(knobs.at(name));
}
const Reals& ExperimentConfig::list(const std::string& name) const { return std::get<Reals>(knobs.at(name)); }
const Strings& ExperimentConfig::names(const std::string& name) const { return std::get<Strings>(knobs.at(name)); }
double ExperimentConfig::tol(const std::string& name) const { return tolerances.at(name); }
bool ExperimentConfig::has_check(const std::string& name) const {
  const auto& c = names("checks");
  return std::find(c.begin(), c.end(), name) != c.end();
}

Strings validate(const ExperimentConfig& cfg) {
  Strings errors;
  const std::string exp = experiment_name(cfg.experiment);
  for (const auto& [name, value] : cfg.knobs) {
    if (kCounts.count(name)) {
      const double v = std::get<double>(value);
      if (!(v >= 1.0 && v == std::floor(v))) errors.push_back(name + " ≥ 1");
    } else if (kPositive.count(name)) {
      if (!(std::get<double>(value) > 0.0)) errors.push_back(name + " > 0");
    } else if (name == "ratio") {
      if (!(std::get<double>(value) > 1.0)) errors.push_back("ratio > 1");
    } else if (name == "corkscrew_c") {
      if (!(std::get<double>(value) > 1.0)) errors.push_back("corkscrew_c > 1");
    } else if (kPoints.count(name)) {
      const auto& v = std::get<Reals>(value);
      if (!v.empty() && static_cast<int>(v.size()) != cfg.domain.dim) {
        errors.push_back(name + ": length must equal the domain dimension " + std::to_string(cfg.domain.dim));
      }
    } else if (kPositiveLists.count(name)) {
      const auto& v = std::get<Reals>(value);
      if (v.empty()) errors.push_back(name + " must not be empty");
      for (double x : v) {
        if (!(x > 0.0)) {
          errors.push_back(name + ": entries > 0");
          break;
        }
      }
    }
    const auto it = choices().find(exp + "." + name);
    if (it == choices().end()) continue;
    const auto& allowed = it->second;
    auto ok = [&](const std::string& s) { return std::find(allowed.begin(), allowed.end(), s) != allowed.end(); };
    if (std::holds_alternative<std::string>(value)) {
      if (!ok(std::get<std::string>(value))) {
        errors.push_back(name + ": unknown value '" + std::get<std::string>(value) + "' (supported: " +
                         join(allowed) + ")");
      }
    } else {
      for (const auto& s : std::get<Strings>(value)) {
        if (!ok(s)) errors.push_back(name + ": unknown value '" + s + "' (supported: " + join(allowed) + ")");
      }
    }
  }
  for (const auto& [name, value] : cfg.tolerances) {
    if (name == "lemma_slack" ? !(value >= 0.0) : !(value > 0.0)) {
      errors.push_back("tolerances." + name + (name == "lemma_slack" ? " ≥ 0" : " > 0"));
    }
  }
  check_domain(cfg, errors);
  return errors;
}

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  auto& errors = result.errors;
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "syntax error at line " << e.source().begin.line << ": " << e.description();
    errors.push_back(os.str());
    return result;
  }

  const auto name = root["experiment"].value<std::string>();
  if (!name) {
    errors.push_back("experiment: required string (supported: " + join(experiment_names()) + ")");
    return result;
  }
  const auto exp = parse_experiment(*name);
  if (!exp) {
    errors.push_back("experiment: unknown experiment '" + *name + "' (supported: " + join(experiment_names()) + ")");
    return result;
  }

  ExperimentConfig cfg = default_config(*exp, *exp == Experiment::kCone ? "hong_cone" : "");
  for (const auto& [key, node] : root) {
    const std::string k(key.str());
    if (k != "experiment" && k != "seed" && k != "out" && k != "domain" && k != "knobs" && k != "tolerances") {
      errors.push_back("unknown top-level key '" + k + "'");
    }
  }
  if (root.contains("seed")) {
    const auto s = root["seed"].value<std::int64_t>();
    if (!s || *s < 0) {
      errors.push_back("seed ≥ 0 (integer)");
    } else {
      cfg.seed = static_cast<std::uint64_t>(*s);
    }
  }
  if (root.contains("out")) {
    if (auto o = root["out"].value<std::string>()) {
      cfg.out = *o;
    } else {
      errors.push_back("out: expected a string");
    }
  }

  if (const auto* dom = root["domain"].as_table()) {
    auto& d = cfg.domain;
    for (const auto& [key, node] : *dom) {
      const std::string k(key.str());
      bool ok = true;
      if (k == "kind") {
        auto v = node.value<std::string>();
        ok = v.has_value();
        if (ok) d.kind = *v;
      } else if (k == "base_kind") {
        auto v = node.value<std::string>();
        ok = v.has_value();
        if (ok) d.base_kind = *v;
      } else if (k == "dim" || k == "extra_dims") {
        auto v = node.value<std::int64_t>();
        ok = v.has_value();
        if (ok) (k == "dim" ? d.dim : d.extra_dims) = static_cast<int>(*v);
      } else if (k == "offset" || k == "theta0" || k == "amplitude" || k == "frequency") {
        auto v = node.value<double>();
        ok = v.has_value();
        if (ok) {
          if (k == "offset") d.offset = *v;
          if (k == "theta0") d.theta0 = *v;
          if (k == "amplitude") d.amplitude = *v;
          if (k == "frequency") d.frequency = *v;
        }
      } else if (k == "normal") {
        auto v = convert(node, Knob{Reals{}});
        ok = v.has_value();
        if (ok) d.normal = std::get<Reals>(*v);
      } else {
        errors.push_back("domain: unknown key '" + k + "'");
        continue;
      }
      if (!ok) errors.push_back("domain." + k + ": wrong type");
    }
    if (d.kind == "kp_cone" || d.kind == "hong_cone") d.dim = 4;
  } else if (*exp != Experiment::kCone) {
    errors.push_back("domain: required table with a kind (supported: " + join(geometry::supported_kinds()) + ")");
    return result;
  }

  if (root.contains("knobs")) {
    const auto* knobs = root["knobs"].as_table();
    if (!knobs) {
      errors.push_back("knobs: expected a table");
    } else {
      for (const auto& [key, node] : *knobs) {
        const std::string k(key.str());
        auto it = cfg.knobs.find(k);
        if (it == cfg.knobs.end()) {
          errors.push_back("knobs: unknown knob '" + k + "' for experiment " + *name);
          continue;
        }
        auto v = convert(node, it->second);
        if (!v) {
          errors.push_back("knobs." + k + ": expected " + kind_of(it->second));
          continue;
        }
        it->second = *v;
      }
    }
  }
  if (root.contains("tolerances")) {
    const auto* tols = root["tolerances"].as_table();
    if (!tols) {
      errors.push_back("tolerances: expected a table");
    } else {
      for (const auto& [key, node] : *tols) {
        const std::string k(key.str());
        auto it = cfg.tolerances.find(k);
        auto v = node.value<double>();
        if (it == cfg.tolerances.end()) {
          errors.push_back("tolerances: unknown tolerance '" + k + "' for experiment " + *name);
        } else if (!v) {
          errors.push_back("tolerances." + k + ": expected a number");
        } else {
          it->second = *v;
        }
      }
    }
  }

  auto more = validate(cfg);
  errors.insert(errors.end(), more.begin(), more.end());
  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

}  // namespace potlab::cli
