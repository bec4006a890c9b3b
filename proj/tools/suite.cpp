#include "potlab/cli/suite.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "potlab/core/errors.hpp"

namespace potlab::cli {

namespace {

ExperimentConfig config(Experiment e, const std::string& kind, std::uint64_t seed) {
  auto cfg = default_config(e, kind);
  cfg.seed = seed;
  return cfg;
}

std::string format(const Verdict& v) {
  std::ostringstream os;
  os << v.name << '=' << std::setprecision(4) << v.value << ' ' << v.comparison << ' ' << v.tolerance;
  return os.str();
}

}  // namespace

std::vector<Criterion> acceptance_battery(std::uint64_t seed) {
  using E = Experiment;
  std::vector<Criterion> out;

  auto hm = config(E::kWos, "halfspace", seed);
  hm.knobs["checks"] = std::vector<std::string>{"harmonic_measure"};
  out.push_back({1, "half-space harmonic measure", {hm}, 10});

  auto green = config(E::kWos, "halfspace", seed);
  green.knobs["checks"] = std::vector<std::string>{"green"};
  out.push_back({2, "Green function vs method of images", {green}, 10});

  auto jh = config(E::kJump, "halfspace", seed);
  auto jk = config(E::kJump, "kp_cone", seed);
  jk.knobs["support"] = 0.25;
  jk.knobs["s0"] = 0.025;
  jk.knobs["angular_order"] = 8.0;
  jk.tolerances["jump"] = 0.03;
  out.push_back({3, "jump relation", {jh, jk}, 30});

  auto rh = config(E::kRiesz, "halfspace", seed);
  auto rc = config(E::kRiesz, "hong_cone", seed);
  rc.tolerances["residual"] = 0.05;
  out.push_back({4, "Riesz-Green identity", {rh, rc}, 60});

  out.push_back({5, "counterexample cone build", {config(E::kCone, "hong_cone", seed)}, 10});

  auto kernel = config(E::kCone, "hong_cone", seed);
  kernel.knobs["checks"] = std::vector<std::string>{"kernel"};
  kernel.knobs["walks"] = 1e6;
  out.push_back({6, "Poisson kernel of the Hong cone", {kernel}, 120});

  std::vector<double> wide;
  for (int k = 6; k >= -6; --k) wide.push_back(std::ldexp(1.0, k));
  auto vh = config(E::kVmo, "halfspace", seed);
  auto vhong = config(E::kVmo, "hong_cone", seed);
  vhong.knobs["mode"] = std::string("vertex");
  vhong.knobs["scales"] = wide;
  auto vkp = vhong;
  vkp.domain.kind = "kp_cone";
  out.push_back({7, "VMO dichotomy", {vh, vhong, vkp}, 60});

  std::vector<ExperimentConfig> grads;
  for (const char* kind : {"halfspace", "kp_cone", "hong_cone"}) {
    auto g = config(E::kBlowup, kind, seed);
    g.knobs["checks"] = std::vector<std::string>{"gradient_bound"};
    grads.push_back(g);
  }
  out.push_back({8, "gradient and blow-up bounds", grads, 60});

  out.push_back({9, "variational checks", {config(E::kVariational, "halfspace", seed)}, 120});

  auto smooth = config(E::kFlatness, "hong_cone", seed);
  const double t0 = resolve_domain(smooth.domain).info().theta0;
  smooth.knobs["point"] =
      std::vector<double>{std::cos(t0) * std::cos(0.3), std::cos(t0) * std::sin(0.3), std::sin(t0) * std::cos(0.8),
                          std::sin(t0) * std::sin(0.8)};
  smooth.knobs["radii"] = std::vector<double>{1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8};
  smooth.knobs["expect"] = std::string("slope1");
  auto vertex = config(E::kFlatness, "hong_cone", seed);
  vertex.knobs["radii"] = std::vector<double>{0.25, 0.5, 1, 2, 4, 8};
  vertex.knobs["expect"] = std::string("constant");
  vertex.knobs["boundary_samples"] = 60000.0;
  vertex.knobs["plane_samples"] = 30000.0;
  auto means = config(E::kBlowup, "halfspace", seed);
  means.knobs["checks"] = std::vector<std::string>{"kernel_mean"};
  means.knobs["walks"] = 1e6;
  means.knobs["separation"] = 10.0;
  means.knobs["points"] = 32.0;
  out.push_back({10, "blow-up and blow-down behavior", {smooth, vertex, means}, 180});

  auto lemma = config(E::kFlatness, "halfspace", seed);
  lemma.knobs["mode"] = std::string("lemma83");
  out.push_back({11, "flatness from one-sided beta", {lemma}, 60});
  return out;
}

bool SuiteResult::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
}

SuiteResult run_suite(std::uint64_t seed, void (*progress)(const CriterionResult&)) {
  SuiteResult out;
  Json items = Json::array();
  for (const auto& c : acceptance_battery(seed)) {
    CriterionResult r;
    r.id = c.id;
    r.title = c.title;
    r.budget_seconds = c.budget_seconds;
    r.pass = true;
    Json runs = Json::array();
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::string> shown;
    for (const auto& cfg : c.runs) {
      try {
        const auto rep = run_experiment(cfg);
        runs.push_back(rep.to_json());
        for (const auto& v : rep.verdicts) {
          if (!v.pass && r.pass) r.summary = rep.experiment + "/" + cfg.domain.kind + ": " + format(v);
          r.pass = r.pass && v.pass;
          if (shown.size() < 3) shown.push_back(format(v));
        }
      } catch (const std::exception& e) {
        r.pass = false;
        r.error = e.what();
        runs.push_back({{"experiment", experiment_name(cfg.experiment)}, {"error", e.what()}});
      }
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.pass) {
      for (const auto& s : shown) r.summary += (r.summary.empty() ? "" : "; ") + s;
    } else if (!r.error.empty()) {
      r.summary = "error: " + r.error;
    }
    r.report = {{"criterion", c.id}, {"title", c.title}, {"pass", r.pass}, {"runs", runs}};
    items.push_back(r.report);
    if (progress) progress(r);
    out.criteria.push_back(std::move(r));
  }
  const Json report = {{"schema", "1"}, {"suite", "acceptance"}, {"seed", seed}, {"criteria", items}, {"pass", out.pass()}};
  out.report = report.dump(2) + "\n";
  return out;
}

}  // namespace potlab::cli
