#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "potlab/cli/config.hpp"
#include "potlab/cli/experiments.hpp"
#include "potlab/cli/suite.hpp"
#include "potlab/cones/profile.hpp"
#include "potlab/core/errors.hpp"

namespace fs = std::filesystem;
using namespace potlab;
using namespace potlab::cli;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

struct Globals {
  std::string config;
  std::int64_t seed = -1;
  int threads = 0;
  std::string out;
};

struct WosFlags {
  std::int64_t walks = -1;
  double eps_shell = -1.0;
  std::int64_t max_steps = -1;
};

std::string default_kind(Experiment e) {
  switch (e) {
    case Experiment::kFlatness: return "kp_cone";
    case Experiment::kCone: return "hong_cone";
    default: return "halfspace";
  }
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

int run_one(Experiment e, const Globals& g, const WosFlags& wf, const std::string& golden) {
  ExperimentConfig cfg;
  if (!g.config.empty()) {
    std::ifstream is(g.config);
    if (!is) {
      std::cerr << "config error: cannot read " << g.config << '\n';
      return kConfigError;
    }
    std::stringstream ss;
    ss << is.rdbuf();
    auto parsed = parse_config(ss.str());
    if (!parsed.config) {
      for (const auto& err : parsed.errors) std::cerr << "config error: " << err << '\n';
      return kConfigError;
    }
    if (parsed.config->experiment != e) {
      std::cerr << "config error: file describes experiment '" << experiment_name(parsed.config->experiment)
                << "', subcommand is '" << experiment_name(e) << "'\n";
      return kConfigError;
    }
    cfg = *parsed.config;
  } else {
    cfg = default_config(e, default_kind(e));
  }
  if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
  if (!g.out.empty()) cfg.out = g.out;
  if (wf.walks >= 0) cfg.knobs["walks"] = static_cast<double>(wf.walks);
  if (wf.eps_shell >= 0) cfg.knobs["eps_shell"] = wf.eps_shell;
  if (wf.max_steps >= 0) cfg.knobs["max_steps"] = static_cast<double>(wf.max_steps);
  const auto errors = validate(cfg);
  if (!errors.empty()) {
    for (const auto& err : errors) std::cerr << "config error: " << err << '\n';
    return kConfigError;
  }

  const auto start = std::chrono::steady_clock::now();
  Report rep;
  try {
    rep = run_experiment(cfg);
  } catch (const PreconditionError& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return kConfigError;
  } catch (const std::exception& ex) {
    std::cerr << "numeric error: " << ex.what() << '\n';
    return kNumericError;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (const auto& v : rep.verdicts) {
    std::printf("%-4s %s = %.6g %s %.6g\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.value, v.comparison.c_str(),
                v.tolerance);
  }
  std::printf("%s in %.2f s\n", rep.pass() ? "all verdicts pass" : "some verdicts fail", seconds);
  if (!cfg.out.empty()) {
    const fs::path dir(cfg.out);
    write_file(dir / "report.json", rep.to_json().dump(2) + "\n");
    write_file(dir / "timing.json", Json{{"experiment", rep.experiment}, {"wall_seconds", seconds}}.dump(2) + "\n");
    for (const auto& f : rep.side_files) write_file(dir / f.name, f.content);
  }
  if (!golden.empty()) {
    std::ostringstream os;
    cones::write_profile_csv(os, cones::solve_profile_ode(cfg.num("step"), cfg.num("ode_tol"), cfg.num("eigenvalue")),
                             cfg.num("csv_spacing"));
    write_file(golden, os.str());
  }
  return rep.pass() ? kPass : kFail;
}

void print_criterion(const CriterionResult& r) {
  std::printf("criterion %2d %s  %s (%.1f s): %s\n", r.id, r.pass ? "PASS" : "FAIL", r.title.c_str(), r.seconds,
              r.summary.c_str());
  std::fflush(stdout);
}

int run_suite_cmd(const Globals& g) {
  const auto seed = g.seed >= 0 ? static_cast<std::uint64_t>(g.seed) : 1;
  const auto result = run_suite(seed, print_criterion);
  if (!g.out.empty()) {
    const fs::path dir(g.out);
    write_file(dir / "suite.json", result.report);
    Json t = Json::array();
    for (const auto& c : result.criteria) t.push_back({{"criterion", c.id}, {"wall_seconds", c.seconds}});
    write_file(dir / "timing.json", t.dump(2) + "\n");
  }
  return result.pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"potlab: numerical experiments on harmonic measure and free boundaries"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "TOML experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "override the config seed")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", g.threads, "OpenMP worker count")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "directory for report.json and side files");
  app.fallthrough();

  WosFlags wf;
  std::string golden;
  Experiment chosen = Experiment::kFlatness;
  bool suite = false;
  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    const auto e = *parse_experiment(name);
    sub->callback([&chosen, e] { chosen = e; });
    if (e == Experiment::kWos) {
      sub->add_option("--walks", wf.walks, "walks per estimate")->check(CLI::PositiveNumber);
      sub->add_option("--eps-shell", wf.eps_shell, "absorption shell width")->check(CLI::PositiveNumber);
      sub->add_option("--max-steps", wf.max_steps, "step cap per walk")->check(CLI::PositiveNumber);
    }
    if (e == Experiment::kCone) sub->add_option("--golden", golden, "also write the profile CSV to this path");
  }
  app.add_subcommand("suite", "run the acceptance battery")->callback([&suite] { suite = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }
  if (g.threads > 0) omp_set_num_threads(g.threads);
  try {
    return suite ? run_suite_cmd(g) : run_one(chosen, g, wf, golden);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericError;
  }
}
