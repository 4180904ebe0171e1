// swarmsafe: validate scenarios, run simulations, run the property suite.
//
// Exit codes: 0 ok, 1 invalid scenario, 2 parse error, 3 safety degraded,
// 4 runtime error.

#include "swarmsafe/checks/suite.hpp"
#include "swarmsafe/log.hpp"
#include "swarmsafe/output.hpp"
#include "swarmsafe/scenario_io.hpp"
#include "swarmsafe/sim.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <iostream>

namespace {

using namespace swarmsafe;

enum Exit { kOk = 0, kInvalid = 1, kParse = 2, kDegraded = 3, kRuntime = 4 };

std::vector<Override> parse_overrides(const std::vector<std::string>& raw) {
  std::vector<Override> out;
  for (const auto& r : raw) out.push_back(parse_override(r));
  return out;
}

// Loads and validates; on failure prints why and sets code.
std::optional<Scenario> load(const std::string& path, const std::vector<std::string>& raw, int& code) {
  try {
    Scenario s = load_scenario(path, parse_overrides(raw));
    const auto violations = validate(s);
    if (!violations.empty()) {
      for (const auto& v : violations) std::cerr << v.field << ": " << v.message << '\n';
      code = kInvalid;
      return std::nullopt;
    }
    return s;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    code = kParse;
    return std::nullopt;
  }
}

int cmd_validate(const std::string& path, const std::vector<std::string>& raw) {
  int code = kOk;
  auto s = load(path, raw, code);
  if (!s) return code;
  std::cout << fmt::format("{}: ok ({} agents, {} obstacles, {} ticks)\n", path, s->agent_count(),
                           s->obstacles.size(), tick_count(*s));
  return kOk;
}

int cmd_run(const std::string& path, const std::string& out_dir, bool trace, const std::vector<std::string>& raw) {
  int code = kOk;
  auto s = load(path, raw, code);
  if (!s) return code;
  try {
    RunOptions opts;
    opts.record_trace = trace;
    const RunResult r = run(*s, opts);
    const OutputPaths paths = write_outputs(out_dir, *s, r, trace);
    const RunMetrics& m = r.metrics;
    std::cout << fmt::format("min_h {}  max rounds {}  convergence failures {}  safety_degraded {}\n",
                             format_number(m.min_h), m.max_rounds_used, m.convergence_failures, m.degraded_events);
    std::cout << fmt::format("wrote {} and {}", paths.csv.string(), paths.metrics.string());
    if (trace) std::cout << fmt::format(" and {}", paths.trace.string());
    std::cout << fmt::format(" ({} ticks, {:.2f} s wall)\n", m.ticks, r.wall_seconds);
    if (m.degraded_events > 0) {
      spdlog::warn("safety_degraded occurred on {} agent-ticks", m.degraded_events);
      return kDegraded;
    }
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
}

int cmd_suite(bool mutate, std::uint64_t seed) {
  checks::SuiteOptions opts;
  opts.seed = seed;
  if (mutate) opts = checks::with_sign_mutation(opts);
  const bool ok = checks::print_table(std::cout, checks::run_suite(opts));
  return ok ? kOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Distributed collaborative safety filter simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  bool trace = false;
  std::vector<std::string> overrides;
  bool mutate = false;
  std::uint64_t seed = checks::SuiteOptions{}.seed;

  auto* validate_cmd = app.add_subcommand("validate", "check a scenario file");
  validate_cmd->add_option("scenario", scenario_path, "scenario TOML")->required();
  validate_cmd->add_option("--overrides", overrides, "key=value, applied before validation");

  auto* run_cmd = app.add_subcommand("run", "simulate a scenario");
  run_cmd->add_option("scenario", scenario_path, "scenario TOML")->required();
  run_cmd->add_option("--out", out_dir, "output directory (created if missing)");
  run_cmd->add_flag("--trace", trace, "also write the message trace");
  run_cmd->add_option("--overrides", overrides, "key=value, applied before validation");

  auto* suite_cmd = app.add_subcommand("suite", "run the property suites");
  suite_cmd->add_option("--seed", seed, "random seed");
  suite_cmd->add_flag("--mutate-lie-g", mutate, "negate the first-order sensitivity inside the checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kParse;
  }

  try {
    if (*validate_cmd) return cmd_validate(scenario_path, overrides);
    if (*run_cmd) return cmd_run(scenario_path, out_dir, trace, overrides);
    if (*suite_cmd) return cmd_suite(mutate, seed);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
