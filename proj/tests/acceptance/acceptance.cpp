// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include "swarmsafe/checks/suite.hpp"
#include "swarmsafe/output.hpp"
#include "swarmsafe/scenario_io.hpp"
#include "swarmsafe/sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <limits>
#include <sstream>
#include <string>

namespace {

using namespace swarmsafe;

// Tolerances and budgets, fixed here and nowhere else.
constexpr double kSafetyFloor = -1e-6;
constexpr double kReferenceBudget = 60.0;  // s
constexpr double kLpBudget = 30.0;         // s
constexpr int kLpInstances = 100;
constexpr int kQpSamples = 100;
constexpr double kQpZero = 1e-9;
constexpr int kInvarianceRuns = 200;
constexpr double kInvarianceDuration = 10.0;  // s
constexpr int kDerivativeSamples = 1000;
constexpr double kPhi1Tolerance = 1e-5;
constexpr double kPhi2Tolerance = 1e-4;
constexpr int kMaxRounds = 10;
constexpr int kHandTraceRounds = 3;
constexpr double kControlLimit = 15.0;
constexpr double kControlSlack = 1e-9;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  fmt::print("{} criterion {} {}: {}\n", ok ? "PASS" : "FAIL", id, name, detail);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Bytes {
  std::string csv;
  std::string metrics;
};

Bytes serialize(const Scenario& s, const RunResult& r) {
  std::ostringstream csv;
  write_trajectory_csv(csv, r);
  return {csv.str(), metrics_json(s, r).dump(2)};
}

}  // namespace

int main() {
  const std::string path = std::string(SWARMSAFE_SCENARIO_DIR) + "/reference.toml";
  const Scenario reference = load_scenario(path);
  const checks::SuiteOptions options;

  // 1. Reference-scenario safety.
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult ref = run(reference);
  const double ref_seconds = seconds_since(t0);
  double field_end = -std::numeric_limits<double>::infinity();
  for (const auto& o : reference.obstacles) field_end = std::max(field_end, o.position.x() + o.radius_margin);
  const AgentIndex leader = reference.leader_inputs.begin()->first;
  const double leader_x = ref.final_states[leader].position.x();
  const bool shape_ok = reference.agent_count() == 3 && reference.graph.arcs().size() == 6 &&
                        std::all_of(reference.masses.begin(), reference.masses.end(),
                                    [](double m) { return m == 0.5; }) &&
                        reference.control_limit == kControlLimit && reference.dt == 0.01 &&
                        reference.duration == 30.0;
  report(1, "reference safety",
         shape_ok && ref.metrics.min_h >= kSafetyFloor && leader_x > field_end && ref_seconds < kReferenceBudget,
         fmt::format("min h {:.6g} (floor {:g}), leader x {:.3f} past field end {:.3f}, {:.2f} s (budget {:g} s)",
                     ref.metrics.min_h, kSafetyFloor, leader_x, field_end, ref_seconds, kReferenceBudget));

  // 2. LP against the grid oracle.
  const checks::CheckResult lp = checks::check_lp_oracle(options, kLpInstances);
  report(2, "LP oracle", lp.passed && lp.seconds < kLpBudget,
         fmt::format("{} ({:.2f} s, budget {:g} s)", lp.detail, lp.seconds, kLpBudget));

  // 3. Filter leaves the nominal control alone when nothing binds.
  const checks::CheckResult qp = checks::check_qp_minimal(options, kQpSamples, kQpZero);
  report(3, "QP minimal intervention", qp.passed, qp.detail);

  // 4. Single-agent forward invariance.
  checks::InvarianceStats inv;
  const checks::CheckResult fi =
      checks::check_forward_invariance(options, kInvarianceRuns, kInvarianceDuration, &inv);
  report(4, "forward invariance", fi.passed && inv.min_h >= kSafetyFloor, fi.detail);

  // 5. Derivatives against central differences.
  const checks::CheckResult d1 = checks::check_phi1_derivative(options, kDerivativeSamples, kPhi1Tolerance);
  const checks::CheckResult d2 = checks::check_second_order_derivative(options, kDerivativeSamples, kPhi2Tolerance);
  report(5, "derivatives", d1.passed && d2.passed, fmt::format("{}; {}", d1.detail, d2.detail));

  // 6. Protocol termination.
  const checks::CheckResult hand = checks::check_hand_trace(options, kHandTraceRounds);
  const bool ref_converged = reference.max_rounds == kMaxRounds && ref.metrics.convergence_failures == 0 &&
                             ref.metrics.max_rounds_used <= kMaxRounds;
  report(6, "protocol termination", ref_converged && hand.passed,
         fmt::format("reference: {} of {} ticks failed to converge, at most {} rounds (limit {}); hand trace: {}",
                     ref.metrics.convergence_failures, ref.metrics.ticks, ref.metrics.max_rounds_used, kMaxRounds,
                     hand.detail));

  // 8 first, since its runs also count towards 7.
  const RunResult again = run(reference);
  const Bytes a = serialize(reference, ref);
  const Bytes b = serialize(reference, again);

  // 7. Control bound over every run above.
  const double worst = std::max({ref.metrics.max_applied, again.metrics.max_applied, inv.max_applied});
  report(7, "control bound", worst <= kControlLimit + kControlSlack,
         fmt::format("max |u_f - u_s|_inf {:.9g} (limit {:g} + {:g})", worst, kControlLimit, kControlSlack));

  report(8, "determinism", a.csv == b.csv && a.metrics == b.metrics,
         fmt::format("CSV {} bytes {}, metrics {} bytes {}", a.csv.size(), a.csv == b.csv ? "identical" : "differ",
                     a.metrics.size(), a.metrics == b.metrics ? "identical" : "differ"));

  return failures == 0 ? 0 : 1;
}
