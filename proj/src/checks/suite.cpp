#include "swarmsafe/checks/suite.hpp"

#include "swarmsafe/barrier.hpp"
#include "swarmsafe/checks/oracles.hpp"
#include "swarmsafe/collab.hpp"
#include "swarmsafe/optim.hpp"
#include "swarmsafe/sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace swarmsafe::checks {

SuiteOptions::SuiteOptions() : lie_g(&lie_g_phi1) {}

SuiteOptions with_sign_mutation(SuiteOptions options) {
  LieG original = options.lie_g;
  options.lie_g = [original](const AgentState& a, const Obstacle& o) -> Vec2 { return -original(a, o); };
  return options;
}

namespace {

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_;
};

CheckResult finish(std::string name, bool passed, std::string detail, const Timer& timer) {
  return CheckResult{std::move(name), passed, std::move(detail), timer.seconds()};
}

// Each check draws from its own stream so adding samples to one check does
// not shift the others.
Rng stream(const SuiteOptions& o, std::uint64_t salt) { return Rng(o.seed ^ (salt * 0x9E3779B97F4A7C15ull)); }

}  // namespace

CheckResult check_lp_oracle(const SuiteOptions& options, int instances) {
  Timer timer;
  Rng rng = stream(options, 1);
  double worst_gap = 0.0;
  double worst_kkt = 0.0;
  int failures = 0;
  for (int n = 0; n < instances; ++n) {
    const int k = std::uniform_int_distribution<int>(1, 4)(rng);
    Eigen::MatrixXd B(k, 2);
    for (int r = 0; r < k; ++r) B.row(r) = uniform_vec(rng, -3.0, 3.0).transpose();
    const Vec2 center = uniform_vec(rng, -2.0, 2.0);
    const double width = uniform(rng, 0.5, 3.0);
    const Polytope box = Polytope::box(center, width);

    const LpResult lp = maxmin_capability(B, box);
    const double grid = grid_maxmin(B, center, width);
    const double resolution = grid_resolution(B, width);
    const KktReport kkt = check_kkt(lp, B, box);
    const double gap = std::abs(lp.gamma - grid);
    worst_gap = std::max(worst_gap, gap / resolution);
    worst_kkt = std::max(worst_kkt, kkt.worst());
    // The grid is a subset of the box, so it can never beat the LP.
    const bool ok = lp.status == LpStatus::optimal && gap <= resolution && lp.gamma >= grid - 1e-9 &&
                    kkt.satisfied(kSolverTolerance);
    if (!ok) ++failures;
  }
  return finish("lp_oracle", failures == 0,
                fmt::format("{} instances, {} failed, worst gap {:.3f} x resolution, worst KKT {:.2e}", instances,
                            failures, worst_gap, worst_kkt),
                timer);
}

CheckResult check_phi1_derivative(const SuiteOptions& options, int samples, double tol) {
  Timer timer;
  Rng rng = stream(options, 2);
  int failures = 0;
  double worst = 0.0;
  for (int n = 0; n < samples; ++n) {
    const PairCase c = random_pair_case(rng);
    const Vec2 own = uniform_vec(rng, -5.0, 5.0);
    const FormationParams params = FormationParams::from(c.scenario);
    const double analytic =
        lie_f_phi1(c.states, c.scenario.graph, c.agent, c.obstacle, c.scenario.gains[c.agent], params) -
        options.lie_g(c.states[c.agent], c.obstacle).dot(own);
    const double fd = fd_phi1_rate(c, own);
    worst = std::max(worst, std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
    if (!close_relative(analytic, fd, tol)) ++failures;
  }
  return finish("phi1_rate_fd", failures == 0,
                fmt::format("{} states, {} failed, worst rel err {:.2e} (tol {:.0e})", samples, failures, worst, tol),
                timer);
}

CheckResult check_second_order_derivative(const SuiteOptions& options, int samples, double tol) {
  Timer timer;
  Rng rng = stream(options, 3);
  int failures = 0;
  int comparisons = 0;
  double worst = 0.0;
  for (int n = 0; n < samples; ++n) {
    const PairCase c = random_pair_case(rng);
    const FormationParams params = FormationParams::from(c.scenario);
    const SafetySystem sys =
        assemble(c.states, c.scenario.graph, c.agent, {c.obstacle}, c.scenario.gains[c.agent], params);
    const Vec2 own = uniform_vec(rng, -5.0, 5.0);
    std::vector<Vec2> nbr;
    for (std::size_t s = 0; s < sys.neighbors.size(); ++s) nbr.push_back(uniform_vec(rng, -2.0, 2.0));
    const std::vector<Vec2> zero(sys.neighbors.size(), Vec2::Zero());

    std::vector<std::pair<FlowInputs, std::vector<Vec2>>> cases = {{FlowInputs{own, {}}, zero},
                                                                   {FlowInputs{Vec2::Zero(), nbr}, nbr}};
    // u_i^s x u_o^v coupling is dropped on inter-agent rows only.
    if (c.obstacle.id.kind == ObstacleKind::fixed) cases.push_back({FlowInputs{own, nbr}, nbr});
    for (const auto& [flow_u, assembled_u] : cases) {
      const double analytic = sys.evaluate(assembled_u, flow_u.own)[0];
      const double fd = fd_second_order(c, flow_u);
      worst = std::max(worst, std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
      ++comparisons;
      if (!close_relative(analytic, fd, tol)) ++failures;
    }
  }
  return finish("second_order_fd", failures == 0,
                fmt::format("{} states ({} comparisons), {} failed, worst rel err {:.2e} (tol {:.0e})", samples,
                            comparisons, failures, worst, tol),
                timer);
}

CheckResult check_qp_minimal(const SuiteOptions& options, int samples, double tol) {
  Timer timer;
  Rng rng = stream(options, 4);
  int accepted = 0;
  int attempts = 0;
  int failures = 0;
  double worst = 0.0;
  while (accepted < samples && attempts < 200 * samples) {
    ++attempts;
    PairCase c = random_pair_case(rng);
    c.scenario.sensing_radius = 5.0;
    const TickOutcome tick = run_tick(c.states, c.scenario, 0.0);
    bool inside = true;
    for (const auto& dec : tick.agents) {
      for (const auto& h : dec.first_order) inside = inside && h.slack(Vec2::Zero()) > 1e-6;
      for (const auto& h : dec.set.halfspaces()) inside = inside && h.slack(Vec2::Zero()) > 1e-6;
      inside = inside && dec.set.base.contains(Vec2::Zero(), -1e-6);
    }
    if (!inside) continue;
    ++accepted;
    for (const auto& dec : tick.agents) {
      const double mag = dec.u_s.cwiseAbs().maxCoeff();
      worst = std::max(worst, mag);
      if (mag > tol || dec.level != FilterLevel::full) ++failures;
    }
  }
  return finish("qp_minimal", accepted == samples && failures == 0,
                fmt::format("{} states ({} drawn), {} failed, worst |u_s| {:.1e}", accepted, attempts, failures, worst),
                timer);
}

namespace {

struct RandomQp {
  Vec2 center;
  std::vector<Halfspace> rows;
  Polytope box;
};

RandomQp random_qp(Rng& rng) {
  RandomQp p;
  p.center = uniform_vec(rng, -4.0, 4.0);
  p.box = Polytope::box(uniform_vec(rng, -1.0, 1.0), uniform(rng, 1.0, 3.0));
  const int k = std::uniform_int_distribution<int>(0, 4)(rng);
  for (int r = 0; r < k; ++r) p.rows.push_back(Halfspace{uniform_vec(rng, -2.0, 2.0), uniform(rng, -3.0, 1.0)});
  return p;
}

bool feasible(const RandomQp& p, const Vec2& v) {
  if (!p.box.contains(v, 0.0)) return false;
  return std::all_of(p.rows.begin(), p.rows.end(), [&](const Halfspace& h) { return h.slack(v) >= 0.0; });
}

}  // namespace

CheckResult check_qp_projection(const SuiteOptions& options, int problems, int probes) {
  Timer timer;
  Rng rng = stream(options, 5);
  int solved = 0;
  int failures = 0;
  double worst = 0.0;
  for (int attempt = 0; solved < problems && attempt < 20 * problems; ++attempt) {
    const RandomQp p = random_qp(rng);
    const QpResult r = qp_safety_filter(p.center, p.rows, p.box);
    if (r.status != QpStatus::optimal) continue;
    ++solved;
    int found = 0;
    for (int t = 0; found < probes && t < 1000 * probes; ++t) {
      const Vec2 v = uniform_vec(rng, -4.0, 4.0);
      if (!feasible(p, v)) continue;
      ++found;
      const double vi = (r.u_s - p.center).dot(v - r.u_s);
      worst = std::min(worst, vi);
      if (vi < -1e-8) ++failures;
    }
  }
  return finish("qp_projection", solved == problems && failures == 0,
                fmt::format("{} problems x {} feasible probes, {} failed, worst inner product {:.1e}", solved, probes,
                            failures, worst),
                timer);
}

CheckResult check_qp_scaling(const SuiteOptions& options, int problems) {
  Timer timer;
  Rng rng = stream(options, 6);
  int failures = 0;
  int compared = 0;
  for (int n = 0; n < problems; ++n) {
    RandomQp p = random_qp(rng);
    const QpResult a = qp_safety_filter(p.center, p.rows, p.box);
    for (auto& h : p.rows) {
      const double s = std::exp(uniform(rng, -3.0, 3.0));
      h.normal *= s;
      h.bound *= s;
    }
    const QpResult b = qp_safety_filter(p.center, p.rows, p.box);
    if (a.status != b.status) {
      ++failures;
      continue;
    }
    if (a.status != QpStatus::optimal) continue;
    ++compared;
    if ((a.u_s - b.u_s).cwiseAbs().maxCoeff() > 1e-9) ++failures;
  }
  return finish("qp_scaling", failures == 0,
                fmt::format("{} problems ({} feasible), {} failed", problems, compared, failures), timer);
}

CheckResult check_forward_invariance(const SuiteOptions& options, int runs, double duration, InvarianceStats* stats) {
  Timer timer;
  Rng rng = stream(options, 7);
  InvarianceStats local;
  local.min_h = std::numeric_limits<double>::infinity();
  int failures = 0;
  int errors = 0;
  for (int n = 0; n < runs;) {
    Scenario s;
    s.graph = FormationGraph(1);
    s.masses = {0.5};
    s.gains = {Gains{uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0)}};
    s.leader_inputs[0] = uniform_vec(rng, -5.0, 5.0);
    s.obstacles = {Obstacle{ObstacleId{ObstacleKind::fixed, 0}, Vec2::Zero(), Vec2::Zero(), 1.0}};
    s.sensing_radius = 1e3;
    s.duration = duration;
    const double dist = uniform(rng, 1.05, 4.0);
    const double angle = uniform(rng, 0.0, 2.0 * M_PI);
    AgentState st{dist * Vec2(std::cos(angle), std::sin(angle)), uniform_vec(rng, -3.0, 3.0)};
    s.initial_states = {st};

    // Start inside C1 and C2 (phi2 taken with no filter action).
    const Obstacle& o = s.obstacles[0];
    const Gains& g = s.gains[0];
    const double p1 = phi1(st, o, g.alpha0);
    const double p2 = 2.0 * s.leader_inputs[0].dot(st.position) + 2.0 * st.velocity.squaredNorm() +
                      2.0 * g.alpha0 * st.velocity.dot(st.position) + g.alpha1 * p1;
    if (!(barrier_value(st, o) > 0.0 && p1 > 0.0 && p2 > 0.0)) continue;
    ++n;

    try {
      const RunResult r = run(s);
      local.min_h = std::min(local.min_h, r.metrics.min_h);
      local.max_applied = std::max(local.max_applied, r.metrics.max_applied);
      local.degraded += r.metrics.degraded_events;
      if (r.metrics.min_h < -1e-6) ++failures;
    } catch (const std::exception&) {
      ++errors;
    }
  }
  if (stats) *stats = local;
  return finish("forward_invariance", failures == 0 && errors == 0,
                fmt::format("{} runs of {:g} s, {} below -1e-6, {} errors, min h {:.3e}, degraded ticks {}", runs,
                            duration, failures, errors, local.min_h, local.degraded),
                timer);
}

CheckResult check_hand_trace(const SuiteOptions&, int max_rounds) {
  Timer timer;
  const auto agents = hand_traced_instance();
  ProtocolOptions opts;
  opts.max_rounds = 10;
  const ProtocolOutcome out = run_protocol(agents, opts);
  double min_delta = std::numeric_limits<double>::infinity();
  for (const auto& st : out.agents) {
    const Eigen::VectorXd d = st.ledger.residual();
    if (d.size() > 0) min_delta = std::min(min_delta, d.minCoeff());
  }
  const bool ok = out.converged && out.rounds <= max_rounds && min_delta >= 0.0;
  return finish("protocol_hand_trace", ok,
                fmt::format("converged={} in {} rounds (limit {}), min delta {:g}", out.converged, out.rounds,
                            max_rounds, min_delta),
                timer);
}

std::vector<CheckResult> run_suite(const SuiteOptions& options) {
  return {check_lp_oracle(options),     check_phi1_derivative(options),    check_second_order_derivative(options),
          check_qp_minimal(options),    check_qp_projection(options),      check_qp_scaling(options),
          check_forward_invariance(options), check_hand_trace(options)};
}

bool print_table(std::ostream& out, const std::vector<CheckResult>& results) {
  bool all = true;
  out << fmt::format("{:<22} {:<6} {:>8}  {}\n", "check", "result", "seconds", "detail");
  for (const auto& r : results) {
    all = all && r.passed;
    out << fmt::format("{:<22} {:<6} {:>8.2f}  {}\n", r.name, r.passed ? "PASS" : "FAIL", r.seconds, r.detail);
  }
  return all;
}

}  // namespace swarmsafe::checks
