#include "swarmsafe/checks/oracles.hpp"
#include "swarmsafe/checks/suite.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace swarmsafe;
using namespace swarmsafe::checks;

TEST_CASE("grid oracle") {
  Eigen::MatrixXd B(2, 2);
  B << 1, 0, 0, 1;
  CHECK(grid_maxmin(B, Vec2::Zero(), 1.0) == doctest::Approx(1.0));
  CHECK(grid_resolution(B, 1.0) == doctest::Approx(0.01));
}

TEST_CASE("finite-difference oracle on a hand case") {
  // A free agent at (3, 0) heading for the origin at unit speed:
  // phi1 = 2 v.d + h = -6 + 8, dphi1/dt = 2|v|^2 + 2 v.d = 2 - 6.
  PairCase c;
  c.scenario.initial_states = {AgentState{Vec2(3, 0), Vec2(-1, 0)}};
  c.scenario.graph = FormationGraph(1);
  c.scenario.masses = {1.0};
  c.scenario.gains = {Gains{}};
  c.states = c.scenario.initial_states;
  c.obstacle = Obstacle{ObstacleId{ObstacleKind::fixed, 0}, Vec2::Zero(), Vec2::Zero(), 1.0};
  CHECK(phi1_direct(c, c.states) == doctest::Approx(2.0 * -3.0 + 8.0));
  CHECK(fd_phi1_rate(c, Vec2::Zero()) == doctest::Approx(2.0 - 6.0).epsilon(1e-8));
}

TEST_CASE("property suite passes, and a sign flip is caught") {
  SuiteOptions o;
  CHECK(check_phi1_derivative(o, 200).passed);
  CHECK(check_second_order_derivative(o, 200).passed);
  CHECK(check_lp_oracle(o, 20).passed);
  CHECK(check_qp_minimal(o, 20).passed);
  CHECK(check_qp_projection(o, 10, 50).passed);
  CHECK(check_qp_scaling(o, 10).passed);
  CHECK(check_hand_trace(o).passed);

  InvarianceStats stats;
  CHECK(check_forward_invariance(o, 20, 10.0, &stats).passed);
  CHECK(stats.min_h >= -1e-6);

  CHECK_FALSE(check_phi1_derivative(with_sign_mutation(o), 200).passed);
}

TEST_CASE("table lists every check") {
  std::vector<CheckResult> rs{{"a", true, "fine", 0.1}, {"b", false, "broken", 0.2}};
  std::ostringstream out;
  CHECK_FALSE(print_table(out, rs));
  CHECK(out.str().find("FAIL") != std::string::npos);
  CHECK(out.str().find("broken") != std::string::npos);
}
