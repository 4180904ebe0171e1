#include "fixtures.hpp"

#include "swarmsafe/sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace swarmsafe;
using fixtures::at;

namespace {

FormationParams params_for(std::size_t n) {
  FormationParams p;
  p.masses.assign(n, 0.5);
  p.leader_inputs.assign(n, Vec2::Zero());
  return p;
}

}  // namespace

TEST_CASE("integration step") {
  const std::vector<Vec2> none(1, Vec2::Zero());
  const States moved = integrate_step({at(0, 0, 1, 0)}, FormationGraph(1), params_for(1), none, 0.01);
  CHECK(moved[0].position.x() == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(moved[0].position.y() == 0.0);
  CHECK(moved[0].velocity == Vec2(1, 0));

  const States still = {at(0, 0), at(3, 0)};
  FormationGraph g(2);
  g.add_edge(0, 1, {});
  const States same = integrate_step(still, g, params_for(2), std::vector<Vec2>(2, Vec2::Zero()), 0.01);
  CHECK(same[0].position == still[0].position);
  CHECK(same[1].velocity == still[1].velocity);

  // The filter decelerates: v' = -u_s.
  const States braked = integrate_step({at(0, 0, 1, 0)}, FormationGraph(1), params_for(1), {Vec2(2, 0)}, 0.1);
  CHECK(braked[0].velocity.x() == doctest::Approx(0.8));
  CHECK(braked[0].position.x() == doctest::Approx(0.1 - 0.01));
}

TEST_CASE("undamped pair keeps its energy") {
  FormationGraph g(2);
  g.add_edge(0, 1, SpringParams{3.0, 0.0, 3.0});
  const FormationParams p = params_for(2);
  States s = {at(-2.0, 0.0, 0.0, 0.4), at(2.0, 0.0, 0.0, -0.4)};
  auto energy = [&](const States& x) {
    const double stretch = (x[0].position - x[1].position).norm() - 3.0;
    return 0.25 * (x[0].velocity.squaredNorm() + x[1].velocity.squaredNorm()) + 1.5 * stretch * stretch;
  };
  const double e0 = energy(s);
  for (int k = 0; k < 1000; ++k) s = integrate_step(s, g, p, std::vector<Vec2>(2, Vec2::Zero()), 0.01);
  CHECK(std::abs(energy(s) - e0) <= 1e-6 * e0);
}

TEST_CASE("rest formation in empty space stays put") {
  Scenario s = fixtures::triangle();
  s.duration = 1.0;
  const RunResult r = run(s);
  CHECK(r.metrics.ticks == 100);
  CHECK(r.records.size() == 100);
  for (const auto& rec : r.records) {
    for (const auto& a : rec.agents) CHECK(a.u_s.isZero());
  }
  for (AgentIndex i = 0; i < 3; ++i) {
    CHECK((r.final_states[i].position - s.initial_states[i].position).norm() < 1e-12);
  }
}

TEST_CASE("head-on approach slows before the boundary") {
  Scenario s;
  s.initial_states = {at(0, 0, 3, 0)};
  s.graph = FormationGraph(1);
  s.masses = {0.5};
  s.gains = {Gains{}};
  s.obstacles = {fixtures::fixed_obstacle(0, 6, 0)};
  s.sensing_radius = 10.0;
  s.duration = 8.0;
  const RunResult r = run(s);
  CHECK(r.metrics.min_h >= -1e-6);
  CHECK(r.metrics.degraded_events == 0);
  double closest_speed = 0.0;
  double closest = INFINITY;
  for (const auto& rec : r.records) {
    if (rec.agents[0].min_h < closest) {
      closest = rec.agents[0].min_h;
      closest_speed = rec.agents[0].state.velocity.x();
    }
    CHECK(rec.agents[0].u_s.x() >= -1e-9);  // the filter only ever brakes here
  }
  CHECK(closest_speed < 0.1);
  CHECK(r.final_states[0].position.x() < 5.0);
}

TEST_CASE("records and metrics agree") {
  Scenario s = fixtures::triangle(true);
  s.leader_inputs[0] = Vec2(4, 0);
  s.obstacles[0].position = Vec2(5, 0.5);
  s.duration = 6.0;
  const RunResult r = run(s);
  double low = INFINITY;
  double applied = 0.0;
  for (const auto& rec : r.records) {
    low = std::min(low, rec.min_h());
    for (const auto& a : rec.agents) {
      CHECK(a.applied == a.u_f - a.u_s);
      CHECK(a.applied.lpNorm<Eigen::Infinity>() <= s.control_limit + 1e-9);
      applied = std::max(applied, a.applied.lpNorm<Eigen::Infinity>());
      CHECK(a.barriers.size() == 3);  // one obstacle, two other agents
    }
  }
  CHECK(r.metrics.min_h == low);
  CHECK(r.metrics.max_applied == applied);
  CHECK(r.records.front().t == 0.0);
  CHECK(r.records[7].t == doctest::Approx(0.07).epsilon(1e-14));
}

TEST_CASE("run errors carry the tick") {
  // Connected, nearly force-free, closing at 100 m/s: they coincide within
  // the first step, too fast for the out-of-range inter-agent rows to help.
  Scenario s = fixtures::pair(at(-0.5, 0, 50, 0), at(0.5, 0, -50, 0), SpringParams{1e-300, 0.0, 3.0});
  s.agent_margin = 0.01;
  s.sensing_radius = 0.02;
  s.duration = 1.0;
  try {
    run(s);
    FAIL("expected a RunError");
  } catch (const RunError& e) {
    CHECK(e.tick() == 0);
    CHECK(std::string(e.what()).find("tick 0") == 0);
    CHECK(std::string(e.what()).find("coincident") != std::string::npos);
  }

  Scenario bad = fixtures::triangle();
  bad.dt = -1.0;
  CHECK_THROWS_AS(run(bad), ConfigError);
}

TEST_CASE("tick count rounds") {
  Scenario s = fixtures::triangle();
  s.dt = 0.01;
  s.duration = 30.0;
  CHECK(tick_count(s) == 3000);
  s.dt = 0.3;
  s.duration = 1.0;
  CHECK(tick_count(s) == 3);
}
