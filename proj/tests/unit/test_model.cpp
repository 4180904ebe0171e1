#include "fixtures.hpp"

#include "swarmsafe/model.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace swarmsafe;
using fixtures::at;

namespace {

bool names(const std::vector<Violation>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) {
    return x.field.find(needle) != std::string::npos || x.message.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("neighbors") {
  CHECK(FormationGraph::complete(3, {}).neighbors(0) == std::vector<AgentIndex>{1, 2});

  FormationGraph path(3);
  path.add_edge(0, 1, {});
  path.add_edge(1, 2, {});
  CHECK(path.neighbors(2) == std::vector<AgentIndex>{1});
  CHECK(path.neighbors(1) == std::vector<AgentIndex>{0, 2});

  CHECK(FormationGraph(1).neighbors(0).empty());
  CHECK_THROWS_AS(FormationGraph(2).neighbors(2), ConfigError);
}

TEST_CASE("neighbor relation is symmetric on random graphs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    FormationGraph g(n);
    for (AgentIndex i = 0; i < n; ++i)
      for (AgentIndex j = i + 1; j < n; ++j)
        if (rng() % 2) g.add_edge(i, j, {});
    for (AgentIndex i = 0; i < n; ++i) {
      for (AgentIndex j : g.neighbors(i)) {
        const auto back = g.neighbors(j);
        CHECK(std::find(back.begin(), back.end(), i) != back.end());
      }
    }
  }
}

TEST_CASE("sensed obstacles") {
  Scenario s = fixtures::triangle();
  s.obstacles = {fixtures::fixed_obstacle(0, 10.0, 0.0)};
  s.sensing_radius = 5.0;
  States states = {at(0, 0), at(2, 0, 0.5, -1.0)};
  s.initial_states = states;
  s.graph = FormationGraph::complete(2, {});

  const auto seen = sensed_obstacles(s, states, 0);
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].id == ObstacleId{ObstacleKind::agent, 1});
  CHECK(seen[0].velocity == Vec2(0.5, -1.0));

  Scenario lone;
  lone.initial_states = {at(0, 0)};
  CHECK(sensed_obstacles(lone, lone.initial_states, 0).empty());
}

TEST_CASE("sensed obstacles keep static ids first, then agents by index") {
  Scenario s = fixtures::triangle();
  s.obstacles = {fixtures::fixed_obstacle(2, 1, 1), fixtures::fixed_obstacle(0, -1, 1)};
  s.sensing_radius = 100.0;
  const auto seen = sensed_obstacles(s, s.initial_states, 1);
  REQUIRE(seen.size() == 4);
  CHECK(seen[0].id.str() == "obstacle:0");
  CHECK(seen[1].id.str() == "obstacle:2");
  CHECK(seen[2].id.str() == "agent:0");
  CHECK(seen[3].id.str() == "agent:2");
}

TEST_CASE("enlarging the sensing radius never drops an entry") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    Scenario s = fixtures::triangle();
    for (auto& st : s.initial_states) st.position = Vec2(pos(rng), pos(rng));
    for (std::size_t k = 0; k < 5; ++k) s.obstacles.push_back(fixtures::fixed_obstacle(k, pos(rng), pos(rng)));
    s.sensing_radius = 3.0;
    const auto small = sensed_obstacles(s, s.initial_states, 0);
    s.sensing_radius = 6.0;
    const auto large = sensed_obstacles(s, s.initial_states, 0);
    for (const auto& o : small) {
      CHECK(std::any_of(large.begin(), large.end(), [&](const Obstacle& x) { return x.id == o.id; }));
    }
  }
}

TEST_CASE("validate") {
  Scenario s = fixtures::triangle(true);
  s.control_limit = 15.0;
  CHECK(validate(s).empty());

  Scenario zero_dt = s;
  zero_dt.dt = 0.0;
  const auto v = validate(zero_dt);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "sim.dt");

  Scenario lopsided = s;
  lopsided.graph = FormationGraph(3);
  lopsided.graph.add_edge(0, 1, {});
  lopsided.graph.add_edge(1, 2, {});
  lopsided.graph.add_arc(0, 2, {});
  CHECK(names(validate(lopsided), "symmetric"));
}

TEST_CASE("validate is total on odd input") {
  Scenario s;
  CHECK_NOTHROW(validate(s));
  s.initial_states = {at(0, 0)};
  s.masses = {-1.0};
  s.gains = {Gains{-1.0, 0.0, 1.0}};
  s.leader_inputs[7] = Vec2(1, 1);
  s.obstacles.push_back(fixtures::fixed_obstacle(0, 0, 0, -2.0));
  s.obstacles.push_back(fixtures::fixed_obstacle(0, 1, 0, 1.0));
  s.tau = -1.0;
  s.max_rounds = 0;
  std::vector<Violation> v;
  CHECK_NOTHROW(v = validate(s));
  CHECK(v.size() >= 6);
}

TEST_CASE("agent margin overrides are per pair") {
  Scenario s = fixtures::triangle();
  s.agent_margin = 1.0;
  s.agent_margin_overrides[{0, 2}] = 0.4;
  CHECK(s.margin_between(2, 0) == 0.4);
  CHECK(s.margin_between(0, 1) == 1.0);
}
