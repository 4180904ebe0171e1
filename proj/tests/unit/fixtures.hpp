#pragma once

#include "swarmsafe/model.hpp"

#include <cmath>

namespace fixtures {

using swarmsafe::AgentState;
using swarmsafe::Obstacle;
using swarmsafe::ObstacleId;
using swarmsafe::ObstacleKind;
using swarmsafe::Vec2;

inline AgentState at(double x, double y, double vx = 0.0, double vy = 0.0) {
  return AgentState{Vec2(x, y), Vec2(vx, vy)};
}

inline Obstacle fixed_obstacle(std::size_t id, double x, double y, double margin = 1.0) {
  return Obstacle{ObstacleId{ObstacleKind::fixed, id}, Vec2(x, y), Vec2::Zero(), margin};
}

/// Three agents on the rest triangle (side 3), complete graph, m = 0.5.
inline swarmsafe::Scenario triangle(bool with_obstacle = false) {
  swarmsafe::Scenario s;
  const double h = 1.5 * std::sqrt(3.0);
  s.initial_states = {at(0.0, 0.0), at(-h, 1.5), at(-h, -1.5)};
  s.graph = swarmsafe::FormationGraph::complete(3, swarmsafe::SpringParams{});
  s.masses = {0.5, 0.5, 0.5};
  s.gains.assign(3, swarmsafe::Gains{});
  if (with_obstacle) s.obstacles.push_back(fixed_obstacle(0, 4.0, 0.0));
  return s;
}

/// Two agents joined by one spring.
inline swarmsafe::Scenario pair(AgentState a, AgentState b, swarmsafe::SpringParams spring = {}) {
  swarmsafe::Scenario s;
  s.initial_states = {a, b};
  s.graph = swarmsafe::FormationGraph(2);
  s.graph.add_edge(0, 1, spring);
  s.masses = {0.5, 0.5};
  s.gains.assign(2, swarmsafe::Gains{});
  return s;
}

}  // namespace fixtures
