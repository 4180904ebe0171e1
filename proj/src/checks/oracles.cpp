#include "swarmsafe/checks/oracles.hpp"

#include "swarmsafe/formation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swarmsafe::checks {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Vec2 uniform_vec(Rng& rng, double lo, double hi) {
  const double x = uniform(rng, lo, hi);
  const double y = uniform(rng, lo, hi);
  return Vec2(x, y);
}

double grid_maxmin(const Eigen::MatrixXd& B, const Vec2& center, double half_width, int points) {
  const double step = 2.0 * half_width / (points - 1);
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < points; ++a) {
    for (int b = 0; b < points; ++b) {
      const Vec2 u = center + Vec2(-half_width + a * step, -half_width + b * step);
      best = std::max(best, (B * u).minCoeff());
    }
  }
  return best;
}

double grid_resolution(const Eigen::MatrixXd& B, double half_width, int points) {
  const double step = 2.0 * half_width / (points - 1);
  return B.rowwise().lpNorm<1>().maxCoeff() * step;
}

PairCase random_pair_case(Rng& rng) {
  PairCase c;
  Scenario& s = c.scenario;
  const std::size_t n = 3;

  // Keep agents apart so spring lengths stay well conditioned.
  for (;;) {
    c.states.assign(n, AgentState{});
    for (auto& st : c.states) {
      st.position = uniform_vec(rng, -4.0, 4.0);
      st.velocity = uniform_vec(rng, -2.0, 2.0);
    }
    bool apart = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) apart = apart && (c.states[i].position - c.states[j].position).norm() > 0.5;
    }
    if (apart) break;
  }
  s.initial_states = c.states;
  s.graph = FormationGraph(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      s.graph.add_edge(i, j, SpringParams{uniform(rng, 1.0, 5.0), uniform(rng, 0.2, 2.0), uniform(rng, 2.0, 4.0)});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    s.masses.push_back(uniform(rng, 0.3, 1.5));
    const double a0 = uniform(rng, 0.5, 3.0);
    const double a1 = uniform(rng, 0.5, 3.0);
    const double a2 = uniform(rng, 0.5, 3.0);
    s.gains.push_back(Gains{a0, a1, a2});
  }
  s.leader_inputs[0] = uniform_vec(rng, -5.0, 5.0);
  for (std::size_t k = 0; k < 2; ++k) {
    Obstacle o;
    o.id = ObstacleId{ObstacleKind::fixed, k};
    o.position = uniform_vec(rng, -6.0, 6.0);
    o.radius_margin = uniform(rng, 0.5, 1.5);
    s.obstacles.push_back(o);
  }
  s.sensing_radius = 1e6;

  c.agent = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
  if (pick < 2) {
    c.obstacle = s.obstacles[pick];
  } else {
    AgentIndex o = (c.agent + pick - 1) % n;
    c.obstacle = Obstacle{ObstacleId{ObstacleKind::agent, o}, c.states[o].position, c.states[o].velocity,
                          uniform(rng, 0.5, 1.5)};
  }
  return c;
}

namespace {

bool moving(const PairCase& c) { return c.obstacle.id.kind == ObstacleKind::agent; }

Vec2 obstacle_position(const PairCase& c, const States& s) {
  return moving(c) ? s[c.obstacle.id.index].position : c.obstacle.position;
}

Vec2 obstacle_velocity(const PairCase& c, const States& s) {
  return moving(c) ? s[c.obstacle.id.index].velocity : Vec2::Zero();
}

Vec2 nominal(const PairCase& c, const States& s, AgentIndex j) {
  return formation_control(s, c.scenario.graph, j, FormationParams::from(c.scenario));
}

struct Flow {
  std::vector<Vec2> dp;
  std::vector<Vec2> dv;
};

Flow flow(const PairCase& c, const States& s, const FlowInputs& u) {
  Flow f;
  const auto nbrs = c.scenario.graph.neighbors(c.agent);
  for (AgentIndex j = 0; j < s.size(); ++j) {
    Vec2 dp = s[j].velocity;
    Vec2 dv = nominal(c, s, j);
    if (j == c.agent) dv -= u.own;
    const auto it = std::find(nbrs.begin(), nbrs.end(), j);
    if (it != nbrs.end() && !u.neighbors.empty()) dp -= u.neighbors[static_cast<std::size_t>(it - nbrs.begin())];
    f.dp.push_back(dp);
    f.dv.push_back(dv);
  }
  return f;
}

States shift(const States& s, const Flow& f, double h) {
  States out = s;
  for (std::size_t j = 0; j < s.size(); ++j) {
    out[j].position += h * f.dp[j];
    out[j].velocity += h * f.dv[j];
  }
  return out;
}

}  // namespace

double phi1_direct(const PairCase& c, const States& s) {
  const Vec2 d = s[c.agent].position - obstacle_position(c, s);
  const Vec2 w = s[c.agent].velocity - obstacle_velocity(c, s);
  const double r = c.obstacle.radius_margin;
  const double alpha0 = c.scenario.gains[c.agent].alpha0;
  return 2.0 * w.dot(d) + alpha0 * (d.squaredNorm() - r * r);
}

double phi2_direct(const PairCase& c, const States& s, const Vec2& own) {
  const Vec2 d = s[c.agent].position - obstacle_position(c, s);
  const Vec2 w = s[c.agent].velocity - obstacle_velocity(c, s);
  const Vec2 a_i = nominal(c, s, c.agent) - own;
  const Vec2 a_o = moving(c) ? nominal(c, s, c.obstacle.id.index) : Vec2::Zero();
  const Gains& g = c.scenario.gains[c.agent];
  return 2.0 * (a_i - a_o).dot(d) + 2.0 * w.squaredNorm() + 2.0 * g.alpha0 * w.dot(d) + g.alpha1 * phi1_direct(c, s);
}

double fd_phi1_rate(const PairCase& c, const Vec2& own, double step) {
  const Flow f = flow(c, c.states, FlowInputs{own, {}});
  return (phi1_direct(c, shift(c.states, f, step)) - phi1_direct(c, shift(c.states, f, -step))) / (2.0 * step);
}

double fd_second_order(const PairCase& c, const FlowInputs& u, double step) {
  const Flow f = flow(c, c.states, u);
  const double rate =
      (phi2_direct(c, shift(c.states, f, step), u.own) - phi2_direct(c, shift(c.states, f, -step), u.own)) /
      (2.0 * step);
  return rate + c.scenario.gains[c.agent].alpha2 * phi2_direct(c, c.states, u.own);
}

bool close_relative(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

namespace {

CollabAgent requester(AgentIndex self, AgentIndex helper, const Vec2& direction, double deficit, double limit) {
  CollabAgent a;
  a.index = self;
  a.system.agent = self;
  a.system.neighbors = {helper};
  SafetyRow row;
  row.obstacle = ObstacleId{ObstacleKind::fixed, 0};
  row.neighbor_effects = {direction};
  row.own_effect = Vec2::Zero();
  row.drift = -deficit;
  a.system.rows.push_back(row);
  a.base = Polytope::box(Vec2::Zero(), limit);
  return a;
}

CollabAgent helper(AgentIndex self, std::vector<AgentIndex> neighbors, double limit) {
  CollabAgent a;
  a.index = self;
  a.system.agent = self;
  a.system.neighbors = std::move(neighbors);
  a.base = Polytope::box(Vec2::Zero(), limit);
  return a;
}

}  // namespace

std::vector<CollabAgent> hand_traced_instance(double deficit, double limit) {
  return {requester(0, 1, Vec2(1.0, 0.0), deficit, limit), helper(1, {0}, limit)};
}

std::vector<CollabAgent> conflict_instance(double deficit, double limit) {
  return {requester(0, 1, Vec2(1.0, 1.0), deficit, limit), helper(1, {0, 2}, limit),
          requester(2, 1, Vec2(-1.0, 1.0), deficit, limit)};
}

}  // namespace swarmsafe::checks
