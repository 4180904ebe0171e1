#include "swarmsafe/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace swarmsafe {

SingularityError::SingularityError(AgentIndex i, AgentIndex j)
    : std::runtime_error("agents " + std::to_string(i) + " and " + std::to_string(j) +
                         " are coincident; spring direction undefined"),
      i_(i),
      j_(j) {}

bool is_finite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

std::string ObstacleId::str() const {
  return (kind == ObstacleKind::fixed ? "obstacle:" : "agent:") + std::to_string(index);
}

FormationGraph::FormationGraph(std::size_t agent_count) : agent_count_(agent_count) {}

FormationGraph FormationGraph::complete(std::size_t agent_count, const SpringParams& params) {
  FormationGraph g(agent_count);
  for (AgentIndex i = 0; i < agent_count; ++i) {
    for (AgentIndex j = i + 1; j < agent_count; ++j) g.add_edge(i, j, params);
  }
  return g;
}

void FormationGraph::add_edge(AgentIndex i, AgentIndex j, const SpringParams& params) {
  add_arc(i, j, params);
  add_arc(j, i, params);
}

void FormationGraph::add_arc(AgentIndex i, AgentIndex j, const SpringParams& params) {
  arcs_[{i, j}] = params;
}

std::vector<AgentIndex> FormationGraph::neighbors(AgentIndex i) const {
  if (i >= agent_count_) {
    throw ConfigError("agent index " + std::to_string(i) + " out of range (n = " +
                      std::to_string(agent_count_) + ")");
  }
  std::vector<AgentIndex> out;
  for (auto it = arcs_.lower_bound({i, 0}); it != arcs_.end() && it->first.first == i; ++it) {
    const AgentIndex j = it->first.second;
    if (j != i && j < agent_count_) out.push_back(j);
  }
  return out;
}

const SpringParams& FormationGraph::spring(AgentIndex i, AgentIndex j) const {
  auto it = arcs_.find({i, j});
  if (it == arcs_.end()) {
    throw ConfigError("no spring from " + std::to_string(j) + " to " + std::to_string(i));
  }
  return it->second;
}

bool FormationGraph::has_arc(AgentIndex i, AgentIndex j) const { return arcs_.contains({i, j}); }

std::vector<AgentIndex> neighbors(const FormationGraph& graph, AgentIndex i) {
  return graph.neighbors(i);
}

Polytope::Polytope(Eigen::MatrixXd g, Eigen::VectorXd limits) : G(std::move(g)), l(std::move(limits)) {
  if (G.rows() != l.size()) throw ConfigError("polytope: row count of G differs from length of l");
}

Polytope Polytope::box(const Vec2& center, double half_width) {
  Eigen::MatrixXd g(4, 2);
  g << 1, 0, -1, 0, 0, 1, 0, -1;
  Eigen::VectorXd lim(4);
  lim << center.x() + half_width, -(center.x() - half_width), center.y() + half_width,
      -(center.y() - half_width);
  return Polytope(std::move(g), std::move(lim));
}

bool Polytope::contains(const Eigen::VectorXd& u, double tol) const {
  if (rows() == 0) return true;
  return ((G * u - l).array() <= tol).all();
}

bool Polytope::finite() const { return G.allFinite() && l.allFinite(); }

std::string to_string(SpringSign s) { return s == SpringSign::restoring ? "restoring" : "paper_literal"; }
std::string to_string(Objective o) { return o == Objective::minimal ? "minimal" : "paper_literal"; }
std::string to_string(TauMode m) { return m == TauMode::printed ? "printed" : "kinematic"; }
std::string to_string(PairRows p) { return p == PairRows::shared ? "shared" : "full"; }

double Scenario::margin_between(AgentIndex i, AgentIndex j) const {
  auto it = agent_margin_overrides.find({std::min(i, j), std::max(i, j)});
  return it == agent_margin_overrides.end() ? agent_margin : it->second;
}

Vec2 Scenario::leader_input(AgentIndex i) const {
  auto it = leader_inputs.find(i);
  return it == leader_inputs.end() ? Vec2::Zero() : it->second;
}

std::vector<Obstacle> sensed_obstacles(const Scenario& scenario, const States& states, AgentIndex i,
                                       double /*t*/) {
  std::vector<Obstacle> out;
  const Vec2& p = states.at(i).position;
  std::vector<Obstacle> fixed = scenario.obstacles;
  std::sort(fixed.begin(), fixed.end(), [](const Obstacle& a, const Obstacle& b) { return a.id < b.id; });
  for (const auto& o : fixed) {
    if ((o.position - p).norm() <= scenario.sensing_radius) out.push_back(o);
  }
  for (AgentIndex j = 0; j < states.size(); ++j) {
    if (j == i) continue;
    if ((states[j].position - p).norm() <= scenario.sensing_radius) {
      out.push_back(Obstacle{ObstacleId{ObstacleKind::agent, j}, states[j].position, states[j].velocity,
                             scenario.margin_between(i, j)});
    }
  }
  return out;
}

namespace {

class ViolationList {
 public:
  void check(bool ok, std::string field, std::string message) {
    if (!ok) items_.push_back({std::move(field), std::move(message)});
  }
  std::vector<Violation> take() { return std::move(items_); }

 private:
  std::vector<Violation> items_;
};

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

std::string agent_field(std::size_t i, const char* key) {
  return "agents." + std::to_string(i) + "." + key;
}

}  // namespace

std::vector<Violation> validate(const Scenario& s) {
  ViolationList v;
  const std::size_t n = s.agent_count();

  v.check(n >= 1, "agents", "at least one agent is required");
  v.check(positive(s.dt), "sim.dt", "dt must be a positive finite number");
  v.check(positive(s.duration), "sim.duration", "duration must be a positive finite number");
  if (positive(s.dt) && positive(s.duration)) {
    v.check(s.dt < s.duration, "sim.dt", "dt must be smaller than duration");
  }
  v.check(positive(s.tau), "sim.tau", "tau must be a positive finite number");
  v.check(s.max_rounds >= 1, "sim.max_rounds", "max_rounds must be at least 1");
  v.check(positive(s.control_limit), "sim.control_limit",
          "control_limit must be positive (the control polytope would be empty)");
  v.check(positive(s.sensing_radius), "sim.sensing_radius", "sensing_radius must be positive");
  v.check(positive(s.agent_margin), "sim.agent_margin", "agent_margin must be positive");

  double max_margin = s.agent_margin;
  for (const auto& [pair, r] : s.agent_margin_overrides) {
    const std::string field = "agent_margins." + std::to_string(pair.first) + "-" + std::to_string(pair.second);
    v.check(positive(r), field, "margin must be positive");
    v.check(pair.first < n && pair.second < n && pair.first != pair.second, field,
            "margin override must name two distinct existing agents");
    if (std::isfinite(r)) max_margin = std::max(max_margin, r);
  }

  v.check(s.masses.size() == n, "agents", "one mass per agent is required");
  v.check(s.gains.size() == n, "gains", "one gain set per agent is required");
  for (std::size_t i = 0; i < n; ++i) {
    v.check(s.initial_states[i].finite(), agent_field(i, "pos"), "initial state must be finite");
    if (i < s.masses.size()) v.check(positive(s.masses[i]), agent_field(i, "mass"), "mass must be positive");
    if (i < s.gains.size()) {
      const Gains& g = s.gains[i];
      v.check(positive(g.alpha0), "gains.alpha0", "alpha0 must be positive");
      v.check(positive(g.alpha1), "gains.alpha1", "alpha1 must be positive");
      v.check(positive(g.alpha2), "gains.alpha2", "alpha2 must be positive");
    }
  }
  for (const auto& [i, u] : s.leader_inputs) {
    v.check(i < n, agent_field(i, "leader_input"), "leader agent does not exist");
    v.check(is_finite(u), agent_field(i, "leader_input"), "leader input must be finite");
  }

  v.check(s.graph.agent_count() == n, "graph",
          "graph agent count " + std::to_string(s.graph.agent_count()) + " differs from agent count " +
              std::to_string(n));
  for (const auto& [arc, p] : s.graph.arcs()) {
    const auto [i, j] = arc;
    const std::string field = "graph.edges." + std::to_string(i) + "-" + std::to_string(j);
    v.check(i != j, field, "self-loop");
    v.check(i < s.graph.agent_count() && j < s.graph.agent_count(), field, "edge index out of range");
    v.check(s.graph.has_arc(j, i), field, "edge set is not symmetric: missing reverse arc");
    v.check(positive(p.stiffness), field + ".k", "stiffness must be positive");
    v.check(std::isfinite(p.damping) && p.damping >= 0.0, field + ".b", "damping must be non-negative");
    v.check(positive(p.rest_length), field + ".R", "rest length must be positive");
    if (i < n && j < n && i != j && s.initial_states[i].finite() && s.initial_states[j].finite()) {
      const double len = (s.initial_states[i].position - s.initial_states[j].position).norm();
      v.check(len >= kCoincidenceThreshold, field, "connected agents start coincident");
    }
  }

  std::set<ObstacleId> ids;
  for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
    const Obstacle& o = s.obstacles[k];
    const std::string field = "obstacles." + std::to_string(k);
    v.check(o.id.kind == ObstacleKind::fixed, field, "scenario obstacles must be static");
    v.check(ids.insert(o.id).second, field, "duplicate obstacle id " + o.id.str());
    v.check(is_finite(o.position), field + ".pos", "position must be finite");
    v.check(o.velocity.isZero(0.0), field, "static obstacles must have zero velocity");
    v.check(positive(o.radius_margin), field + ".margin", "margin must be positive");
    if (std::isfinite(o.radius_margin)) max_margin = std::max(max_margin, o.radius_margin);
  }

  if (positive(s.sensing_radius)) {
    v.check(s.sensing_radius > max_margin, "sim.sensing_radius",
            "sensing_radius must exceed the largest safety margin");
  }
  return v.take();
}

}  // namespace swarmsafe
