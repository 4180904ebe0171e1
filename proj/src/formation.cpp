#include "swarmsafe/formation.hpp"

namespace swarmsafe {

FormationParams FormationParams::from(const Scenario& scenario) {
  FormationParams p;
  p.masses = scenario.masses;
  p.spring_sign = scenario.spring_sign;
  p.leader_inputs.resize(scenario.agent_count(), Vec2::Zero());
  for (const auto& [i, u] : scenario.leader_inputs) {
    if (i < p.leader_inputs.size()) p.leader_inputs[i] = u;
  }
  return p;
}

namespace {

double sign_factor(SpringSign sign) { return sign == SpringSign::paper_literal ? 1.0 : -1.0; }

// Unit vector from p_j to p_i and the current spring length.
std::pair<Vec2, double> spring_geometry(const States& states, AgentIndex i, AgentIndex j) {
  const Vec2 diff = states[i].position - states[j].position;
  const double len = diff.norm();
  if (len < kCoincidenceThreshold) throw SingularityError(i, j);
  return {diff / len, len};
}

}  // namespace

Vec2 spring_control(const States& states, const FormationGraph& graph, AgentIndex i, double mass,
                    SpringSign sign) {
  const double sigma = sign_factor(sign);
  Vec2 force = Vec2::Zero();
  for (AgentIndex j : graph.neighbors(i)) {
    const SpringParams& sp = graph.spring(i, j);
    const auto [dir, len] = spring_geometry(states, i, j);
    force += sigma * sp.stiffness * (len - sp.rest_length) * dir - sp.damping * states[i].velocity;
  }
  return force / mass;
}

Vec2 formation_control(const States& states, const FormationGraph& graph, AgentIndex i,
                       const FormationParams& params) {
  Vec2 u = spring_control(states, graph, i, params.masses.at(i), params.spring_sign);
  if (i < params.leader_inputs.size()) u += params.leader_inputs[i];
  return u;
}

Eigen::Matrix2d spring_stiffness(const States& states, const FormationGraph& graph, AgentIndex i, AgentIndex j,
                                 SpringSign sign) {
  const SpringParams& sp = graph.spring(i, j);
  const auto [dir, len] = spring_geometry(states, i, j);
  const double ratio = sp.rest_length / len;
  return sign_factor(sign) * sp.stiffness *
         ((1.0 - ratio) * Eigen::Matrix2d::Identity() + ratio * dir * dir.transpose());
}

double total_damping(const FormationGraph& graph, AgentIndex i) {
  double b = 0.0;
  for (AgentIndex j : graph.neighbors(i)) b += graph.spring(i, j).damping;
  return b;
}

Vec2 formation_control_rate(const States& states, const FormationGraph& graph, AgentIndex i,
                            const FormationParams& params, std::span<const Vec2> position_rates,
                            const Vec2& acceleration) {
  Vec2 rate = Vec2::Zero();
  for (AgentIndex j : graph.neighbors(i)) {
    rate += spring_stiffness(states, graph, i, j, params.spring_sign) * (position_rates[i] - position_rates[j]);
  }
  rate -= total_damping(graph, i) * acceleration;
  return rate / params.masses.at(i);
}

Vec4 closed_loop_drift(const States& states, const FormationGraph& graph, AgentIndex i,
                       const FormationParams& params) {
  const Vec2 u_f = formation_control(states, graph, i, params);
  Vec4 out;
  out << states[i].velocity, u_f;
  return out;
}

Actuation filter_actuation() {
  Actuation g = Actuation::Zero();
  g(2, 0) = -1.0;
  g(3, 1) = -1.0;
  return g;
}

Vec2 apply_filter(const Vec2& u_f, const Vec2& u_s) { return u_f - u_s; }

}  // namespace swarmsafe
