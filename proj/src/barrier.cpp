#include "swarmsafe/barrier.hpp"

#include <algorithm>
#include <limits>

namespace swarmsafe {

double barrier_value(const AgentState& agent, const Obstacle& obs) {
  return (agent.position - obs.position).squaredNorm() - obs.radius_margin * obs.radius_margin;
}

double phi1(const AgentState& agent, const Obstacle& obs, double alpha0) {
  const Vec2 d = agent.position - obs.position;
  const Vec2 w = agent.velocity - obs.velocity;
  return 2.0 * w.dot(d) + alpha0 * barrier_value(agent, obs);
}

Vec2 lie_g_phi1(const AgentState& agent, const Obstacle& obs) { return 2.0 * (agent.position - obs.position); }

namespace {

bool is_agent(const Obstacle& obs) { return obs.id.kind == ObstacleKind::agent; }

// Relative geometry of one agent/obstacle pair at zero filter input.
struct PairTerms {
  Vec2 d;       // p_i - p_o
  Vec2 w;       // v_i - v_o
  Vec2 rel_acc; // u_i^f - a_o
};

PairTerms pair_terms(const States& states, const FormationGraph& graph, AgentIndex i, const Obstacle& obs,
                     const FormationParams& params) {
  PairTerms t;
  t.d = states[i].position - obs.position;
  t.w = states[i].velocity - obs.velocity;
  t.rel_acc = formation_control(states, graph, i, params);
  if (is_agent(obs)) t.rel_acc -= formation_control(states, graph, obs.id.index, params);
  return t;
}

double lie_f_phi1_terms(const PairTerms& t, double alpha0) {
  return 2.0 * t.rel_acc.dot(t.d) + 2.0 * t.w.squaredNorm() + 2.0 * alpha0 * t.w.dot(t.d);
}

std::vector<Vec2> velocities(const States& states) {
  std::vector<Vec2> v;
  v.reserve(states.size());
  for (const auto& s : states) v.push_back(s.velocity);
  return v;
}

}  // namespace

double lie_f_phi1(const States& states, const FormationGraph& graph, AgentIndex i, const Obstacle& obs,
                  const Gains& gains, const FormationParams& params) {
  return lie_f_phi1_terms(pair_terms(states, graph, i, obs, params), gains.alpha0);
}

Eigen::MatrixXd SafetySystem::A() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                            static_cast<Eigen::Index>(2 * neighbors.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t j = 0; j < neighbors.size(); ++j) {
      a.block<1, 2>(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(2 * j)) =
          rows[k].neighbor_effects[j].transpose();
    }
  }
  return a;
}

Eigen::MatrixXd SafetySystem::B() const {
  Eigen::MatrixXd b(static_cast<Eigen::Index>(rows.size()), 2);
  for (std::size_t k = 0; k < rows.size(); ++k) b.row(static_cast<Eigen::Index>(k)) = rows[k].own_effect.transpose();
  return b;
}

Eigen::VectorXd SafetySystem::q() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out[static_cast<Eigen::Index>(k)] = rows[k].drift;
  return out;
}

Eigen::VectorXd SafetySystem::evaluate(const std::vector<Vec2>& u_neighbors, const Vec2& u_own) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    double v = rows[k].drift + rows[k].own_effect.dot(u_own);
    for (std::size_t j = 0; j < neighbors.size(); ++j) v += rows[k].neighbor_effects[j].dot(u_neighbors.at(j));
    out[static_cast<Eigen::Index>(k)] = v;
  }
  return out;
}

std::size_t SafetySystem::neighbor_slot(AgentIndex j) const {
  auto it = std::lower_bound(neighbors.begin(), neighbors.end(), j);
  if (it == neighbors.end() || *it != j) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(it - neighbors.begin());
}

SafetySystem assemble(const States& states, const FormationGraph& graph, AgentIndex i,
                      const std::vector<Obstacle>& sensed, const Gains& gains, const FormationParams& params) {
  SafetySystem sys;
  sys.agent = i;
  sys.neighbors = graph.neighbors(i);
  if (sensed.empty()) return sys;

  const double a0 = gains.alpha0;
  const double a1 = gains.alpha1;
  const double a2 = gains.alpha2;
  const double beta = gains.beta();
  const double mass_i = params.masses.at(i);
  const double damping_i = total_damping(graph, i);

  const std::vector<Vec2> v_all = velocities(states);
  const Vec2 uf_i = formation_control(states, graph, i, params);
  const Vec2 jerk_i = formation_control_rate(states, graph, i, params, v_all, uf_i);

  std::vector<Eigen::Matrix2d> stiffness_i;
  for (AgentIndex j : sys.neighbors) stiffness_i.push_back(spring_stiffness(states, graph, i, j, params.spring_sign));

  for (const Obstacle& obs : sensed) {
    const PairTerms t = pair_terms(states, graph, i, obs, params);
    SafetyRow row;
    row.obstacle = obs.id;

    Vec2 jerk_o = Vec2::Zero();
    if (is_agent(obs)) {
      const AgentIndex o = obs.id.index;
      jerk_o = formation_control_rate(states, graph, o, params, v_all, formation_control(states, graph, o, params));
    }

    const double phi = phi1(states[i], obs, a0);
    const double lf_phi = lie_f_phi1_terms(t, a0);
    const double lff_phi = 2.0 * (jerk_i - jerk_o).dot(t.d) + 6.0 * t.rel_acc.dot(t.w) +
                           2.0 * a0 * (t.rel_acc.dot(t.d) + t.w.squaredNorm());
    row.drift = lff_phi + beta * lf_phi + a1 * a2 * phi;

    // L_fbar L_gbar phi1 + L_gbar L_fbar phi1 + beta L_gbar phi1
    const Vec2 lg_phi = -2.0 * t.d;
    const Vec2 lf_lg_phi = -2.0 * t.w;
    const Vec2 lg_lf_phi = 2.0 * (damping_i / mass_i) * t.d - 4.0 * t.w - 2.0 * a0 * t.d;
    row.own_effect = lf_lg_phi + lg_lf_phi + beta * lg_phi;

    row.neighbor_effects.assign(sys.neighbors.size(), Vec2::Zero());
    for (std::size_t s = 0; s < sys.neighbors.size(); ++s) {
      row.neighbor_effects[s] = (2.0 / mass_i) * stiffness_i[s] * t.d;
    }

    if (is_agent(obs)) {
      const AgentIndex o = obs.id.index;
      const double mass_o = params.masses.at(o);
      Eigen::Matrix2d stiffness_sum = Eigen::Matrix2d::Zero();
      for (AgentIndex k : graph.neighbors(o)) {
        const Eigen::Matrix2d k_ok = spring_stiffness(states, graph, o, k, params.spring_sign);
        stiffness_sum += k_ok;
        const std::size_t slot = sys.neighbor_slot(k);
        if (k != i && slot < sys.neighbors.size()) row.neighbor_effects[slot] -= (2.0 / mass_o) * k_ok * t.d;
      }
      const std::size_t slot_o = sys.neighbor_slot(o);
      if (slot_o < sys.neighbors.size()) {
        row.neighbor_effects[slot_o] += (2.0 / mass_o) * stiffness_sum * t.d + 2.0 * t.rel_acc +
                                        2.0 * a0 * t.w + a1 * (2.0 * t.w + 2.0 * a0 * t.d);
      }
    }
    sys.rows.push_back(std::move(row));
  }
  return sys;
}

Halfspace first_order_constraint(const States& states, const FormationGraph& graph, AgentIndex i,
                                 const Obstacle& obs, const Gains& gains, const FormationParams& params) {
  const double lf_phi = lie_f_phi1(states, graph, i, obs, gains, params);
  const double phi = phi1(states[i], obs, gains.alpha0);
  return Halfspace{-lie_g_phi1(states[i], obs), -(lf_phi + gains.alpha1 * phi)};
}

}  // namespace swarmsafe
