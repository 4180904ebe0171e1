#pragma once

#include "swarmsafe/formation.hpp"
#include "swarmsafe/model.hpp"

#include <vector>

namespace swarmsafe {

/// h = ||p_i - p_o||^2 - r^2
double barrier_value(const AgentState& agent, const Obstacle& obs);

/// phi1 = 2 (v_i - v_o).(p_i - p_o) + alpha0 h
double phi1(const AgentState& agent, const Obstacle& obs, double alpha0);

/// 2 (p_i - p_o): the sensitivity of phi1 to agent i's velocity. The filter
/// enters through g_bar = -g, so its coefficient in dphi1/dt is the negation.
Vec2 lie_g_phi1(const AgentState& agent, const Obstacle& obs);

/// dphi1/dt along the closed-loop drift with every filter input at zero.
/// Obstacles that are agents move with their own formation acceleration.
double lie_f_phi1(const States& states, const FormationGraph& graph, AgentIndex i, const Obstacle& obs,
                  const Gains& gains, const FormationParams& params);

/// One sensed obstacle's second-order condition
///   Phi = sum_j a_j . u_j^v + b . u_i^s + q
/// where u_j^v are neighbor controls expressed as velocity commands and
/// u_i^s is agent i's own acceleration filter.
struct SafetyRow {
  ObstacleId obstacle;
  std::vector<Vec2> neighbor_effects;  // aligned with SafetySystem::neighbors
  Vec2 own_effect = Vec2::Zero();
  double drift = 0.0;
};

struct SafetySystem {
  AgentIndex agent = 0;
  std::vector<AgentIndex> neighbors;
  std::vector<SafetyRow> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }

  Eigen::MatrixXd A() const;  // K x 2|N_i|
  Eigen::MatrixXd B() const;  // K x 2
  Eigen::VectorXd q() const;  // K

  /// Phi_i for the given controls; u_neighbors aligned with `neighbors`.
  Eigen::VectorXd evaluate(const std::vector<Vec2>& u_neighbors, const Vec2& u_own) const;
  /// Position of neighbor j within `neighbors`, or npos.
  std::size_t neighbor_slot(AgentIndex j) const;
};

/// Builds one row per sensed obstacle. Neighbor effects are taken against
/// velocity-level neighbor actuation, since acceleration-level neighbor
/// inputs only enter one derivative later. The bilinear u_i^s x u_j^v
/// coupling on inter-agent rows is dropped along with du^s/dt and the
/// quadratic own-control term.
SafetySystem assemble(const States& states, const FormationGraph& graph, AgentIndex i,
                      const std::vector<Obstacle>& sensed, const Gains& gains, const FormationParams& params);

/// The first-order condition dphi1/dt + alpha1 phi1 >= 0 as normal . u_i^s >= bound.
Halfspace first_order_constraint(const States& states, const FormationGraph& graph, AgentIndex i,
                                 const Obstacle& obs, const Gains& gains, const FormationParams& params);

}  // namespace swarmsafe
