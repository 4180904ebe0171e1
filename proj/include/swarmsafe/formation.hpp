#pragma once

#include "swarmsafe/model.hpp"

#include <span>

namespace swarmsafe {

/// What the virtual mass-spring controller needs besides the graph.
struct FormationParams {
  std::vector<double> masses;
  std::vector<Vec2> leader_inputs;  // zero for followers
  SpringSign spring_sign = SpringSign::restoring;

  static FormationParams from(const Scenario& scenario);
};

using Vec4 = Eigen::Vector4d;
using Actuation = Eigen::Matrix<double, 4, 2>;

/// Virtual spring-damper acceleration on agent i (leader input excluded).
///
/// (1/m_i) * sum_j [ sigma k_ij (L_ij - R_ij) (p_i - p_j)/L_ij - b_ij v_i ],
/// sigma = +1 for SpringSign::paper_literal and -1 for SpringSign::restoring.
/// Throws SingularityError when a neighbor sits within kCoincidenceThreshold.
Vec2 spring_control(const States& states, const FormationGraph& graph, AgentIndex i, double mass,
                    SpringSign sign);

/// u_i^f: spring control plus the agent's constant leader input.
Vec2 formation_control(const States& states, const FormationGraph& graph, AgentIndex i,
                       const FormationParams& params);

/// d/dt [sigma k (L - R) e] with respect to p_i: sigma k [(1 - R/L) I + (R/L) e e^T].
/// The Jacobian with respect to p_j is the negation.
Eigen::Matrix2d spring_stiffness(const States& states, const FormationGraph& graph, AgentIndex i, AgentIndex j,
                                 SpringSign sign);

/// sum_j b_ij
double total_damping(const FormationGraph& graph, AgentIndex i);

/// Time derivative of u_i^f given every agent's position rate and agent i's
/// acceleration: (1/m_i) [sum_j K_ij (pdot_i - pdot_j) - (sum_j b_ij) vdot_i].
Vec2 formation_control_rate(const States& states, const FormationGraph& graph, AgentIndex i,
                            const FormationParams& params, std::span<const Vec2> position_rates,
                            const Vec2& acceleration);

/// f_bar_i = [v_i; u_i^f], the closed-loop drift with u_i^s = 0.
Vec4 closed_loop_drift(const States& states, const FormationGraph& graph, AgentIndex i,
                       const FormationParams& params);

/// g_bar_i = -g_i = [0; -I].
Actuation filter_actuation();

/// Applied acceleration u^f - u^s.
Vec2 apply_filter(const Vec2& u_f, const Vec2& u_s);

}  // namespace swarmsafe
