#pragma once

// Independent reference computations for the property suites. Nothing here
// calls the barrier assembly or the LP/QP solvers; they are what those are
// checked against.

#include "swarmsafe/barrier.hpp"
#include "swarmsafe/collab.hpp"
#include "swarmsafe/model.hpp"

#include <random>
#include <vector>

namespace swarmsafe::checks {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
Vec2 uniform_vec(Rng& rng, double lo, double hi);

/// Brute-force max over a points x points grid on the box of min_k [B u]_k.
double grid_maxmin(const Eigen::MatrixXd& B, const Vec2& center, double half_width, int points = 201);

/// Worst gap between the LP optimum and a grid sample: max_k ||B_k||_1 * spacing.
double grid_resolution(const Eigen::MatrixXd& B, double half_width, int points = 201);

/// A random 3-agent formation with two static obstacles, one agent singled
/// out, and one obstacle (static or another agent) it is checked against.
struct PairCase {
  Scenario scenario;
  States states;
  AgentIndex agent = 0;
  Obstacle obstacle;
};

PairCase random_pair_case(Rng& rng);

/// Controls for the virtual flow used by the finite differences: agent i's
/// acceleration filter and velocity-level commands for its neighbors.
struct FlowInputs {
  Vec2 own = Vec2::Zero();
  std::vector<Vec2> neighbors;  // aligned with graph.neighbors(agent); empty means zero
};

/// phi1 written out from its definition on the given states.
double phi1_direct(const PairCase& c, const States& s);

/// phi2 = dphi1/dt + alpha1 phi1 with agent i's filter held at `own` and no
/// neighbor commands.
double phi2_direct(const PairCase& c, const States& s, const Vec2& own);

/// Central difference of phi1 along the closed loop with agent i filtered by `own`.
double fd_phi1_rate(const PairCase& c, const Vec2& own, double step = 1e-6);

/// Central difference of phi2 along the virtual flow, plus alpha2 phi2.
double fd_second_order(const PairCase& c, const FlowInputs& u, double step = 1e-6);

/// |a - b| <= tol * max(1, |b|)
bool close_relative(double a, double b, double tol);

/// Two agents. Agent 0 sees one static obstacle it cannot influence itself
/// and has capability -deficit; agent 1 can cover it through direction (1, 0).
std::vector<CollabAgent> hand_traced_instance(double deficit = 2.0, double limit = 15.0);

/// Agents 0 and 2 ask agent 1 for (1, 1).u >= deficit and (-1, 1).u >= deficit.
/// Each fits in agent 1's box alone; together only half of each does.
std::vector<CollabAgent> conflict_instance(double deficit = 2.0, double limit = 1.0);

}  // namespace swarmsafe::checks
