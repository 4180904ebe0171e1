#pragma once

#include "swarmsafe/barrier.hpp"
#include "swarmsafe/model.hpp"
#include "swarmsafe/optim.hpp"

#include <map>
#include <span>
#include <variant>
#include <vector>

namespace swarmsafe {

inline constexpr double kLedgerTolerance = 1e-9;

struct RequestRow {
  ObstacleId obstacle;
  Vec2 direction = Vec2::Zero();  // requester's neighbor-effect row for the recipient
  double amount = 0.0;            // additional capability asked for, >= 0
};

/// "Constrain your velocity command u so that direction . u >= amount."
struct RequestMsg {
  AgentIndex from = 0;
  AgentIndex to = 0;
  std::vector<RequestRow> rows;
};

struct Grant {
  ObstacleId obstacle;
  double granted = 0.0;  // 0 <= granted <= requested
};

struct AdjustMsg {
  AgentIndex from = 0;
  AgentIndex to = 0;
  std::vector<Grant> grants;
};

/// A granted request that now binds the granting agent.
struct Promise {
  AgentIndex requester = 0;
  ObstacleId obstacle;
  Vec2 direction = Vec2::Zero();  // velocity space
  double amount = 0.0;            // cumulative, velocity space
  Halfspace acceleration;         // the same promise on the acceleration filter
};

/// Allowed filter actions: the base polytope cut by every promise made so far.
struct ConstrainedSet {
  Polytope base;
  std::vector<Promise> added;

  std::vector<Halfspace> halfspaces() const;
  Polytope polytope() const;
  bool contains(const Vec2& u, double tol = 1e-9) const;
  const Promise* find(AgentIndex requester, const ObstacleId& obstacle) const;
};

/// own = c_bar_i; promised[j] = c_bar_ij over agent i's own rows, stored as
/// the negated capability granted by neighbor j, so that the residual
/// delta_i = c_bar_i - sum_j c_bar_ij is what remains after neighbor help.
struct CapabilityLedger {
  Eigen::VectorXd own;
  std::map<AgentIndex, Eigen::VectorXd> promised;

  Eigen::VectorXd residual() const;
};

/// Velocity-level constraint set {u : G u - l <= 0} to its acceleration
/// counterpart: G -> G / tau (printed) or G -> tau G (kinematic), l unchanged.
Polytope convert_velocity_constraints(const Polytope& velocity_set, double tau, TauMode mode = TauMode::printed);

/// direction . u^v >= amount as a halfspace on the acceleration filter.
Halfspace convert_velocity_halfspace(const Vec2& direction, double amount, double tau, TauMode mode);

struct DeficitReport {
  Eigen::VectorXd capability;  // c_bar_i = B u* + q
  Eigen::VectorXd deficit;     // max(0, -c_bar_i)
};

DeficitReport compute_deficit(const SafetySystem& system, const LpResult& lp);

struct Allocation {
  std::vector<RequestMsg> requests;      // ordered by recipient
  std::vector<ObstacleId> unservable;    // deficits no neighbor can affect
};

/// Splits each row's deficit across neighbors in proportion to the norm of
/// their neighbor-effect row; zero-norm neighbors get nothing.
Allocation allocate_requests(AgentIndex from, const Eigen::VectorXd& deficit, const SafetySystem& system);

struct ProcessOutcome {
  ConstrainedSet updated;
  std::vector<AdjustMsg> adjustments;  // one per requester, ordered
  double scale = 1.0;                  // common fraction granted
  bool own_set_empty = false;
  bool blocked_by_first_order = false; // own rows leave no room for any grant
};

/// Grants the largest common fraction of all incoming requests that keeps
/// the agent's own set and its first-order rows feasible; all zeros when
/// there is none. Granted amounts become promises in the returned set.
ProcessOutcome process_requests(AgentIndex self, const ConstrainedSet& own_set, std::span<const RequestMsg> incoming,
                                std::span<const Halfspace> first_order, double tau, TauMode mode = TauMode::printed);

struct CollabAgent {
  AgentIndex index = 0;
  SafetySystem system;
  Polytope base;                        // U_i^s in acceleration space
  std::vector<Halfspace> first_order;   // own first-order safety rows
};

struct ProtocolOptions {
  double tau = 1.0;
  TauMode tau_mode = TauMode::printed;
  int max_rounds = 10;
  bool record_trace = false;
};

struct TraceEntry {
  int round = 0;
  std::variant<RequestMsg, AdjustMsg> message;
};

struct AgentProtocolState {
  ConstrainedSet set;
  CapabilityLedger ledger;
  LpResult capability;
  bool unservable = false;
  bool own_set_empty = false;
};

struct ProtocolOutcome {
  std::vector<AgentProtocolState> agents;
  int rounds = 0;          // rounds executed
  int request_rounds = 0;  // rounds in which at least one request was sent
  bool converged = false;
  std::vector<TraceEntry> trace;
};

/// Synchronous rounds: capability LP, requests, processing, adjustments.
/// Stops once no ledger entry moves by more than kLedgerTolerance and every
/// residual is non-negative, or after max_rounds.
/// agents[k].index must equal k.
ProtocolOutcome run_protocol(std::span<const CollabAgent> agents, const ProtocolOptions& options);

enum class FilterLevel {
  full,       // first-order rows + promises + box
  own_only,   // promises dropped
  survival    // first-order rows infeasible in the box: maximize worst slack
};

std::string to_string(FilterLevel level);

struct FilterChoice {
  Vec2 u_s = Vec2::Zero();
  FilterLevel level = FilterLevel::full;
  bool degraded() const { return level != FilterLevel::full; }
};

/// Safety-filter QP over the agent's constrained set, with the fallback
/// ladder full -> own_only -> survival.
FilterChoice choose_filter(const Vec2& center, std::span<const Halfspace> first_order, const ConstrainedSet& set);

struct AgentDecision {
  Vec2 u_f = Vec2::Zero();
  Vec2 u_s = Vec2::Zero();
  FilterLevel level = FilterLevel::full;
  std::vector<Obstacle> sensed;
  std::vector<Halfspace> first_order;
  ConstrainedSet set;
};

struct TickOutcome {
  std::vector<AgentDecision> agents;
  ProtocolOutcome protocol;
};

/// Sense, assemble, collaborate and filter for every agent at one instant.
TickOutcome run_tick(const States& states, const Scenario& scenario, double t, bool record_trace = false);

}  // namespace swarmsafe
