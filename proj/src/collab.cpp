#include "swarmsafe/collab.hpp"

#include "swarmsafe/formation.hpp"

#include "swarmsafe/log.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace swarmsafe {

using Index = Eigen::Index;

std::vector<Halfspace> ConstrainedSet::halfspaces() const {
  std::vector<Halfspace> out;
  out.reserve(added.size());
  for (const auto& p : added) out.push_back(p.acceleration);
  return out;
}

Polytope ConstrainedSet::polytope() const {
  const Index base_rows = base.G.rows();
  const Index total = base_rows + static_cast<Index>(added.size());
  Eigen::MatrixXd g(total, 2);
  Eigen::VectorXd l(total);
  if (base_rows > 0) {
    g.topRows(base_rows) = base.G;
    l.head(base_rows) = base.l;
  }
  for (std::size_t k = 0; k < added.size(); ++k) {
    const Index r = base_rows + static_cast<Index>(k);
    g.row(r) = -added[k].acceleration.normal.transpose();
    l[r] = -added[k].acceleration.bound;
  }
  return Polytope(std::move(g), std::move(l));
}

bool ConstrainedSet::contains(const Vec2& u, double tol) const { return polytope().contains(u, tol); }

const Promise* ConstrainedSet::find(AgentIndex requester, const ObstacleId& obstacle) const {
  for (const auto& p : added) {
    if (p.requester == requester && p.obstacle == obstacle) return &p;
  }
  return nullptr;
}

Eigen::VectorXd CapabilityLedger::residual() const {
  Eigen::VectorXd delta = own;
  for (const auto& [j, c] : promised) delta -= c;
  return delta;
}

namespace {

double conversion_factor(double tau, TauMode mode) {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  return mode == TauMode::printed ? tau : 1.0 / tau;
}

}  // namespace

Polytope convert_velocity_constraints(const Polytope& velocity_set, double tau, TauMode mode) {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  const double scale = mode == TauMode::printed ? 1.0 / tau : tau;
  return Polytope(velocity_set.G * scale, velocity_set.l);
}

Halfspace convert_velocity_halfspace(const Vec2& direction, double amount, double tau, TauMode mode) {
  return Halfspace{direction, conversion_factor(tau, mode) * amount};
}

DeficitReport compute_deficit(const SafetySystem& system, const LpResult& lp) {
  DeficitReport rep;
  rep.capability = system.q() + system.B() * lp.u_star;
  rep.deficit = (-rep.capability).cwiseMax(0.0);
  return rep;
}

Allocation allocate_requests(AgentIndex from, const Eigen::VectorXd& deficit, const SafetySystem& system) {
  Allocation out;
  std::vector<RequestMsg> per_neighbor(system.neighbors.size());
  for (std::size_t s = 0; s < system.neighbors.size(); ++s) {
    per_neighbor[s].from = from;
    per_neighbor[s].to = system.neighbors[s];
  }
  for (std::size_t k = 0; k < system.rows.size(); ++k) {
    const double need = deficit[static_cast<Index>(k)];
    if (!(need > 0.0)) continue;
    const SafetyRow& row = system.rows[k];
    double total = 0.0;
    for (const Vec2& a : row.neighbor_effects) total += a.norm();
    if (total <= 1e-12) {
      out.unservable.push_back(row.obstacle);
      continue;
    }
    for (std::size_t s = 0; s < system.neighbors.size(); ++s) {
      const double norm = row.neighbor_effects[s].norm();
      if (norm <= 0.0) continue;
      per_neighbor[s].rows.push_back(RequestRow{row.obstacle, row.neighbor_effects[s], need * norm / total});
    }
  }
  for (auto& msg : per_neighbor) {
    if (!msg.rows.empty()) out.requests.push_back(std::move(msg));
  }
  return out;
}

namespace {

struct PendingRow {
  AgentIndex requester;
  RequestRow row;
  double previous;  // already promised for this (requester, obstacle)
};

// max lambda in [0, 1] over u in own_set, optionally with first-order rows.
LpSolution compromise_lp(const ConstrainedSet& own_set, const std::vector<PendingRow>& pending,
                         std::span<const Halfspace> first_order, double factor) {
  const Polytope own = own_set.polytope();
  const Index own_rows = own.G.rows();
  const Index req_rows = static_cast<Index>(pending.size());
  const Index fo_rows = static_cast<Index>(first_order.size());
  LinearProgram lp;
  lp.cost = Eigen::Vector3d(-1.0, 0.0, 0.0);
  lp.A = Eigen::MatrixXd::Zero(own_rows + req_rows + fo_rows + 2, 3);
  lp.b = Eigen::VectorXd::Zero(lp.A.rows());
  Index r = 0;
  for (Index k = 0; k < own_rows; ++k, ++r) {
    lp.A.block<1, 2>(r, 1) = own.G.row(k);
    lp.b[r] = own.l[k];
  }
  // direction . u >= factor (previous + lambda amount)
  for (const auto& p : pending) {
    lp.A(r, 0) = factor * p.row.amount;
    lp.A.block<1, 2>(r, 1) = -p.row.direction.transpose();
    lp.b[r] = -factor * p.previous;
    ++r;
  }
  for (const auto& h : first_order) {
    lp.A.block<1, 2>(r, 1) = -h.normal.transpose();
    lp.b[r] = -h.bound;
    ++r;
  }
  lp.A(r, 0) = 1.0;
  lp.b[r++] = 1.0;
  lp.A(r, 0) = -1.0;
  lp.b[r++] = 0.0;
  return solve_lp(lp);
}

}  // namespace

ProcessOutcome process_requests(AgentIndex self, const ConstrainedSet& own_set, std::span<const RequestMsg> incoming,
                                std::span<const Halfspace> first_order, double tau, TauMode mode) {
  ProcessOutcome out;
  out.updated = own_set;
  if (incoming.empty()) return out;

  const double factor = conversion_factor(tau, mode);
  std::vector<PendingRow> pending;
  for (const auto& msg : incoming) {
    for (const auto& row : msg.rows) {
      const Promise* existing = own_set.find(msg.from, row.obstacle);
      pending.push_back(PendingRow{msg.from, row, existing ? existing->amount : 0.0});
    }
  }

  // Even lambda = 0 asks for direction . u >= previous, so an infeasible LP
  // means nothing more can be promised without giving up the agent's own
  // rows. Own safety wins: grant zero.
  const LpSolution sol = compromise_lp(own_set, pending, first_order, factor);
  double lambda = 0.0;
  if (sol.status == LpStatus::optimal) {
    lambda = std::clamp(sol.x[0], 0.0, 1.0);
  } else if (compromise_lp(own_set, {}, {}, factor).status != LpStatus::optimal) {
    out.own_set_empty = true;
    spdlog::debug("agent {} cannot serve requests: own constraint set is empty", self);
  } else {
    out.blocked_by_first_order = true;
    spdlog::debug("agent {} cannot serve requests without breaking its own safety rows", self);
  }
  out.scale = lambda;

  std::map<AgentIndex, AdjustMsg> replies;
  for (const auto& p : pending) {
    auto& reply = replies[p.requester];
    reply.from = self;
    reply.to = p.requester;
    const double granted = lambda * p.row.amount;
    reply.grants.push_back(Grant{p.row.obstacle, granted});
    if (granted <= 0.0) continue;

    const double cumulative = p.previous + granted;
    const Halfspace accel = convert_velocity_halfspace(p.row.direction, cumulative, tau, mode);
    auto it = std::find_if(out.updated.added.begin(), out.updated.added.end(), [&](const Promise& q) {
      return q.requester == p.requester && q.obstacle == p.row.obstacle;
    });
    if (it == out.updated.added.end()) {
      out.updated.added.push_back(Promise{p.requester, p.row.obstacle, p.row.direction, cumulative, accel});
    } else {
      it->amount = cumulative;
      it->direction = p.row.direction;
      it->acceleration = accel;
    }
  }
  std::sort(out.updated.added.begin(), out.updated.added.end(), [](const Promise& a, const Promise& b) {
    return std::tie(a.requester, a.obstacle) < std::tie(b.requester, b.obstacle);
  });
  for (auto& [j, msg] : replies) out.adjustments.push_back(std::move(msg));
  return out;
}

ProtocolOutcome run_protocol(std::span<const CollabAgent> agents, const ProtocolOptions& options) {
  const std::size_t n = agents.size();
  ProtocolOutcome out;
  out.agents.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (agents[i].index != i) throw ConfigError("run_protocol: agents must be ordered by index");
    auto& st = out.agents[i];
    st.set.base = agents[i].base;
    const Index k = static_cast<Index>(agents[i].system.size());
    st.ledger.own = Eigen::VectorXd::Zero(k);
    for (AgentIndex j : agents[i].system.neighbors) st.ledger.promised[j] = Eigen::VectorXd::Zero(k);
  }

  for (int round = 1; round <= options.max_rounds; ++round) {
    out.rounds = round;

    // Maximum capability and residuals.
    bool all_safe = true;
    std::vector<Eigen::VectorXd> residuals(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& st = out.agents[i];
      const SafetySystem& sys = agents[i].system;
      st.capability = maxmin_capability(sys.B(), st.set.polytope());
      st.own_set_empty = st.capability.status == LpStatus::infeasible;
      LpResult usable = st.capability;
      if (usable.status != LpStatus::optimal) usable.u_star = Vec2::Zero();
      st.ledger.own = compute_deficit(sys, usable).capability;
      residuals[i] = st.ledger.residual();
      if (residuals[i].size() > 0 && residuals[i].minCoeff() < -kLedgerTolerance) all_safe = false;
    }

    // Send requests.
    std::vector<std::vector<RequestMsg>> inbox(n);
    bool any_request = false;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd deficit = (-residuals[i]).cwiseMax(0.0);
      for (Index k = 0; k < deficit.size(); ++k) {
        if (deficit[k] <= kLedgerTolerance) deficit[k] = 0.0;
      }
      Allocation alloc = allocate_requests(i, deficit, agents[i].system);
      out.agents[i].unservable = out.agents[i].unservable || !alloc.unservable.empty();
      for (auto& msg : alloc.requests) {
        any_request = true;
        if (options.record_trace) out.trace.push_back(TraceEntry{round, msg});
        inbox.at(msg.to).push_back(std::move(msg));
      }
    }
    if (any_request) ++out.request_rounds;

    // Process requests.
    std::vector<AdjustMsg> adjustments;
    for (std::size_t j = 0; j < n; ++j) {
      if (inbox[j].empty()) continue;
      ProcessOutcome po = process_requests(j, out.agents[j].set, inbox[j], agents[j].first_order, options.tau,
                                           options.tau_mode);
      out.agents[j].set = std::move(po.updated);
      for (auto& adj : po.adjustments) adjustments.push_back(std::move(adj));
    }

    // Receive adjustments.
    bool changed = false;
    for (const auto& adj : adjustments) {
      if (options.record_trace) out.trace.push_back(TraceEntry{round, adj});
      auto& st = out.agents[adj.to];
      const SafetySystem& sys = agents[adj.to].system;
      auto& entry = st.ledger.promised.at(adj.from);
      for (const auto& g : adj.grants) {
        for (std::size_t k = 0; k < sys.rows.size(); ++k) {
          if (sys.rows[k].obstacle == g.obstacle) {
            entry[static_cast<Index>(k)] -= g.granted;
            if (g.granted > kLedgerTolerance) changed = true;
          }
        }
      }
    }

    if (!changed && all_safe) {
      out.converged = true;
      break;
    }
  }
  return out;
}

std::string to_string(FilterLevel level) {
  switch (level) {
    case FilterLevel::full: return "full";
    case FilterLevel::own_only: return "own_only";
    case FilterLevel::survival: return "survival";
  }
  return "unknown";
}

FilterChoice choose_filter(const Vec2& center, std::span<const Halfspace> first_order, const ConstrainedSet& set) {
  std::vector<Halfspace> rows(first_order.begin(), first_order.end());
  for (const auto& h : set.halfspaces()) rows.push_back(h);
  QpResult qp = qp_safety_filter(center, rows, set.base);
  if (qp.status == QpStatus::optimal) return FilterChoice{qp.u_s, FilterLevel::full};

  qp = qp_safety_filter(center, first_order, set.base);
  if (qp.status == QpStatus::optimal) return FilterChoice{qp.u_s, FilterLevel::own_only};

  // max t s.t. c_k . u - d_k >= t, u in base.
  const Index base_rows = set.base.G.rows();
  const Index k = static_cast<Index>(first_order.size());
  LinearProgram lp;
  lp.cost = Eigen::Vector3d(-1.0, 0.0, 0.0);
  lp.A = Eigen::MatrixXd::Zero(base_rows + k, 3);
  lp.b = Eigen::VectorXd::Zero(base_rows + k);
  lp.A.block(0, 1, base_rows, 2) = set.base.G;
  lp.b.head(base_rows) = set.base.l;
  for (Index r = 0; r < k; ++r) {
    const Halfspace& h = first_order[static_cast<std::size_t>(r)];
    const double norm = std::max(h.normal.norm(), 1e-12);
    lp.A(base_rows + r, 0) = 1.0;
    lp.A.block<1, 2>(base_rows + r, 1) = -h.normal.transpose() / norm;
    lp.b[base_rows + r] = -h.bound / norm;
  }
  const LpSolution sol = solve_lp(lp);
  FilterChoice choice;
  choice.level = FilterLevel::survival;
  if (sol.status == LpStatus::optimal) {
    choice.u_s = sol.x.tail<2>();
  } else {
    // Empty base set cannot happen for a positive control limit; keep u^s at
    // the base center so the clip in the engine still bounds the result.
    choice.u_s = set.base.rows() == 4 ? Vec2(0.5 * (set.base.l[0] - set.base.l[1]), 0.5 * (set.base.l[2] - set.base.l[3]))
                                      : Vec2::Zero();
  }
  return choice;
}

namespace {

// phi1 and its drift are symmetric in a pair with equal alpha0 and alpha1, so
// two halves enforced by the two agents add up to the full condition.
bool shares_pair_row(const Scenario& scenario, AgentIndex i, const Obstacle& obs) {
  if (scenario.pair_rows != PairRows::shared || obs.id.kind != ObstacleKind::agent) return false;
  const Gains& a = scenario.gains.at(i);
  const Gains& b = scenario.gains.at(obs.id.index);
  return a.alpha0 == b.alpha0 && a.alpha1 == b.alpha1;
}

}  // namespace

TickOutcome run_tick(const States& states, const Scenario& scenario, double t, bool record_trace) {
  ensure_logging();
  const std::size_t n = states.size();
  const FormationParams params = FormationParams::from(scenario);
  TickOutcome out;
  out.agents.resize(n);

  std::vector<CollabAgent> inputs(n);
  for (AgentIndex i = 0; i < n; ++i) {
    auto& dec = out.agents[i];
    dec.u_f = formation_control(states, scenario.graph, i, params);
    dec.sensed = sensed_obstacles(scenario, states, i, t);
    const Gains& gains = scenario.gains.at(i);
    for (const auto& obs : dec.sensed) {
      Halfspace row = first_order_constraint(states, scenario.graph, i, obs, gains, params);
      if (shares_pair_row(scenario, i, obs)) row.bound *= 0.5;
      dec.first_order.push_back(row);
    }
    inputs[i].index = i;
    inputs[i].system = assemble(states, scenario.graph, i, dec.sensed, gains, params);
    inputs[i].base = Polytope::box(dec.u_f, scenario.control_limit);
    inputs[i].first_order = dec.first_order;
  }

  ProtocolOptions opts;
  opts.tau = scenario.tau;
  opts.tau_mode = scenario.tau_mode;
  opts.max_rounds = scenario.max_rounds;
  opts.record_trace = record_trace;
  out.protocol = run_protocol(inputs, opts);

  for (AgentIndex i = 0; i < n; ++i) {
    auto& dec = out.agents[i];
    dec.set = out.protocol.agents[i].set;
    const Vec2 center = scenario.objective == Objective::minimal ? Vec2::Zero() : dec.u_f;
    const FilterChoice choice = choose_filter(center, dec.first_order, dec.set);
    dec.u_s = choice.u_s;
    dec.level = choice.level;
    if (choice.degraded()) {
      spdlog::info("t={:.3f} agent {}: safety filter degraded to {}", t, i, to_string(choice.level));
    }
  }
  return out;
}

}  // namespace swarmsafe
