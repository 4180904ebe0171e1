#include "swarmsafe/sim.hpp"

#include "swarmsafe/barrier.hpp"
#include "swarmsafe/log.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace swarmsafe {

RunError::RunError(std::size_t tick, double t, const std::string& what)
    : std::runtime_error(fmt::format("tick {} (t={:.4f} s): {}", tick, t, what)), tick_(tick) {}

double TickRecord::min_h() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : agents) m = std::min(m, a.min_h);
  return m;
}

namespace {

struct Derivative {
  std::vector<Vec2> dp;
  std::vector<Vec2> dv;
};

Derivative derivative(const States& s, const FormationGraph& graph, const FormationParams& params,
                      const std::vector<Vec2>& u_s) {
  Derivative d;
  d.dp.resize(s.size());
  d.dv.resize(s.size());
  for (AgentIndex i = 0; i < s.size(); ++i) {
    d.dp[i] = s[i].velocity;
    d.dv[i] = apply_filter(formation_control(s, graph, i, params), u_s[i]);
  }
  return d;
}

States advance(const States& s, const Derivative& d, double h) {
  States out = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i].position += h * d.dp[i];
    out[i].velocity += h * d.dv[i];
  }
  return out;
}

}  // namespace

States integrate_step(const States& states, const FormationGraph& graph, const FormationParams& params,
                      const std::vector<Vec2>& u_s, double dt) {
  if (!(dt > 0.0)) throw ConfigError("integrate_step: dt must be positive");
  if (u_s.size() != states.size()) throw ConfigError("integrate_step: one control per agent required");
  const Derivative k1 = derivative(states, graph, params, u_s);
  const Derivative k2 = derivative(advance(states, k1, 0.5 * dt), graph, params, u_s);
  const Derivative k3 = derivative(advance(states, k2, 0.5 * dt), graph, params, u_s);
  const Derivative k4 = derivative(advance(states, k3, dt), graph, params, u_s);
  States out = states;
  for (std::size_t i = 0; i < states.size(); ++i) {
    out[i].position += dt / 6.0 * (k1.dp[i] + 2.0 * k2.dp[i] + 2.0 * k3.dp[i] + k4.dp[i]);
    out[i].velocity += dt / 6.0 * (k1.dv[i] + 2.0 * k2.dv[i] + 2.0 * k3.dv[i] + k4.dv[i]);
  }
  return out;
}

std::vector<BarrierSample> barrier_samples(const Scenario& scenario, const States& states, AgentIndex i) {
  std::vector<BarrierSample> out;
  const double alpha0 = scenario.gains.at(i).alpha0;
  for (const auto& obs : scenario.obstacles) {
    out.push_back(BarrierSample{obs.id, barrier_value(states[i], obs), phi1(states[i], obs, alpha0)});
  }
  for (AgentIndex j = 0; j < states.size(); ++j) {
    if (j == i) continue;
    const Obstacle other{ObstacleId{ObstacleKind::agent, j}, states[j].position, states[j].velocity,
                         scenario.margin_between(i, j)};
    out.push_back(BarrierSample{other.id, barrier_value(states[i], other), phi1(states[i], other, alpha0)});
  }
  return out;
}

std::size_t tick_count(const Scenario& scenario) {
  return static_cast<std::size_t>(std::llround(scenario.duration / scenario.dt));
}

RunResult run(const Scenario& scenario, const RunOptions& options) {
  ensure_logging();
  const auto violations = validate(scenario);
  if (!violations.empty()) {
    throw ConfigError(fmt::format("invalid scenario: {}: {}", violations.front().field, violations.front().message));
  }
  const auto started = std::chrono::steady_clock::now();

  const std::size_t n = scenario.agent_count();
  const std::size_t ticks = tick_count(scenario);
  const FormationParams params = FormationParams::from(scenario);
  const double limit = scenario.control_limit;

  RunResult result;
  RunMetrics& m = result.metrics;
  m.ticks = ticks;
  m.min_h = std::numeric_limits<double>::infinity();
  m.min_h_per_agent.assign(n, std::numeric_limits<double>::infinity());
  result.records.reserve(ticks);

  States states = scenario.initial_states;
  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * scenario.dt;
    TickRecord rec;
    rec.tick = k;
    rec.t = t;
    rec.agents.resize(n);
    std::vector<Vec2> u_s(n);
    try {
      const TickOutcome outcome = run_tick(states, scenario, t, options.record_trace);
      rec.rounds = outcome.protocol.rounds;
      rec.request_rounds = outcome.protocol.request_rounds;
      rec.converged = outcome.protocol.converged;
      for (const auto& entry : outcome.protocol.trace) result.trace.push_back(TickTrace{k, entry});

      for (AgentIndex i = 0; i < n; ++i) {
        const AgentDecision& dec = outcome.agents[i];
        AgentRecord& a = rec.agents[i];
        a.state = states[i];
        a.u_f = dec.u_f;
        a.level = dec.level;
        a.unservable = outcome.protocol.agents[i].unservable;
        a.own_set_empty = outcome.protocol.agents[i].own_set_empty;

        const Vec2 wanted = apply_filter(dec.u_f, dec.u_s);
        a.applied = wanted.cwiseMax(-limit).cwiseMin(limit);
        a.clipped = (a.applied - wanted).cwiseAbs().maxCoeff() > 1e-9;
        a.u_s = dec.u_f - a.applied;
        if (a.clipped) spdlog::debug("t={:.3f} agent {}: applied control clipped", t, i);
        u_s[i] = a.u_s;

        a.barriers = barrier_samples(scenario, states, i);
        a.min_h = std::numeric_limits<double>::infinity();
        for (const auto& b : a.barriers) a.min_h = std::min(a.min_h, b.h);
      }
      states = integrate_step(states, scenario.graph, params, u_s, scenario.dt);
    } catch (const std::exception& e) {
      throw RunError(k, t, e.what());
    }
    for (AgentIndex i = 0; i < n; ++i) {
      if (!states[i].finite()) throw RunError(k, t, fmt::format("agent {} state is not finite", i));
    }

    m.max_rounds_used = std::max(m.max_rounds_used, rec.rounds);
    m.max_request_rounds = std::max(m.max_request_rounds, rec.request_rounds);
    if (!rec.converged) ++m.convergence_failures;
    for (AgentIndex i = 0; i < n; ++i) {
      const AgentRecord& a = rec.agents[i];
      m.min_h_per_agent[i] = std::min(m.min_h_per_agent[i], a.min_h);
      m.min_h = std::min(m.min_h, a.min_h);
      m.max_applied = std::max(m.max_applied, a.applied.cwiseAbs().maxCoeff());
      if (a.level != FilterLevel::full) ++m.degraded_events;
      if (a.clipped) ++m.clip_events;
      if (a.unservable) ++m.unservable_events;
      if (a.own_set_empty) ++m.empty_set_events;
    }
    result.records.push_back(std::move(rec));
  }

  result.final_states = states;
  for (AgentIndex i = 0; i < n; ++i) {
    m.displacement.push_back(states[i].position - scenario.initial_states[i].position);
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace swarmsafe
