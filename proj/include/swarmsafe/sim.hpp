#pragma once

#include "swarmsafe/collab.hpp"
#include "swarmsafe/formation.hpp"
#include "swarmsafe/model.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace swarmsafe {

/// Module failure during a run, tagged with the tick it happened on.
class RunError : public std::runtime_error {
 public:
  RunError(std::size_t tick, double t, const std::string& what);
  std::size_t tick() const { return tick_; }

 private:
  std::size_t tick_;
};

struct BarrierSample {
  ObstacleId obstacle;
  double h = 0.0;
  double phi1 = 0.0;
};

struct AgentRecord {
  AgentState state;
  Vec2 u_f = Vec2::Zero();
  Vec2 u_s = Vec2::Zero();      // after clipping; u_f - u_s is what was applied
  Vec2 applied = Vec2::Zero();
  FilterLevel level = FilterLevel::full;
  bool clipped = false;
  bool unservable = false;
  bool own_set_empty = false;
  std::vector<BarrierSample> barriers;  // every static obstacle, then every other agent
  double min_h = 0.0;
};

struct TickRecord {
  std::size_t tick = 0;
  double t = 0.0;
  std::vector<AgentRecord> agents;
  int rounds = 0;
  int request_rounds = 0;
  bool converged = true;

  double min_h() const;
};

struct TickTrace {
  std::size_t tick = 0;
  TraceEntry entry;
};

struct RunMetrics {
  std::size_t ticks = 0;
  double min_h = 0.0;
  std::vector<double> min_h_per_agent;
  int max_rounds_used = 0;
  int max_request_rounds = 0;
  int convergence_failures = 0;
  int degraded_events = 0;
  int clip_events = 0;
  int unservable_events = 0;
  int empty_set_events = 0;
  double max_applied = 0.0;  // max over ticks and agents of ||u_f - u_s||_inf
  std::vector<Vec2> displacement;  // final minus initial position, per agent
};

struct RunOptions {
  bool record_trace = false;
};

struct RunResult {
  std::vector<TickRecord> records;
  RunMetrics metrics;
  States final_states;
  std::vector<TickTrace> trace;
  double wall_seconds = 0.0;  // not part of the metrics document
};

/// One RK4 step of p' = v, v' = u^f(x) - u^s with u^s held.
States integrate_step(const States& states, const FormationGraph& graph, const FormationParams& params,
                      const std::vector<Vec2>& u_s, double dt);

/// h and phi1 of agent i against every static obstacle and every other agent.
std::vector<BarrierSample> barrier_samples(const Scenario& scenario, const States& states, AgentIndex i);

/// Number of ticks in a run: round(duration / dt).
std::size_t tick_count(const Scenario& scenario);

/// Throws ConfigError for an invalid scenario and RunError for failures
/// during the run.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

}  // namespace swarmsafe
