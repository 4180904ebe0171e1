#include "swarmsafe/output.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace swarmsafe {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

namespace {

// Non-finite numbers have no JSON spelling; they become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vec(const Vec2& v) { return json::array({number(v.x()), number(v.y())}); }

json payload(const RequestMsg& m) {
  json rows = json::array();
  for (const auto& r : m.rows) {
    rows.push_back({{"obstacle", r.obstacle.str()}, {"direction", vec(r.direction)}, {"amount", number(r.amount)}});
  }
  return {{"rows", rows}};
}

json payload(const AdjustMsg& m) {
  json grants = json::array();
  for (const auto& g : m.grants) grants.push_back({{"obstacle", g.obstacle.str()}, {"granted", number(g.granted)}});
  return {{"grants", grants}};
}

std::ofstream open(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const RunResult& result) {
  out << kTrajectoryHeader << '\n';
  for (const auto& rec : result.records) {
    // t is rebuilt from the tick so that 0.1 + 0.2 noise never reaches the file.
    const std::string t = fmt::format("{:.10g}", rec.t);
    for (std::size_t i = 0; i < rec.agents.size(); ++i) {
      const AgentRecord& a = rec.agents[i];
      out << t << ',' << i << ',' << format_number(a.state.position.x()) << ','
          << format_number(a.state.position.y()) << ',' << format_number(a.state.velocity.x()) << ','
          << format_number(a.state.velocity.y()) << ',' << format_number(a.u_f.x()) << ','
          << format_number(a.u_f.y()) << ',' << format_number(a.u_s.x()) << ',' << format_number(a.u_s.y())
          << ',' << format_number(a.min_h) << ',' << rec.rounds << '\n';
    }
  }
}

json metrics_json(const Scenario& scenario, const RunResult& result) {
  const RunMetrics& m = result.metrics;
  json per_agent = json::array();
  for (double h : m.min_h_per_agent) per_agent.push_back(number(h));
  json displacement = json::array();
  for (const auto& d : m.displacement) displacement.push_back(vec(d));
  json leaders = json::array();
  for (const auto& [i, u] : scenario.leader_inputs) leaders.push_back(i);
  json final_states = json::array();
  for (const auto& s : result.final_states) final_states.push_back({{"pos", vec(s.position)}, {"vel", vec(s.velocity)}});

  return json{
      {"agents", scenario.agent_count()},
      {"obstacles", scenario.obstacles.size()},
      {"dt", scenario.dt},
      {"duration", scenario.duration},
      {"ticks", m.ticks},
      {"min_h", number(m.min_h)},
      {"min_h_per_agent", per_agent},
      {"max_rounds_used", m.max_rounds_used},
      {"max_request_rounds", m.max_request_rounds},
      {"convergence_failures", m.convergence_failures},
      {"safety_degraded", m.degraded_events},
      {"clip_events", m.clip_events},
      {"unservable_events", m.unservable_events},
      {"empty_set_events", m.empty_set_events},
      {"control_limit", scenario.control_limit},
      {"max_applied_control", number(m.max_applied)},
      {"leaders", leaders},
      {"displacement", displacement},
      {"final_states", final_states},
  };
}

void write_trace_jsonl(std::ostream& out, const RunResult& result) {
  for (const auto& tt : result.trace) {
    json line;
    line["tick"] = tt.tick;
    line["round"] = tt.entry.round;
    std::visit(
        [&](const auto& msg) {
          using T = std::decay_t<decltype(msg)>;
          line["kind"] = std::is_same_v<T, RequestMsg> ? "request" : "adjust";
          line["from"] = msg.from;
          line["to"] = msg.to;
          line["payload"] = payload(msg);
        },
        tt.entry.message);
    out << line.dump() << '\n';
  }
}

OutputPaths write_outputs(const std::filesystem::path& out_dir, const Scenario& scenario, const RunResult& result,
                          bool trace) {
  std::filesystem::create_directories(out_dir);
  OutputPaths paths{out_dir / "trajectory.csv", out_dir / "metrics.json", {}};
  {
    auto f = open(paths.csv);
    write_trajectory_csv(f, result);
  }
  {
    auto f = open(paths.metrics);
    f << metrics_json(scenario, result).dump(2) << '\n';
  }
  if (trace) {
    paths.trace = out_dir / "trace.jsonl";
    auto f = open(paths.trace);
    write_trace_jsonl(f, result);
  }
  return paths;
}

}  // namespace swarmsafe
