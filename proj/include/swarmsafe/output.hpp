#pragma once

#include "swarmsafe/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <string>

namespace swarmsafe {

inline constexpr const char* kTrajectoryHeader = "t,agent,px,py,vx,vy,ufx,ufy,usx,usy,min_h,rounds";

/// Shortest decimal that reads back to the same double; "inf", "-inf", "nan".
std::string format_number(double x);

/// One row per tick and agent. usx, usy are the filter action after clipping.
void write_trajectory_csv(std::ostream& out, const RunResult& result);

nlohmann::json metrics_json(const Scenario& scenario, const RunResult& result);

/// One JSON object per message: tick, round, kind, from, to, payload.
void write_trace_jsonl(std::ostream& out, const RunResult& result);

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path metrics;
  std::filesystem::path trace;  // empty unless requested
};

/// Writes trajectory.csv, metrics.json and, with trace set, trace.jsonl under
/// out_dir, creating it if needed.
OutputPaths write_outputs(const std::filesystem::path& out_dir, const Scenario& scenario, const RunResult& result,
                          bool trace);

}  // namespace swarmsafe
