#include "fixtures.hpp"

#include "swarmsafe/output.hpp"
#include "swarmsafe/scenario_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace swarmsafe;
namespace fs = std::filesystem;

namespace {

Scenario busy() {
  Scenario s = fixtures::triangle(true);
  s.leader_inputs[0] = Vec2(5, 0);
  s.obstacles[0].position = Vec2(4.5, 0.4);
  s.duration = 3.0;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  return out;
}

}  // namespace

TEST_CASE("numbers round-trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2.0) == "-2");
  CHECK(format_number(INFINITY) == "inf");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(format_number(NAN) == "nan");
  const double x = 0.1 + 0.2;
  CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("trajectory CSV") {
  const Scenario s = busy();
  const RunResult r = run(s);
  std::ostringstream out;
  write_trajectory_csv(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,agent,px,py,vx,vy,ufx,ufy,usx,usy,min_h,rounds");

  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto cells = split(line, ',');
    REQUIRE(cells.size() == 12);
    const std::size_t tick = rows / 3;
    const AgentRecord& a = r.records[tick].agents[rows % 3];
    CHECK(std::stoul(cells[1]) == rows % 3);
    CHECK(std::stod(cells[2]) == a.state.position.x());
    CHECK(std::stod(cells[8]) == a.u_s.x());
    CHECK(std::stod(cells[10]) == a.min_h);
    CHECK(std::stoi(cells[11]) == r.records[tick].rounds);
    ++rows;
  }
  CHECK(rows == 3 * r.records.size());
}

TEST_CASE("metrics document") {
  const Scenario s = busy();
  const RunResult r = run(s);
  const nlohmann::json m = metrics_json(s, r);
  for (const char* key : {"agents", "ticks", "min_h", "min_h_per_agent", "max_rounds_used", "convergence_failures",
                          "safety_degraded", "clip_events", "max_applied_control", "displacement", "final_states"}) {
    CHECK(m.contains(key));
  }
  CHECK(m["agents"] == 3);
  CHECK(m["min_h"].get<double>() == r.metrics.min_h);
  CHECK(m["min_h_per_agent"].size() == 3);
  CHECK_FALSE(m.contains("wall_seconds"));
  CHECK(nlohmann::json::parse(m.dump()) == m);
}

TEST_CASE("message trace lines") {
  const Scenario s = busy();
  RunOptions o;
  o.record_trace = true;
  const RunResult r = run(s, o);
  std::ostringstream out;
  write_trace_jsonl(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"tick", "round", "kind", "from", "to", "payload"}) CHECK(j.contains(key));
    const std::string kind = j["kind"];
    CHECK((kind == "request" || kind == "adjust"));
    if (kind == "request") CHECK(j["payload"]["rows"][0].contains("amount"));
    ++n;
  }
  CHECK(n == r.trace.size());
}

TEST_CASE("outputs are byte-identical across runs and land in a fresh directory") {
  const Scenario s = load_scenario(std::string(SWARMSAFE_SCENARIO_DIR) + "/reference.toml",
                                   {parse_override("sim.duration=4")});
  const fs::path root = fs::temp_directory_path() / "swarmsafe_unit_output";
  fs::remove_all(root);
  RunOptions o;
  o.record_trace = true;
  const OutputPaths a = write_outputs(root / "a" / "deep", s, run(s, o), true);
  const OutputPaths b = write_outputs(root / "b", s, run(s, o), true);
  CHECK(fs::exists(a.csv));
  CHECK(slurp(a.csv) == slurp(b.csv));
  CHECK(slurp(a.metrics) == slurp(b.metrics));
  CHECK(slurp(a.trace) == slurp(b.trace));
  CHECK_FALSE(slurp(a.trace).empty());

  const OutputPaths quiet = write_outputs(root / "c", s, run(s), false);
  CHECK(quiet.trace.empty());
  CHECK_FALSE(fs::exists(root / "c" / "trace.jsonl"));
  fs::remove_all(root);
}
