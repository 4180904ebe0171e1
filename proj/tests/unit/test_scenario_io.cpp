#include "swarmsafe/scenario_io.hpp"

#include <doctest.h>

#include <string>

using namespace swarmsafe;

namespace {

const char* kSmall = R"(
[sim]
dt = 0.02
duration = 2.0

[graph]
k = 2.0
edges = [[0, 1]]

[[agents]]
pos = [0.0, 0.0]
leader_input = [1.0, 0.0]

[[agents]]
pos = [-3.0, 0.0]
vel = [0.5, 0.0]
mass = 0.8
alpha1 = 2.0

[[obstacles]]
pos = [5.0, 1.0]
margin = 0.5
)";

std::string message_of(const std::string& text, const std::vector<Override>& o = {}) {
  try {
    parse_scenario(text, o, "t.toml");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("reads a small scenario") {
  const Scenario s = parse_scenario(kSmall);
  CHECK(s.dt == 0.02);
  CHECK(s.agent_count() == 2);
  CHECK(s.masses == std::vector<double>{0.5, 0.8});
  CHECK(s.gains[1].alpha1 == 2.0);
  CHECK(s.gains[0].alpha1 == 1.0);
  CHECK(s.leader_input(0) == Vec2(1, 0));
  CHECK(s.initial_states[1].velocity == Vec2(0.5, 0));
  CHECK(s.graph.spring(0, 1).stiffness == 2.0);
  CHECK(s.graph.spring(1, 0).rest_length == 3.0);
  REQUIRE(s.obstacles.size() == 1);
  CHECK(s.obstacles[0].radius_margin == 0.5);
  CHECK(validate(s).empty());
}

TEST_CASE("the shipped scenarios load and validate") {
  for (const char* name : {"reference.toml", "stress.toml"}) {
    const Scenario s = load_scenario(std::string(SWARMSAFE_SCENARIO_DIR) + "/" + name);
    CHECK(validate(s).empty());
    CHECK(s.agent_count() == 3);
  }
}

TEST_CASE("unknown keys and malformed text are parse errors") {
  CHECK(message_of(std::string(kSmall) + "\n[extra]\nx = 1\n").find("extra") != std::string::npos);
  CHECK(message_of("[sim]\ndt = 0.01\ndtt = 2\n[[agents]]\npos = [0.0, 0.0]\n").find("sim.dtt") !=
        std::string::npos);
  CHECK(message_of("[sim]\ndt = = 1\n").find("t.toml:") == 0);
  CHECK_FALSE(message_of("[sim]\ndt = \"fast\"\n[[agents]]\npos = [0.0, 0.0]\n").empty());
  CHECK_FALSE(message_of("[[agents]]\nvel = [0.0, 0.0]\n").empty());
  CHECK_FALSE(message_of(kSmall, {Override{"sim.nonsense", "1"}}).empty());
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.toml"), ParseError);
}

TEST_CASE("overrides apply before interpretation") {
  const Scenario s = parse_scenario(kSmall, {parse_override("sim.dt=0"), parse_override("agents.1.mass=2"),
                                             parse_override("sim.tau_mode=kinematic")});
  CHECK(s.dt == 0.0);
  CHECK(s.masses[1] == 2.0);
  CHECK(s.tau_mode == TauMode::kinematic);
  const auto v = validate(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "sim.dt");

  CHECK_THROWS_AS(parse_override("no-equals-sign"), ParseError);
  const Override o = parse_override("obstacles.0.pos=[1.5, 2]");
  CHECK(o.key == "obstacles.0.pos");
  CHECK(o.value == "[1.5, 2]");
}

TEST_CASE("edge forms") {
  const std::string head = "[[agents]]\npos = [0.0, 0.0]\n[[agents]]\npos = [3.0, 0.0]\n[[agents]]\npos = [0.0, 3.0]\n";
  CHECK(parse_scenario(head).graph.arcs().size() == 6);
  const Scenario t = parse_scenario(head + "[graph]\nedges = [{i = 0, j = 2, k = 5.0}]\n");
  CHECK(t.graph.arcs().size() == 2);
  CHECK(t.graph.spring(2, 0).stiffness == 5.0);
  CHECK_FALSE(message_of(head + "[graph]\nedges = \"ring\"\n").empty());
}

TEST_CASE("enumerated options") {
  const Scenario s = parse_scenario(R"(
[sim]
spring_sign = "paper_literal"
objective = "paper_literal"
pair_rows = "full"
[[agents]]
pos = [0.0, 0.0]
)");
  CHECK(s.spring_sign == SpringSign::paper_literal);
  CHECK(s.objective == Objective::paper_literal);
  CHECK(s.pair_rows == PairRows::full);
  CHECK(message_of("[sim]\nobjective = \"maximal\"\n[[agents]]\npos = [0.0, 0.0]\n").find("sim.objective") !=
        std::string::npos);
}

TEST_CASE("per-pair agent margins") {
  const Scenario s = parse_scenario(std::string(kSmall) + "\n[[agent_margins]]\ni = 1\nj = 0\nmargin = 0.3\n");
  CHECK(s.margin_between(0, 1) == 0.3);
}
