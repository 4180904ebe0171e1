#include "swarmsafe/scenario_io.hpp"

#define TOML_ENABLE_FORMATTERS 0
#include <toml.hpp>

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace swarmsafe {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path.empty() ? what : path + ": " + what);
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

double number(const toml::node& n, const std::string& path) {
  if (auto v = n.as_floating_point()) return v->get();
  if (auto v = n.as_integer()) return static_cast<double>(v->get());
  fail(path, "expected a number");
}

long long integer(const toml::node& n, const std::string& path) {
  if (auto v = n.as_integer()) return v->get();
  fail(path, "expected an integer");
}

std::size_t index(const toml::node& n, const std::string& path) {
  const long long v = integer(n, path);
  if (v < 0) fail(path, "expected a non-negative index");
  return static_cast<std::size_t>(v);
}

std::string text(const toml::node& n, const std::string& path) {
  if (auto v = n.as_string()) return v->get();
  fail(path, "expected a string");
}

Vec2 vec2(const toml::node& n, const std::string& path) {
  const toml::array* a = n.as_array();
  if (!a || a->size() != 2) fail(path, "expected an array of two numbers");
  return Vec2(number(*a->get(0), path + "[0]"), number(*a->get(1), path + "[1]"));
}

const toml::table& table(const toml::node& n, const std::string& path) {
  if (auto t = n.as_table()) return *t;
  fail(path, "expected a table");
}

const toml::array& array(const toml::node& n, const std::string& path) {
  if (auto a = n.as_array()) return *a;
  fail(path, "expected an array");
}

// Reads the keys of one table and rejects any it was not asked about.
class Section {
 public:
  Section(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

  const toml::node* get(std::string_view key) {
    seen_.insert(std::string(key));
    return t_.get(key);
  }
  std::string path(std::string_view key) const { return join(path_, key); }

  void number_into(std::string_view key, double& out) {
    if (auto n = get(key)) out = number(*n, path(key));
  }

  void finish() const {
    for (const auto& [k, v] : t_) {
      if (!seen_.count(std::string(k.str()))) fail(join(path_, k.str()), "unknown key");
    }
  }

 private:
  const toml::table& t_;
  std::string path_;
  std::set<std::string> seen_;
};

SpringSign spring_sign_from(const std::string& s, const std::string& path) {
  if (s == "restoring") return SpringSign::restoring;
  if (s == "paper_literal") return SpringSign::paper_literal;
  fail(path, "expected \"restoring\" or \"paper_literal\", got \"" + s + "\"");
}

Objective objective_from(const std::string& s, const std::string& path) {
  if (s == "minimal") return Objective::minimal;
  if (s == "paper_literal") return Objective::paper_literal;
  fail(path, "expected \"minimal\" or \"paper_literal\", got \"" + s + "\"");
}

TauMode tau_mode_from(const std::string& s, const std::string& path) {
  if (s == "printed") return TauMode::printed;
  if (s == "kinematic") return TauMode::kinematic;
  fail(path, "expected \"printed\" or \"kinematic\", got \"" + s + "\"");
}

PairRows pair_rows_from(const std::string& s, const std::string& path) {
  if (s == "shared") return PairRows::shared;
  if (s == "full") return PairRows::full;
  fail(path, "expected \"shared\" or \"full\", got \"" + s + "\"");
}

void read_sim(const toml::table& t, Scenario& s) {
  Section sec(t, "sim");
  sec.number_into("dt", s.dt);
  sec.number_into("duration", s.duration);
  sec.number_into("tau", s.tau);
  sec.number_into("sensing_radius", s.sensing_radius);
  sec.number_into("control_limit", s.control_limit);
  sec.number_into("agent_margin", s.agent_margin);
  if (auto n = sec.get("max_rounds")) {
    const long long r = integer(*n, sec.path("max_rounds"));
    s.max_rounds = static_cast<int>(std::clamp<long long>(r, -1, 1'000'000));
  }
  if (auto n = sec.get("spring_sign")) s.spring_sign = spring_sign_from(text(*n, "sim.spring_sign"), "sim.spring_sign");
  if (auto n = sec.get("objective")) s.objective = objective_from(text(*n, "sim.objective"), "sim.objective");
  if (auto n = sec.get("tau_mode")) s.tau_mode = tau_mode_from(text(*n, "sim.tau_mode"), "sim.tau_mode");
  if (auto n = sec.get("pair_rows")) s.pair_rows = pair_rows_from(text(*n, "sim.pair_rows"), "sim.pair_rows");
  sec.finish();
}

void read_gains(Section& sec, Gains& g) {
  sec.number_into("alpha0", g.alpha0);
  sec.number_into("alpha1", g.alpha1);
  sec.number_into("alpha2", g.alpha2);
}

SpringParams read_spring(Section& sec, SpringParams p) {
  sec.number_into("k", p.stiffness);
  sec.number_into("b", p.damping);
  sec.number_into("R", p.rest_length);
  return p;
}

void read_graph(const toml::table* t, Scenario& s) {
  const std::size_t n = s.agent_count();
  SpringParams defaults;
  const toml::node* edges = nullptr;
  if (t) {
    Section sec(*t, "graph");
    defaults = read_spring(sec, defaults);
    edges = sec.get("edges");
    sec.finish();
  }
  s.graph = FormationGraph(n);
  if (!edges || (edges->is_string() && text(*edges, "graph.edges") == "complete")) {
    s.graph = FormationGraph::complete(n, defaults);
    return;
  }
  if (edges->is_string()) fail("graph.edges", "expected \"complete\" or an array of edges");
  const toml::array& list = array(*edges, "graph.edges");
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string path = fmt::format("graph.edges.{}", k);
    const toml::node& e = *list.get(k);
    std::size_t i = 0;
    std::size_t j = 0;
    SpringParams p = defaults;
    if (const toml::array* pair = e.as_array()) {
      if (pair->size() != 2) fail(path, "expected [i, j]");
      i = index(*pair->get(0), path + "[0]");
      j = index(*pair->get(1), path + "[1]");
    } else {
      Section sec(table(e, path), path);
      const toml::node* ni = sec.get("i");
      const toml::node* nj = sec.get("j");
      if (!ni || !nj) fail(path, "edge needs i and j");
      i = index(*ni, sec.path("i"));
      j = index(*nj, sec.path("j"));
      p = read_spring(sec, p);
      sec.finish();
    }
    // Out-of-range or self-loop edges are kept so validate() can name them.
    s.graph.add_edge(i, j, p);
  }
}

void read_agents(const toml::node* node, const Gains& shared, Scenario& s) {
  if (!node) return;
  const toml::array& list = array(*node, "agents");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = fmt::format("agents.{}", i);
    Section sec(table(*list.get(i), path), path);
    AgentState st;
    const toml::node* pos = sec.get("pos");
    if (!pos) fail(path, "agent needs pos");
    st.position = vec2(*pos, sec.path("pos"));
    if (auto v = sec.get("vel")) st.velocity = vec2(*v, sec.path("vel"));
    double mass = 0.5;
    sec.number_into("mass", mass);
    if (auto u = sec.get("leader_input")) s.leader_inputs[i] = vec2(*u, sec.path("leader_input"));
    Gains g = shared;
    read_gains(sec, g);
    sec.finish();
    s.initial_states.push_back(st);
    s.masses.push_back(mass);
    s.gains.push_back(g);
  }
}

void read_obstacles(const toml::node* node, Scenario& s) {
  if (!node) return;
  const toml::array& list = array(*node, "obstacles");
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string path = fmt::format("obstacles.{}", k);
    Section sec(table(*list.get(k), path), path);
    Obstacle o;
    o.id = ObstacleId{ObstacleKind::fixed, k};
    const toml::node* pos = sec.get("pos");
    if (!pos) fail(path, "obstacle needs pos");
    o.position = vec2(*pos, sec.path("pos"));
    sec.number_into("margin", o.radius_margin);
    sec.finish();
    s.obstacles.push_back(o);
  }
}

void read_agent_margins(const toml::node* node, Scenario& s) {
  if (!node) return;
  const toml::array& list = array(*node, "agent_margins");
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string path = fmt::format("agent_margins.{}", k);
    Section sec(table(*list.get(k), path), path);
    const toml::node* ni = sec.get("i");
    const toml::node* nj = sec.get("j");
    const toml::node* nm = sec.get("margin");
    if (!ni || !nj || !nm) fail(path, "needs i, j and margin");
    const std::size_t i = index(*ni, sec.path("i"));
    const std::size_t j = index(*nj, sec.path("j"));
    s.agent_margin_overrides[{std::min(i, j), std::max(i, j)}] = number(*nm, sec.path("margin"));
    sec.finish();
  }
}

// Parses the right-hand side of an override. Bare words are read as strings
// so that `sim.tau_mode=kinematic` works without shell quoting.
toml::table override_value(const Override& o) {
  try {
    return toml::parse("v = " + o.value);
  } catch (const toml::parse_error&) {
    toml::table t;
    t.insert("v", o.value);
    return t;
  }
}

void apply_override(toml::table& root, const Override& o) {
  std::vector<std::string> parts;
  std::stringstream ss(o.key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) fail(o.key, "malformed override key");
    parts.push_back(part);
  }
  if (parts.empty()) fail(o.key, "malformed override key");

  const toml::table value_doc = override_value(o);
  const toml::node& value = *value_doc.get("v");

  toml::node* cur = &root;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const bool last = k + 1 == parts.size();
    const std::string& part = parts[k];
    if (toml::table* t = cur->as_table()) {
      if (last) {
        value.visit([&](const auto& v) { t->insert_or_assign(part, v); });
        return;
      }
      // Missing sections are created; the schema pass then reports them.
      if (!t->contains(part)) t->insert(part, toml::table{});
      cur = t->get(part);
    } else if (toml::array* a = cur->as_array()) {
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), idx);
      if (ec != std::errc() || ptr != part.data() + part.size() || idx >= a->size()) {
        fail(o.key, "no array element '" + part + "'");
      }
      if (last) {
        value.visit([&](const auto& v) { a->replace(a->cbegin() + static_cast<std::ptrdiff_t>(idx), v); });
        return;
      }
      cur = a->get(idx);
    } else {
      fail(o.key, "'" + part + "' is not inside a table or array");
    }
  }
}

}  // namespace

Override parse_override(std::string_view text_in) {
  const auto eq = text_in.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ParseError("override '" + std::string(text_in) + "' is not of the form key=value");
  }
  return Override{std::string(text_in.substr(0, eq)), std::string(text_in.substr(eq + 1))};
}

Scenario parse_scenario(std::string_view toml_text, const std::vector<Override>& overrides, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    throw ParseError(fmt::format("{}:{}:{}: {}", source, e.source().begin.line, e.source().begin.column,
                                 e.description()));
  }
  for (const auto& o : overrides) apply_override(root, o);

  Scenario s;
  Section top(root, "");
  if (auto n = top.get("sim")) read_sim(table(*n, "sim"), s);
  Gains shared;
  if (auto n = top.get("gains")) {
    Section sec(table(*n, "gains"), "gains");
    read_gains(sec, shared);
    sec.finish();
  }
  read_agents(top.get("agents"), shared, s);
  const toml::node* graph = top.get("graph");
  read_graph(graph ? &table(*graph, "graph") : nullptr, s);
  read_obstacles(top.get("obstacles"), s);
  read_agent_margins(top.get("agent_margins"), s);
  top.finish();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<Override>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), overrides, path.string());
}

}  // namespace swarmsafe
