#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace swarmsafe {

using Vec2 = Eigen::Vector2d;
using AgentIndex = std::size_t;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two agents whose spring length collapsed below the coincidence threshold.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(AgentIndex i, AgentIndex j);
  AgentIndex first() const { return i_; }
  AgentIndex second() const { return j_; }

 private:
  AgentIndex i_;
  AgentIndex j_;
};

inline constexpr double kCoincidenceThreshold = 1e-9;

bool is_finite(const Vec2& v);

struct AgentState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();

  bool finite() const { return is_finite(position) && is_finite(velocity); }
};

using States = std::vector<AgentState>;

enum class ObstacleKind { fixed, agent };

/// Static obstacles sort before agents; within a kind, by index.
struct ObstacleId {
  ObstacleKind kind = ObstacleKind::fixed;
  std::size_t index = 0;

  auto operator<=>(const ObstacleId&) const = default;
  std::string str() const;
};

struct Obstacle {
  ObstacleId id;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double radius_margin = 1.0;
};

struct SpringParams {
  double stiffness = 3.0;    // N/m
  double damping = 1.0;      // N s/m
  double rest_length = 3.0;  // m
};

/// Directed spring arcs between agents. A well-formed graph holds both
/// arcs of every edge; validate() reports graphs that do not.
class FormationGraph {
 public:
  explicit FormationGraph(std::size_t agent_count = 0);

  static FormationGraph complete(std::size_t agent_count, const SpringParams& params);

  /// Adds (i, j) and (j, i).
  void add_edge(AgentIndex i, AgentIndex j, const SpringParams& params);
  /// Adds (i, j) only.
  void add_arc(AgentIndex i, AgentIndex j, const SpringParams& params);

  std::size_t agent_count() const { return agent_count_; }

  /// Sorted ascending, excludes i. Throws ConfigError for i out of range.
  std::vector<AgentIndex> neighbors(AgentIndex i) const;
  const SpringParams& spring(AgentIndex i, AgentIndex j) const;
  bool has_arc(AgentIndex i, AgentIndex j) const;

  const std::map<std::pair<AgentIndex, AgentIndex>, SpringParams>& arcs() const { return arcs_; }

 private:
  std::size_t agent_count_;
  std::map<std::pair<AgentIndex, AgentIndex>, SpringParams> arcs_;
};

std::vector<AgentIndex> neighbors(const FormationGraph& graph, AgentIndex i);

struct Gains {
  double alpha0 = 1.0;  // 1/s
  double alpha1 = 1.0;
  double alpha2 = 1.0;

  double beta() const { return alpha1 + alpha2; }
};

/// Convex set {u : G u - l <= 0}.
struct Polytope {
  Eigen::MatrixXd G;
  Eigen::VectorXd l;

  Polytope() = default;
  Polytope(Eigen::MatrixXd g, Eigen::VectorXd limits);

  /// {u : ||u - center||_inf <= half_width}; rows ordered +x, -x, +y, -y.
  static Polytope box(const Vec2& center, double half_width);

  std::size_t rows() const { return static_cast<std::size_t>(G.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(G.cols()); }
  bool contains(const Eigen::VectorXd& u, double tol = 1e-9) const;
  bool finite() const;
};

/// normal . u >= bound
struct Halfspace {
  Vec2 normal = Vec2::Zero();
  double bound = 0.0;

  double slack(const Vec2& u) const { return normal.dot(u) - bound; }
};

enum class SpringSign { restoring, paper_literal };
enum class Objective { minimal, paper_literal };
enum class TauMode { printed, kinematic };
/// How two agents that sense each other split the first-order row between them.
enum class PairRows { shared, full };

std::string to_string(SpringSign s);
std::string to_string(Objective o);
std::string to_string(TauMode m);
std::string to_string(PairRows p);

struct Scenario {
  FormationGraph graph;
  States initial_states;
  std::vector<Obstacle> obstacles;
  std::vector<double> masses;
  std::vector<Gains> gains;
  std::map<AgentIndex, Vec2> leader_inputs;

  double sensing_radius = 5.0;
  double control_limit = 15.0;
  double agent_margin = 1.0;
  std::map<std::pair<AgentIndex, AgentIndex>, double> agent_margin_overrides;

  double tau = 1.0;
  double dt = 0.01;
  double duration = 30.0;
  int max_rounds = 10;

  SpringSign spring_sign = SpringSign::restoring;
  Objective objective = Objective::minimal;
  TauMode tau_mode = TauMode::printed;
  PairRows pair_rows = PairRows::shared;

  std::size_t agent_count() const { return initial_states.size(); }
  /// Minimum separation between agents i and j.
  double margin_between(AgentIndex i, AgentIndex j) const;
  Vec2 leader_input(AgentIndex i) const;
};

/// Static obstacles (by id) then other agents (by index) within the sensing
/// radius of agent i, agents carrying their live velocity.
std::vector<Obstacle> sensed_obstacles(const Scenario& scenario, const States& states, AgentIndex i,
                                       double t = 0.0);

struct Violation {
  std::string field;
  std::string message;
};

/// Empty iff the scenario is runnable.
std::vector<Violation> validate(const Scenario& scenario);

}  // namespace swarmsafe
