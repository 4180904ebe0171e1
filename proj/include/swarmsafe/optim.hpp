#pragma once

#include "swarmsafe/model.hpp"

#include <limits>
#include <span>
#include <vector>

namespace swarmsafe {

inline constexpr double kSolverTolerance = 1e-8;

enum class LpStatus { optimal, infeasible, unbounded };
std::string to_string(LpStatus s);

/// min cost.x  s.t.  A x <= b, x free.
struct LinearProgram {
  Eigen::VectorXd cost;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Multipliers of A x <= b at the optimum (cost + A^T duals = 0).
  Eigen::VectorXd duals;
};

/// Dense two-phase simplex with Bland's rule. Ties broken by lowest index,
/// so identical inputs give identical vertices.
LpSolution solve_lp(const LinearProgram& lp);

struct LpResult {
  double gamma = 0.0;
  Vec2 u_star = Vec2::Zero();
  LpStatus status = LpStatus::infeasible;

  /// K = 0: no obstacle, so capability is unbounded.
  bool unconstrained() const { return status == LpStatus::optimal && gamma == std::numeric_limits<double>::infinity(); }
};

/// Epigraph form of max_{u in P} min_k [B u]_k over xi = (gamma, u):
///   min -gamma  s.t. [0 G; 1 -B] xi <= [l; 0].
LinearProgram maxmin_program(const Eigen::MatrixXd& B, const Polytope& constraints);

/// Max-min capability. K = 0 returns gamma = +inf with u* = 0.
LpResult maxmin_capability(const Eigen::MatrixXd& B, const Polytope& constraints);

enum class QpStatus { optimal, infeasible };
std::string to_string(QpStatus s);

struct QpResult {
  Vec2 u_s = Vec2::Zero();
  QpStatus status = QpStatus::infeasible;
  /// Indices into halfspaces followed by the box rows.
  std::vector<std::size_t> active_set;
  std::vector<double> multipliers;
};

/// Constraint list used by the QP: halfspaces first, then box rows as
/// -G_r . u >= -l_r.
std::vector<Halfspace> qp_constraints(std::span<const Halfspace> halfspaces, const Polytope& box);

/// min 1/2 ||u - center||^2 s.t. every halfspace and the box.
/// Goldfarb-Idnani dual active set; infeasibility is detected, not thrown.
QpResult qp_safety_filter(const Vec2& center, std::span<const Halfspace> halfspaces, const Polytope& box);

struct KktReport {
  bool applicable = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;

  double worst() const;
  bool satisfied(double tol = kSolverTolerance) const { return applicable && worst() <= tol; }
};

/// Residuals of an LP point. Multipliers are recomputed by non-negative
/// least squares over the constraints active at x, independently of the
/// simplex duals.
KktReport check_kkt(const LinearProgram& lp, const Eigen::VectorXd& x, LpStatus status);
KktReport check_kkt(const LpResult& result, const Eigen::MatrixXd& B, const Polytope& constraints);

/// Residuals of a QP result against its own problem.
KktReport check_kkt(const QpResult& result, const Vec2& center, std::span<const Halfspace> halfspaces,
                    const Polytope& box);

}  // namespace swarmsafe
