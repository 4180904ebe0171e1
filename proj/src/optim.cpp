#include "swarmsafe/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace swarmsafe {

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

std::string to_string(QpStatus s) { return s == QpStatus::optimal ? "optimal" : "infeasible"; }

namespace {

constexpr double kPivotTolerance = 1e-11;
constexpr double kReducedCostTolerance = 1e-11;

using Index = Eigen::Index;

// Dense simplex tableau. Rows [0, m) are constraints, row m holds reduced
// costs; the last column is the right-hand side (row m: -objective).
class Tableau {
 public:
  Tableau(Index rows, Index cols) : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)), basis_(rows, -1) {}

  Eigen::MatrixXd& data() { return t_; }
  Index rows() const { return t_.rows() - 1; }
  Index rhs() const { return t_.cols() - 1; }
  std::vector<Index>& basis() { return basis_; }

  void pivot(Index r, Index c) {
    t_.row(r) /= t_(r, c);
    for (Index i = 0; i < t_.rows(); ++i) {
      if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  // Zeroes reduced costs of basic columns.
  void price_out() {
    const Index m = rows();
    for (Index r = 0; r < m; ++r) {
      const Index b = basis_[static_cast<std::size_t>(r)];
      if (t_(m, b) != 0.0) t_.row(m) -= t_(m, b) * t_.row(r);
    }
  }

  enum class Outcome { optimal, unbounded };

  // Bland's rule over entering columns [0, allowed).
  Outcome minimize(Index allowed) {
    const Index m = rows();
    const std::size_t limit = 50000;
    for (std::size_t iter = 0; iter < limit; ++iter) {
      Index enter = -1;
      for (Index j = 0; j < allowed; ++j) {
        if (t_(m, j) < -kReducedCostTolerance) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Outcome::optimal;

      Index leave = -1;
      double best = 0.0;
      for (Index i = 0; i < m; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTolerance) continue;
        const double ratio = t_(i, rhs()) / a;
        if (leave < 0 || ratio < best - 1e-12 ||
            (ratio <= best + 1e-12 && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return Outcome::unbounded;
      pivot(leave, enter);
    }
    return Outcome::optimal;
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Index> basis_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  const Index n = lp.cost.size();
  const Index m = lp.A.rows();
  if (lp.A.cols() != n || lp.b.size() != m) throw ConfigError("solve_lp: inconsistent dimensions");

  LpSolution out;
  out.x = Eigen::VectorXd::Zero(n);
  out.duals = Eigen::VectorXd::Zero(m);

  // Columns: x+ [0, n), x- [n, 2n), slack [2n, 2n + m), artificials after.
  std::vector<Index> artificial_rows;
  for (Index r = 0; r < m; ++r) {
    if (lp.b[r] < 0.0) artificial_rows.push_back(r);
  }
  const Index structural = 2 * n + m;
  const Index cols = structural + static_cast<Index>(artificial_rows.size());
  Tableau tab(m, cols);
  auto& t = tab.data();

  std::size_t next_artificial = 0;
  for (Index r = 0; r < m; ++r) {
    const double sign = lp.b[r] < 0.0 ? -1.0 : 1.0;
    t.block(r, 0, 1, n) = sign * lp.A.row(r);
    t.block(r, n, 1, n) = -sign * lp.A.row(r);
    t(r, 2 * n + r) = sign;
    t(r, tab.rhs()) = sign * lp.b[r];
    if (sign < 0.0) {
      const Index col = structural + static_cast<Index>(next_artificial++);
      t(r, col) = 1.0;
      tab.basis()[static_cast<std::size_t>(r)] = col;
    } else {
      tab.basis()[static_cast<std::size_t>(r)] = 2 * n + r;
    }
  }

  if (!artificial_rows.empty()) {
    t.row(m).setZero();
    for (Index c = structural; c < cols; ++c) t(m, c) = 1.0;
    tab.price_out();
    tab.minimize(cols);
    const double infeasibility = -t(m, tab.rhs());
    const double scale = std::max(1.0, lp.b.cwiseAbs().maxCoeff());
    if (infeasibility > 1e-9 * scale) {
      out.status = LpStatus::infeasible;
      return out;
    }
    // Drive remaining artificials out of the basis where possible; rows with
    // no structural entry are redundant and keep a zero-valued artificial.
    for (Index r = 0; r < m; ++r) {
      if (tab.basis()[static_cast<std::size_t>(r)] < structural) continue;
      for (Index c = 0; c < structural; ++c) {
        if (std::abs(t(r, c)) > kPivotTolerance) {
          tab.pivot(r, c);
          break;
        }
      }
    }
  }

  t.row(m).setZero();
  t.block(m, 0, 1, n) = lp.cost.transpose();
  t.block(m, n, 1, n) = -lp.cost.transpose();
  tab.price_out();
  if (tab.minimize(structural) == Tableau::Outcome::unbounded) {
    out.status = LpStatus::unbounded;
    return out;
  }

  for (Index r = 0; r < m; ++r) {
    const Index b = tab.basis()[static_cast<std::size_t>(r)];
    if (b < n) {
      out.x[b] += t(r, tab.rhs());
    } else if (b < 2 * n) {
      out.x[b - n] -= t(r, tab.rhs());
    }
  }
  for (Index r = 0; r < m; ++r) out.duals[r] = t(m, 2 * n + r);
  out.objective = lp.cost.dot(out.x);
  out.status = LpStatus::optimal;
  return out;
}

LinearProgram maxmin_program(const Eigen::MatrixXd& B, const Polytope& constraints) {
  const Index k = B.rows();
  const Index p = constraints.G.rows();
  LinearProgram lp;
  lp.cost = Eigen::VectorXd::Zero(3);
  lp.cost[0] = -1.0;
  lp.A = Eigen::MatrixXd::Zero(p + k, 3);
  lp.b = Eigen::VectorXd::Zero(p + k);
  if (p > 0) {
    lp.A.block(0, 1, p, 2) = constraints.G;
    lp.b.head(p) = constraints.l;
  }
  lp.A.block(p, 0, k, 1).setOnes();
  lp.A.block(p, 1, k, 2) = -B;
  return lp;
}

LpResult maxmin_capability(const Eigen::MatrixXd& B, const Polytope& constraints) {
  LpResult out;
  if (B.rows() == 0) {
    out.status = LpStatus::optimal;
    out.gamma = std::numeric_limits<double>::infinity();
    return out;
  }
  const LpSolution sol = solve_lp(maxmin_program(B, constraints));
  out.status = sol.status;
  if (sol.status == LpStatus::optimal) {
    out.gamma = sol.x[0];
    out.u_star = sol.x.tail<2>();
  }
  return out;
}

std::vector<Halfspace> qp_constraints(std::span<const Halfspace> halfspaces, const Polytope& box) {
  std::vector<Halfspace> all(halfspaces.begin(), halfspaces.end());
  for (Index r = 0; r < box.G.rows(); ++r) {
    all.push_back(Halfspace{-box.G.row(r).transpose(), -box.l[r]});
  }
  return all;
}

QpResult qp_safety_filter(const Vec2& center, std::span<const Halfspace> halfspaces, const Polytope& box) {
  const std::vector<Halfspace> cons = qp_constraints(halfspaces, box);
  QpResult out;

  Vec2 x = center;
  std::vector<std::size_t> active;
  std::vector<double> mult;

  auto normalized_slack = [&](std::size_t j) {
    const double norm = cons[j].normal.norm();
    return norm > 0.0 ? cons[j].slack(x) / norm : cons[j].slack(x);
  };

  const std::size_t max_iter = 100 * (cons.size() + 1);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // Most violated constraint; lowest index on ties.
    std::size_t p = cons.size();
    double worst = -kSolverTolerance * 1e-1;
    for (std::size_t j = 0; j < cons.size(); ++j) {
      const double s = normalized_slack(j);
      if (s < worst) {
        worst = s;
        p = j;
      }
    }
    if (p == cons.size()) {
      out.status = QpStatus::optimal;
      out.u_s = x;
      out.active_set = active;
      out.multipliers = mult;
      return out;
    }
    if (cons[p].normal.norm() == 0.0) return out;  // 0 >= positive bound

    std::vector<double> mult_plus = mult;
    mult_plus.push_back(0.0);
    const Vec2 np = cons[p].normal;

    bool added = false;
    for (std::size_t inner = 0; inner < max_iter && !added; ++inner) {
      const Index q = static_cast<Index>(active.size());
      Vec2 z = np;
      Eigen::VectorXd r;
      if (q > 0) {
        Eigen::MatrixXd N(2, q);
        for (Index c = 0; c < q; ++c) N.col(c) = cons[active[static_cast<std::size_t>(c)]].normal;
        r = (N.transpose() * N).ldlt().solve(N.transpose() * np);
        z = np - N * r;
      }

      double t1 = std::numeric_limits<double>::infinity();
      Index drop = -1;
      for (Index c = 0; c < q; ++c) {
        if (r[c] > 1e-12) {
          const double ratio = mult_plus[static_cast<std::size_t>(c)] / r[c];
          if (ratio < t1) {
            t1 = ratio;
            drop = c;
          }
        }
      }
      double t2 = std::numeric_limits<double>::infinity();
      if (z.norm() > 1e-12 * np.norm()) t2 = -cons[p].slack(x) / z.dot(np);

      const double step = std::min(t1, t2);
      if (!std::isfinite(step)) {
        out.status = QpStatus::infeasible;
        return out;
      }
      if (std::isfinite(t2)) x += step * z;
      for (Index c = 0; c < q; ++c) mult_plus[static_cast<std::size_t>(c)] -= step * r[c];
      mult_plus.back() += step;

      if (t2 <= t1) {
        active.push_back(p);
        mult = mult_plus;
        added = true;
      } else {
        active.erase(active.begin() + drop);
        mult_plus.erase(mult_plus.begin() + drop);
      }
    }
    if (!added) break;
  }
  // Iteration limit: numerically stuck, report as infeasible.
  out.status = QpStatus::infeasible;
  return out;
}

double KktReport::worst() const {
  return std::max({primal_residual, dual_residual, stationarity, complementarity});
}

namespace {

// min ||target - sum_j lambda_j g_j|| over lambda >= 0, returned as the
// inf-norm of the residual. A conic combination needs at most dim
// generators, so enumerating subsets of that size with least squares is exact.
double conic_residual(const Eigen::VectorXd& target, const std::vector<Eigen::VectorXd>& gens) {
  const Index dim = target.size();
  double best = target.lpNorm<Eigen::Infinity>();
  const std::size_t count = gens.size();
  std::vector<std::size_t> subset;
  auto visit = [&](auto&& self, std::size_t start) -> void {
    if (!subset.empty()) {
      Eigen::MatrixXd M(dim, static_cast<Index>(subset.size()));
      for (std::size_t c = 0; c < subset.size(); ++c) M.col(static_cast<Index>(c)) = gens[subset[c]];
      const Eigen::VectorXd lambda = M.completeOrthogonalDecomposition().solve(target);
      if ((lambda.array() >= -1e-12).all()) {
        best = std::min(best, (target - M * lambda).lpNorm<Eigen::Infinity>());
      }
    }
    if (static_cast<Index>(subset.size()) == dim) return;
    for (std::size_t j = start; j < count; ++j) {
      subset.push_back(j);
      self(self, j + 1);
      subset.pop_back();
    }
  };
  visit(visit, 0);
  return best;
}

}  // namespace

KktReport check_kkt(const LinearProgram& lp, const Eigen::VectorXd& x, LpStatus status) {
  KktReport rep;
  if (status != LpStatus::optimal || x.size() != lp.cost.size() || !x.allFinite()) return rep;
  rep.applicable = true;
  const Eigen::VectorXd slack = lp.b - lp.A * x;
  rep.primal_residual = slack.size() > 0 ? std::max(0.0, -slack.minCoeff()) : 0.0;
  std::vector<Eigen::VectorXd> gens;
  for (Index r = 0; r < lp.A.rows(); ++r) {
    const double scale = std::max(1.0, std::abs(lp.b[r]));
    if (std::abs(slack[r]) <= kSolverTolerance * scale) gens.push_back(lp.A.row(r).transpose());
  }
  rep.stationarity = conic_residual(-lp.cost, gens);
  return rep;
}

KktReport check_kkt(const LpResult& result, const Eigen::MatrixXd& B, const Polytope& constraints) {
  if (result.status != LpStatus::optimal || B.rows() == 0) return KktReport{};
  Eigen::VectorXd x(3);
  x << result.gamma, result.u_star;
  return check_kkt(maxmin_program(B, constraints), x, result.status);
}

KktReport check_kkt(const QpResult& result, const Vec2& center, std::span<const Halfspace> halfspaces,
                    const Polytope& box) {
  KktReport rep;
  if (result.status != QpStatus::optimal) return rep;
  rep.applicable = true;
  const std::vector<Halfspace> cons = qp_constraints(halfspaces, box);
  for (const auto& c : cons) rep.primal_residual = std::max(rep.primal_residual, -c.slack(result.u_s));
  Vec2 grad = result.u_s - center;
  for (std::size_t k = 0; k < result.active_set.size(); ++k) {
    const double mu = result.multipliers[k];
    const Halfspace& c = cons[result.active_set[k]];
    grad -= mu * c.normal;
    rep.dual_residual = std::max(rep.dual_residual, -mu);
    rep.complementarity = std::max(rep.complementarity, std::abs(mu * c.slack(result.u_s)));
  }
  rep.stationarity = grad.lpNorm<Eigen::Infinity>();
  return rep;
}

}  // namespace swarmsafe
