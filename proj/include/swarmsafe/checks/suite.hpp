#pragma once

#include "swarmsafe/model.hpp"

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace swarmsafe::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

using LieG = std::function<Vec2(const AgentState&, const Obstacle&)>;

struct SuiteOptions {
  std::uint64_t seed = 20251016;
  /// The sensitivity of phi1 to agent i's filter as used by the derivative
  /// checks. Replaced to show that the checks catch a wrong sign.
  LieG lie_g;

  SuiteOptions();
};

/// Replaces lie_g with its negation.
SuiteOptions with_sign_mutation(SuiteOptions options);

CheckResult check_lp_oracle(const SuiteOptions& options, int instances = 100);
CheckResult check_phi1_derivative(const SuiteOptions& options, int samples = 1000, double tol = 1e-5);
CheckResult check_second_order_derivative(const SuiteOptions& options, int samples = 1000, double tol = 1e-4);
CheckResult check_qp_minimal(const SuiteOptions& options, int samples = 100, double tol = 1e-9);
CheckResult check_qp_projection(const SuiteOptions& options, int problems = 50, int probes = 100);
CheckResult check_qp_scaling(const SuiteOptions& options, int problems = 50);

struct InvarianceStats {
  double min_h = 0.0;
  double max_applied = 0.0;
  int degraded = 0;
};

CheckResult check_forward_invariance(const SuiteOptions& options, int runs = 200, double duration = 10.0,
                                     InvarianceStats* stats = nullptr);
CheckResult check_hand_trace(const SuiteOptions& options, int max_rounds = 3);

std::vector<CheckResult> run_suite(const SuiteOptions& options);

/// Fixed-width table, one row per check; returns true iff all passed.
bool print_table(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace swarmsafe::checks
