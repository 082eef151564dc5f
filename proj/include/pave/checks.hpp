#pragma once

#include <string>
#include <vector>

namespace pave {

struct CheckResult {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

// Deterministic oracle suites: analytic-Jacobian agreement, Lipschitz bound,
// the perturbation-identity Monte Carlo, sign-vector trace estimation,
// second-order gradient checks, the spectral transform, and the
// gradient-evaluation cost accounting.
std::vector<CheckResult> run_fast_oracle_checks();

CheckResult check_jacobian_oracle();
CheckResult check_lipschitz_bound();
CheckResult check_perturbation_identity();
CheckResult check_trace_estimator();
CheckResult check_second_order_gradients();
CheckResult check_fft();
CheckResult check_cost_accounting();

}  // namespace pave
