#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sfv/grid.hpp"

namespace sfv {

struct CheckOptions {
    std::size_t instances = 1000;  ///< random instances per inequality suite
    std::uint64_t seed = 20240917;
    SignConvention sign = SignConvention::standard;
    std::uint64_t coupled_steps = 2000;
    double kb_horizon = 8.0;  ///< T of the reduced kb run
};

struct CheckResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;  ///< largest violation (or relative error) seen
    std::string detail;
};

CheckResult check_sbp(const CheckOptions& opt);
CheckResult check_d2_spectrum(const CheckOptions& opt);
CheckResult check_psi_isometry(const CheckOptions& opt);
CheckResult check_psi1_identity(const CheckOptions& opt);
CheckResult check_discrete_poincare(const CheckOptions& opt);
CheckResult check_gradient_estimate(const CheckOptions& opt);
CheckResult check_lp_poincare(const CheckOptions& opt);
CheckResult check_stability(const CheckOptions& opt);
CheckResult check_dissipativity(const CheckOptions& opt);
CheckResult check_l1_contraction(const CheckOptions& opt);
CheckResult check_sign_convention(const CheckOptions& opt);
CheckResult check_fb0(const CheckOptions& opt);
CheckResult check_newton_uniqueness(const CheckOptions& opt);
CheckResult check_coupled_contraction(const CheckOptions& opt);
CheckResult check_kb_bound(const CheckOptions& opt);

/// Runs every suite above in a fixed order.
std::vector<CheckResult> run_selfchecks(const CheckOptions& opt);

}  // namespace sfv
