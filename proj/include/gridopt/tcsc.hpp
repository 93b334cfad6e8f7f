#pragma once

#include <vector>

#include "gridopt/network.hpp"
#include "gridopt/power_flow.hpp"
#include "gridopt/ybus.hpp"

namespace gridopt {

/// Series compensator on one branch. x_tcsc is the added series reactance in
/// pu; negative values are capacitive compensation. The admissible band is
/// -0.7 * X_line <= x_tcsc <= 0.2 * X_line for the target branch.
struct TcscDevice {
    std::size_t branch_index = 0;
    double x_tcsc = 0.0;
    double operating_range_mvar = 0.0;  // |Q| exchanged at the operating point
};

double tcsc_lower_bound(double x_line);  // -0.7 * X_line
double tcsc_upper_bound(double x_line);  //  0.2 * X_line

/// True when the branch may host a device: a rated, non-transformer line with
/// positive series reactance.
bool tcsc_eligible(const Branch& branch);

/// Override set {branch -> X_line + x_tcsc} for build_ybus. Rejects devices
/// outside the reactance band and transformer targets. The network itself is
/// never modified.
std::vector<ReactanceOverride> apply_tcsc(const Network& network, const TcscDevice& device);

struct TcscCost {
    double unit_cost_per_kvar = 0.0;  // $/kVAr
    double total_cost = 0.0;          // $
};

/// Quadratic compensation-cost model over the reactive operating range S in
/// MVAr: C(S) = 0.0015 S^2 - 0.7130 S + 153.75 $/kVAr, total = C(S) * S * 1000.
TcscCost tcsc_cost(double operating_range_mvar);

/// Reactive operating range S = |x_tcsc| * I^2 * base_mva from the current
/// through the compensated branch. Requires a converged solution.
double operating_range_from_solution(const Network& network, const TcscDevice& device,
                                     const PowerFlowSolution& solution);

}  // namespace gridopt
