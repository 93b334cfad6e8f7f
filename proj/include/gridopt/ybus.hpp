#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gridopt/network.hpp"

namespace gridopt {

/// Replaces the series reactance of one branch (the TCSC insertion path).
struct ReactanceOverride {
    std::size_t branch_index = 0;
    double x_eff = 0.0;
};

/// Dense nodal admittance matrix, indexed by bus position.
struct AdmittanceMatrix {
    Eigen::MatrixXcd y;

    int order() const { return static_cast<int>(y.rows()); }
};

/// Standard pi-model assembly with off-nominal taps on the from side.
/// Overrides swap a branch's series reactance before its admittance is formed.
AdmittanceMatrix build_ybus(const Network& network,
                            std::span<const ReactanceOverride> overrides = {});

/// Effective series reactance of branch k under the given override set.
double effective_reactance(const Network& network, std::size_t branch_index,
                           std::span<const ReactanceOverride> overrides);

}  // namespace gridopt
