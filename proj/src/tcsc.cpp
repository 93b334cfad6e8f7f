#include "gridopt/tcsc.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "gridopt/errors.hpp"

namespace gridopt {

double tcsc_lower_bound(double x_line) { return -0.7 * x_line; }
double tcsc_upper_bound(double x_line) { return 0.2 * x_line; }

bool tcsc_eligible(const Branch& branch) {
    return !branch.is_transformer && branch.rating > 0.0 && branch.x > 0.0;
}

std::vector<ReactanceOverride> apply_tcsc(const Network& network, const TcscDevice& device) {
    if (device.branch_index >= network.branches.size()) {
        throw_error(ErrorKind::Config,
                    "TCSC targets branch " + std::to_string(device.branch_index) + " of " +
                        std::to_string(network.branches.size()));
    }
    const Branch& br = network.branches[device.branch_index];
    if (br.is_transformer) {
        throw_error(ErrorKind::Config,
                    "branch " + std::to_string(device.branch_index) +
                        " is a transformer and cannot host a series compensator");
    }
    if (!(br.x > 0.0)) {
        throw_error(ErrorKind::Config,
                    "branch " + std::to_string(device.branch_index) +
                        " has non-positive series reactance");
    }
    const double lo = tcsc_lower_bound(br.x);
    const double hi = tcsc_upper_bound(br.x);
    // Rounding slack only: values written as decimal literals (e.g. -0.14 for
    // X_line = 0.2) land within a few ulp of the computed bound.
    const double tol = 1e-12 * std::max(1.0, br.x);
    if (device.x_tcsc < lo - tol || device.x_tcsc > hi + tol) {
        std::ostringstream msg;
        msg << "x_tcsc = " << device.x_tcsc << " outside [" << lo << ", " << hi
            << "] for X_line = " << br.x;
        throw_error(ErrorKind::Config, msg.str());
    }
    const double x_eff = br.x + device.x_tcsc;
    if (std::abs(std::complex<double>{br.r, x_eff}) == 0.0) {
        throw_error(ErrorKind::Config, "compensation would zero the branch impedance");
    }
    return {ReactanceOverride{device.branch_index, x_eff}};
}

TcscCost tcsc_cost(double operating_range_mvar) {
    if (operating_range_mvar < 0.0) {
        throw_error(ErrorKind::Config, "operating range must be non-negative");
    }
    const double s = operating_range_mvar;
    TcscCost out;
    out.unit_cost_per_kvar = 0.0015 * s * s - 0.7130 * s + 153.75;
    out.total_cost = out.unit_cost_per_kvar * s * 1000.0;
    return out;
}

double operating_range_from_solution(const Network& network, const TcscDevice& device,
                                     const PowerFlowSolution& solution) {
    if (!solution.converged) {
        throw_error(ErrorKind::Diverged,
                    "operating range needs a converged solution");
    }
    const Branch& br = network.branches.at(device.branch_index);
    const auto fi = static_cast<Eigen::Index>(*network.bus_index(br.from_bus));
    const auto ti = static_cast<Eigen::Index>(*network.bus_index(br.to_bus));
    const std::complex<double> vf =
        std::polar(solution.v_mag(fi), solution.v_angle(fi));
    const std::complex<double> vt =
        std::polar(solution.v_mag(ti), solution.v_angle(ti));
    const double x_eff = br.x + device.x_tcsc;
    const std::complex<double> ys = 1.0 / std::complex<double>{br.r, x_eff};
    const double current = std::abs((vf - vt) * ys);
    return std::abs(device.x_tcsc) * current * current * network.base_mva;
}

}  // namespace gridopt
