#include "gridopt/ybus.hpp"

#include <string>

#include "gridopt/errors.hpp"

namespace gridopt {

double effective_reactance(const Network& network, std::size_t branch_index,
                           std::span<const ReactanceOverride> overrides) {
    double x = network.branches[branch_index].x;
    for (const ReactanceOverride& ov : overrides) {
        if (ov.branch_index == branch_index) x = ov.x_eff;
    }
    return x;
}

AdmittanceMatrix build_ybus(const Network& network,
                            std::span<const ReactanceOverride> overrides) {
    const auto n = static_cast<Eigen::Index>(network.buses.size());
    AdmittanceMatrix out;
    out.y = Eigen::MatrixXcd::Zero(n, n);

    for (const ReactanceOverride& ov : overrides) {
        if (ov.branch_index >= network.branches.size()) {
            throw_error(ErrorKind::Config,
                        "reactance override targets branch " +
                            std::to_string(ov.branch_index) + " of " +
                            std::to_string(network.branches.size()));
        }
    }

    for (std::size_t k = 0; k < network.branches.size(); ++k) {
        const Branch& br = network.branches[k];
        const auto fi = network.bus_index(br.from_bus);
        const auto ti = network.bus_index(br.to_bus);
        if (!fi || !ti) {
            throw_error(ErrorKind::Validation,
                        "branch " + std::to_string(k) + " references a missing bus");
        }
        const double x_eff = effective_reactance(network, k, overrides);
        const std::complex<double> z{br.r, x_eff};
        if (std::abs(z) == 0.0) {
            throw_error(ErrorKind::Numeric,
                        "branch " + std::to_string(k) + " (" + std::to_string(br.from_bus) +
                            "-" + std::to_string(br.to_bus) +
                            ") has zero effective series impedance");
        }
        const std::complex<double> ys = 1.0 / z;
        const std::complex<double> ysh{0.0, br.b_charging / 2.0};
        const double t = br.tap != 0.0 ? br.tap : 1.0;

        const auto i = static_cast<Eigen::Index>(*fi);
        const auto j = static_cast<Eigen::Index>(*ti);
        out.y(i, i) += (ys + ysh) / (t * t);
        out.y(j, j) += ys + ysh;
        out.y(i, j) += -ys / t;
        out.y(j, i) += -ys / t;
    }

    for (std::size_t b = 0; b < network.buses.size(); ++b) {
        const Bus& bus = network.buses[b];
        out.y(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) +=
            std::complex<double>{bus.g_shunt, bus.b_shunt};
    }
    return out;
}

}  // namespace gridopt
