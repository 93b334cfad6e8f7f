#include "support/gauss_seidel.hpp"

#include <cmath>
#include <limits>

namespace gridopt::testing {
namespace {

using cd = std::complex<double>;

struct GsBus {
    BusKind kind = BusKind::PQ;
    double p_sched = 0.0;  // net scheduled injection, pu
    double q_sched = 0.0;
    double v_set = 1.0;
    double q_load = 0.0;
    double q_min = -std::numeric_limits<double>::infinity();
    double q_max = std::numeric_limits<double>::infinity();
    bool has_gen = false;
};

}  // namespace

GaussSeidelResult gauss_seidel_solve(const Network& network, double tolerance,
                                     int max_sweeps) {
    const std::size_t n = network.buses.size();

    // Own admittance assembly, independent of build_ybus.
    std::vector<std::vector<cd>> y(n, std::vector<cd>(n, cd{0.0, 0.0}));
    for (const Branch& br : network.branches) {
        const std::size_t i = *network.bus_index(br.from_bus);
        const std::size_t j = *network.bus_index(br.to_bus);
        const cd ys = 1.0 / cd{br.r, br.x};
        const cd ysh{0.0, br.b_charging / 2.0};
        const double t = br.tap != 0.0 ? br.tap : 1.0;
        y[i][i] += (ys + ysh) / (t * t);
        y[j][j] += ys + ysh;
        y[i][j] -= ys / t;
        y[j][i] -= ys / t;
    }
    for (std::size_t i = 0; i < n; ++i) {
        y[i][i] += cd{network.buses[i].g_shunt, network.buses[i].b_shunt};
    }

    std::vector<GsBus> gs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Bus& bus = network.buses[i];
        gs[i].kind = bus.kind;
        gs[i].v_set = bus.v_mag;
        gs[i].p_sched = -bus.p_load;
        gs[i].q_sched = -bus.q_load;
        gs[i].q_load = bus.q_load;
    }
    for (const Generator& gen : network.generators) {
        const auto idx = network.bus_index(gen.bus);
        if (!idx) continue;
        gs[*idx].p_sched += gen.p_gen;
        gs[*idx].q_sched += gen.q_gen;
        if (!gs[*idx].has_gen) {
            gs[*idx].has_gen = true;
            gs[*idx].q_min = gen.q_min;
            gs[*idx].q_max = gen.q_max;
        } else {
            gs[*idx].q_min += gen.q_min;
            gs[*idx].q_max += gen.q_max;
        }
    }

    std::vector<cd> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = gs[i].kind == BusKind::PQ ? cd{1.0, 0.0} : cd{gs[i].v_set, 0.0};
    }

    GaussSeidelResult result;

    const auto sum_yv = [&](std::size_t i) {
        cd acc{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) acc += y[i][k] * v[k];
        return acc;
    };

    const auto inner = [&]() -> bool {
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            double delta = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (gs[i].kind == BusKind::Slack) continue;
                const cd total = sum_yv(i);
                cd next;
                if (gs[i].kind == BusKind::PV) {
                    const double q_calc = (v[i] * std::conj(total)).imag();
                    const cd s{gs[i].p_sched, q_calc};
                    next = (std::conj(s / v[i]) - (total - y[i][i] * v[i])) / y[i][i];
                    next *= gs[i].v_set / std::abs(next);  // hold the magnitude
                } else {
                    const cd s{gs[i].p_sched, gs[i].q_sched};
                    next = (std::conj(s / v[i]) - (total - y[i][i] * v[i])) / y[i][i];
                }
                delta = std::max(delta, std::abs(next - v[i]));
                v[i] = next;
            }
            ++result.sweeps;
            if (delta < tolerance) return true;
        }
        return false;
    };

    bool ok = false;
    for (std::size_t pass = 0; pass <= n; ++pass) {
        ok = inner();
        if (!ok) break;
        bool switched = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (gs[i].kind != BusKind::PV || !gs[i].has_gen) continue;
            const double q_inj = (v[i] * std::conj(sum_yv(i))).imag();
            const double q_gen = q_inj + gs[i].q_load;
            if (q_gen > gs[i].q_max + 1e-9) {
                gs[i].kind = BusKind::PQ;
                gs[i].q_sched = gs[i].q_max - gs[i].q_load;
                switched = true;
            } else if (q_gen < gs[i].q_min - 1e-9) {
                gs[i].kind = BusKind::PQ;
                gs[i].q_sched = gs[i].q_min - gs[i].q_load;
                switched = true;
            }
        }
        if (!switched) break;
    }

    result.converged = ok;
    result.v_mag.resize(n);
    result.v_angle.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.v_mag[i] = std::abs(v[i]);
        result.v_angle[i] = std::arg(v[i]);
    }
    return result;
}

}  // namespace gridopt::testing
