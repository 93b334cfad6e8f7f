#pragma once

#include <string>

#include "gridopt/network.hpp"

namespace gridopt::testing {

/// Slack + PQ bus joined by one branch; the workhorse for closed-form checks.
inline Network two_bus_case(double p_load = 0.5, double q_load = 0.0, double r = 0.0,
                            double x = 0.1) {
    Network net;
    net.base_mva = 100.0;
    Bus slack;
    slack.id = 1;
    slack.kind = BusKind::Slack;
    slack.v_mag = 1.0;
    Bus load;
    load.id = 2;
    load.kind = BusKind::PQ;
    load.p_load = p_load;
    load.q_load = q_load;
    net.buses = {slack, load};
    Branch br;
    br.from_bus = 1;
    br.to_bus = 2;
    br.r = r;
    br.x = x;
    br.rating = 100.0;
    net.branches = {br};
    Generator gen;
    gen.bus = 1;
    net.generators = {gen};
    return net;
}

/// Triangle of three buses with one slack; ratings chosen per test.
inline Network triangle_case(double load2, double load3, double rating12, double rating13,
                             double rating23) {
    Network net;
    net.base_mva = 100.0;
    for (int id = 1; id <= 3; ++id) {
        Bus bus;
        bus.id = id;
        bus.kind = id == 1 ? BusKind::Slack : BusKind::PQ;
        net.buses.push_back(bus);
    }
    net.buses[1].p_load = load2;
    net.buses[1].q_load = load2 * 0.3;
    net.buses[2].p_load = load3;
    net.buses[2].q_load = load3 * 0.3;
    auto line = [](int f, int t, double x, double rating) {
        Branch br;
        br.from_bus = f;
        br.to_bus = t;
        br.r = 0.01;
        br.x = x;
        br.rating = rating;
        return br;
    };
    net.branches = {line(1, 2, 0.08, rating12), line(1, 3, 0.10, rating13),
                    line(2, 3, 0.06, rating23)};
    Generator gen;
    gen.bus = 1;
    net.generators = {gen};
    return net;
}

/// Comfortably feasible 3-bus case with costed units: nothing binds at the
/// base point (generous ratings, voltages near 1.0).
inline Network costed_toy_case() {
    Network net;
    net.base_mva = 100.0;
    Bus slack;
    slack.id = 1;
    slack.kind = BusKind::Slack;
    slack.v_mag = 1.02;
    Bus pv;
    pv.id = 2;
    pv.kind = BusKind::PV;
    pv.v_mag = 1.01;
    Bus load;
    load.id = 3;
    load.kind = BusKind::PQ;
    load.p_load = 0.6;
    load.q_load = 0.2;
    net.buses = {slack, pv, load};

    auto line = [](int f, int t, double r, double x) {
        Branch br;
        br.from_bus = f;
        br.to_bus = t;
        br.r = r;
        br.x = x;
        br.rating = 200.0;
        return br;
    };
    net.branches = {line(1, 2, 0.01, 0.10), line(1, 3, 0.01, 0.08), line(2, 3, 0.01, 0.12)};

    Generator g1;
    g1.bus = 1;
    g1.p_min = 0.0;
    g1.p_max = 3.0;
    g1.cost_a = 0.0;
    g1.cost_b = 2.0;
    g1.cost_c = 0.01;
    Generator g2;
    g2.bus = 2;
    g2.p_gen = 0.4;
    g2.p_min = 0.0;
    g2.p_max = 2.0;
    g2.q_min = -1.0;
    g2.q_max = 1.0;
    g2.cost_a = 0.0;
    g2.cost_b = 3.0;
    g2.cost_c = 0.02;
    net.generators = {g1, g2};
    return net;
}

inline std::string data_file(const std::string& name) {
#ifdef GRIDOPT_DATA_DIR
    return std::string(GRIDOPT_DATA_DIR) + "/" + name;
#else
    return "data/" + name;
#endif
}

}  // namespace gridopt::testing
