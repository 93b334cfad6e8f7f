#include "gridopt/network.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "gridopt/errors.hpp"

namespace gridopt {

const char* to_string(BusKind kind) {
    switch (kind) {
        case BusKind::Slack: return "slack";
        case BusKind::PV: return "pv";
        case BusKind::PQ: return "pq";
    }
    return "?";
}

bool Generator::has_cost() const {
    return std::isfinite(cost_a) && std::isfinite(cost_b) && std::isfinite(cost_c);
}

bool Generator::operator==(const Generator& other) const {
    const auto same = [](double a, double b) {
        return a == b || (std::isnan(a) && std::isnan(b));
    };
    return bus == other.bus && p_gen == other.p_gen && q_gen == other.q_gen &&
           p_min == other.p_min && p_max == other.p_max && q_min == other.q_min &&
           q_max == other.q_max && same(cost_a, other.cost_a) &&
           same(cost_b, other.cost_b) && same(cost_c, other.cost_c);
}

std::optional<std::size_t> Network::bus_index(int id) const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].id == id) return i;
    }
    return std::nullopt;
}

std::size_t Network::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].kind == BusKind::Slack) return i;
    }
    throw_error(ErrorKind::Validation, "network has no slack bus");
}

namespace {

void add(std::vector<Violation>& out, std::string code, std::string message) {
    out.push_back(Violation{std::move(code), std::move(message)});
}

}  // namespace

std::vector<Violation> validate(const Network& network) {
    std::vector<Violation> out;

    std::set<int> seen_ids;
    std::vector<int> slack_ids;
    for (const Bus& bus : network.buses) {
        if (!seen_ids.insert(bus.id).second) {
            add(out, "bus.duplicate-id", "duplicate bus id " + std::to_string(bus.id));
        }
        if (bus.kind == BusKind::Slack) slack_ids.push_back(bus.id);
        if (!(bus.v_min < bus.v_max)) {
            add(out, "bus.voltage-bounds",
                "bus " + std::to_string(bus.id) + ": v_min must be below v_max");
        }
        if (!(bus.v_min > 0.0)) {
            add(out, "bus.voltage-bounds",
                "bus " + std::to_string(bus.id) + ": v_min must be positive");
        }
        if (!std::isfinite(bus.p_load) || !std::isfinite(bus.q_load)) {
            add(out, "bus.load-not-finite",
                "bus " + std::to_string(bus.id) + ": load must be finite");
        }
    }
    if (slack_ids.empty()) {
        add(out, "network.no-slack", "network has no slack bus");
    } else if (slack_ids.size() > 1) {
        std::ostringstream msg;
        msg << "network has " << slack_ids.size() << " slack buses:";
        for (int id : slack_ids) msg << ' ' << id;
        add(out, "network.multiple-slack", msg.str());
    }

    for (std::size_t k = 0; k < network.branches.size(); ++k) {
        const Branch& br = network.branches[k];
        const std::string tag = "branch " + std::to_string(k) + " (" +
                                std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) + ")";
        if (br.x == 0.0) {
            add(out, "branch.zero-reactance", tag + ": series reactance must be nonzero");
        }
        if (br.from_bus == br.to_bus) {
            add(out, "branch.self-loop", tag + ": endpoints must differ");
        }
        if (!network.bus_index(br.from_bus) || !network.bus_index(br.to_bus)) {
            add(out, "branch.unknown-bus", tag + ": endpoint bus does not exist");
        }
        if (br.rating < 0.0) {
            add(out, "branch.negative-rating", tag + ": rating must be >= 0");
        }
    }

    for (const Generator& gen : network.generators) {
        const std::string tag = "generator at bus " + std::to_string(gen.bus);
        if (!network.bus_index(gen.bus)) {
            add(out, "generator.unknown-bus", tag + ": bus does not exist");
        }
        if (gen.p_min > gen.p_max) {
            add(out, "generator.p-bounds", tag + ": p_min must not exceed p_max");
        }
        if (gen.q_min > gen.q_max) {
            add(out, "generator.q-bounds", tag + ": q_min must not exceed q_max");
        }
        if (std::isfinite(gen.cost_c) && gen.cost_c < 0.0) {
            add(out, "generator.concave-cost", tag + ": quadratic cost term must be >= 0");
        }
    }

    return out;
}

void require_valid(const Network& network) {
    const auto violations = validate(network);
    if (!violations.empty()) {
        throw_error(ErrorKind::Validation, violations.front().message);
    }
}

Network scale_loads(const Network& network, double lambda) {
    if (!(lambda > 0.0)) {
        throw_error(ErrorKind::Config, "load factor must be positive");
    }
    Network out = network;
    for (Bus& bus : out.buses) {
        bus.p_load *= lambda;
        bus.q_load *= lambda;
    }
    return out;
}

}  // namespace gridopt
