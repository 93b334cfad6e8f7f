#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gridopt {

enum class BusKind { Slack, PV, PQ };

const char* to_string(BusKind kind);

/// One electrical bus. All powers and admittances in per-unit on the
/// system MVA base, angles in radians.
struct Bus {
    int id = 0;
    BusKind kind = BusKind::PQ;
    double p_load = 0.0;
    double q_load = 0.0;
    double g_shunt = 0.0;
    double b_shunt = 0.0;
    double v_mag = 1.0;   // PV/Slack: regulation set-point; PQ: initial guess
    double v_angle = 0.0;
    double v_min = 0.95;
    double v_max = 1.10;

    bool operator==(const Bus&) const = default;
};

/// Series branch (line or transformer) as a standard pi model.
/// rating is in MVA; 0 means "no limit enforced".
struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double b_charging = 0.0;  // total line charging susceptance
    double tap = 1.0;         // off-nominal turns ratio on the from side
    double rating = 0.0;
    bool is_transformer = false;

    bool operator==(const Branch&) const = default;
};

/// Generating unit. Cost coefficients follow the quadratic fuel model
/// a + b*P + c*P^2 with P in MW; they are NaN until cost data is attached.
struct Generator {
    int bus = 0;
    double p_gen = 0.0;
    double q_gen = 0.0;
    double p_min = 0.0;
    double p_max = std::numeric_limits<double>::infinity();
    double q_min = -std::numeric_limits<double>::infinity();
    double q_max = std::numeric_limits<double>::infinity();
    double cost_a = std::numeric_limits<double>::quiet_NaN();
    double cost_b = std::numeric_limits<double>::quiet_NaN();
    double cost_c = std::numeric_limits<double>::quiet_NaN();

    bool has_cost() const;
    /// Unset (NaN) cost coefficients compare equal to each other.
    bool operator==(const Generator& other) const;
};

struct Network {
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;

    std::optional<std::size_t> bus_index(int id) const;
    /// Position of the (single) slack bus; throws Validation if absent.
    std::size_t slack_index() const;

    bool operator==(const Network&) const = default;
};

struct Violation {
    std::string code;
    std::string message;

    bool operator==(const Violation&) const = default;
};

/// Collects every invariant violation; empty result means the network is
/// well formed. Pure: never mutates, identical calls give identical lists.
std::vector<Violation> validate(const Network& network);

/// Throws ErrorKind::Validation carrying the first violation, if any.
void require_valid(const Network& network);

/// Copy of the network with every bus load multiplied by lambda. Generator
/// schedules are untouched; the slack absorbs the difference.
Network scale_loads(const Network& network, double lambda);

}  // namespace gridopt
