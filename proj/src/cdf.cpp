#include "gridopt/cdf.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gridopt/errors.hpp"

namespace gridopt {
namespace {

constexpr double kDefaultVmin = 0.95;
constexpr double kDefaultVmax = 1.10;

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
    throw_error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + what);
}

/// 1-indexed inclusive column slice, tolerant of lines shorter than `last`.
std::string_view slice(std::string_view line, int first, int last) {
    if (first > static_cast<int>(line.size())) return {};
    const std::size_t begin = static_cast<std::size_t>(first - 1);
    const std::size_t count =
        std::min(static_cast<std::size_t>(last - first + 1), line.size() - begin);
    return line.substr(begin, count);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double field_double(std::string_view line, int first, int last, int line_no, const char* name) {
    const std::string_view raw = trim(slice(line, first, last));
    if (raw.empty()) return 0.0;
    std::size_t eaten = 0;
    double value = 0.0;
    try {
        value = std::stod(std::string(raw), &eaten);
    } catch (const std::exception&) {
        parse_fail(line_no, std::string("bad numeric field ") + name + " '" + std::string(raw) + "'");
    }
    if (eaten != raw.size()) {
        parse_fail(line_no, std::string("bad numeric field ") + name + " '" + std::string(raw) + "'");
    }
    return value;
}

int field_int(std::string_view line, int first, int last, int line_no, const char* name) {
    const double v = field_double(line, first, last, line_no, name);
    const double rounded = std::round(v);
    if (std::abs(v - rounded) > 1e-9) {
        parse_fail(line_no, std::string("expected integer field ") + name);
    }
    return static_cast<int>(rounded);
}

bool is_section_end(std::string_view line) {
    const std::string_view t = trim(slice(line, 1, 5));
    return t == "-999" || t == "-99" || t == "-9";
}

struct RawBus {
    int type = 0;
    double gen_p = 0.0, gen_q = 0.0;
    double lim_max = 0.0, lim_min = 0.0;
};

}  // namespace

Network parse_ieee_cdf(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_ieee_cdf(in);
}

Network parse_ieee_cdf(std::istream& in) {
    Network net;
    std::string line;
    int line_no = 0;

    auto next_line = [&](bool required) -> bool {
        if (!std::getline(in, line)) {
            if (required) parse_fail(line_no, "unexpected end of file");
            return false;
        }
        ++line_no;
        return true;
    };

    // Title card: columns 32-37 carry the MVA base. Archive title cards vary
    // a lot, so an unreadable field falls back to the conventional 100 MVA.
    next_line(true);
    double base = 0.0;
    try {
        base = field_double(line, 32, 37, line_no, "MVA base");
    } catch (const Error&) {
        base = 0.0;
    }
    net.base_mva = base > 0.0 ? base : 100.0;

    // Seek the BUS DATA section header.
    bool found_bus_section = false;
    while (next_line(false)) {
        if (trim(line).substr(0, 8) == "BUS DATA") {
            found_bus_section = true;
            break;
        }
    }
    if (!found_bus_section) parse_fail(line_no, "missing BUS DATA section");

    std::vector<RawBus> raw;
    while (true) {
        next_line(true);
        if (is_section_end(line)) break;
        if (trim(line).empty()) continue;

        Bus bus;
        RawBus rb;
        bus.id = field_int(line, 1, 4, line_no, "bus number");
        rb.type = field_int(line, 25, 26, line_no, "bus type");
        switch (rb.type) {
            case 3: bus.kind = BusKind::Slack; break;
            case 2: bus.kind = BusKind::PV; break;
            case 0:
            case 1: bus.kind = BusKind::PQ; break;
            default: parse_fail(line_no, "unknown bus type code " + std::to_string(rb.type));
        }
        const double v_final = field_double(line, 28, 33, line_no, "final voltage");
        const double angle_deg = field_double(line, 34, 40, line_no, "final angle");
        bus.p_load = field_double(line, 41, 49, line_no, "load MW") / net.base_mva;
        bus.q_load = field_double(line, 50, 59, line_no, "load MVAR") / net.base_mva;
        rb.gen_p = field_double(line, 60, 67, line_no, "generation MW");
        rb.gen_q = field_double(line, 68, 75, line_no, "generation MVAR");
        const double v_desired = field_double(line, 85, 90, line_no, "desired volts");
        rb.lim_max = field_double(line, 91, 98, line_no, "max limit");
        rb.lim_min = field_double(line, 99, 106, line_no, "min limit");
        bus.g_shunt = field_double(line, 107, 114, line_no, "shunt G");
        bus.b_shunt = field_double(line, 115, 122, line_no, "shunt B");

        // PV/Slack regulate to the desired-volts column when given; the file's
        // solved voltage otherwise seeds the initial guess.
        if (bus.kind != BusKind::PQ && v_desired > 0.0) {
            bus.v_mag = v_desired;
        } else if (v_final > 0.0) {
            bus.v_mag = v_final;
        }
        bus.v_angle = angle_deg * std::numbers::pi / 180.0;
        bus.v_min = kDefaultVmin;
        bus.v_max = kDefaultVmax;

        net.buses.push_back(bus);
        raw.push_back(rb);
    }
    if (net.buses.empty()) {
        throw_error(ErrorKind::Parse, "case contains no buses");
    }

    // Synthesize generating units: anything that schedules power or regulates.
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        const Bus& bus = net.buses[i];
        const RawBus& rb = raw[i];
        const bool generates = rb.gen_p != 0.0 || rb.gen_q != 0.0;
        if (bus.kind == BusKind::PQ && !generates) continue;

        Generator gen;
        gen.bus = bus.id;
        gen.p_gen = rb.gen_p / net.base_mva;
        gen.q_gen = rb.gen_q / net.base_mva;
        // For regulating buses the limit columns are MVAr limits; 0/0 means none.
        if (bus.kind != BusKind::PQ && (rb.lim_max != 0.0 || rb.lim_min != 0.0)) {
            gen.q_max = rb.lim_max / net.base_mva;
            gen.q_min = rb.lim_min / net.base_mva;
        }
        net.generators.push_back(gen);
    }

    bool found_branch_section = false;
    while (next_line(false)) {
        if (trim(line).substr(0, 11) == "BRANCH DATA") {
            found_branch_section = true;
            break;
        }
    }
    if (!found_branch_section) parse_fail(line_no, "missing BRANCH DATA section");

    while (true) {
        next_line(true);
        if (is_section_end(line)) break;
        if (trim(line).empty()) continue;

        Branch br;
        br.from_bus = field_int(line, 1, 4, line_no, "from bus");
        br.to_bus = field_int(line, 6, 9, line_no, "to bus");
        const int type = field_int(line, 19, 19, line_no, "branch type");
        br.r = field_double(line, 20, 29, line_no, "resistance");
        br.x = field_double(line, 30, 40, line_no, "reactance");
        br.b_charging = field_double(line, 41, 50, line_no, "charging B");
        br.rating = field_double(line, 51, 55, line_no, "rating");
        const double tap = field_double(line, 77, 82, line_no, "tap ratio");
        br.tap = tap > 0.0 ? tap : 1.0;
        br.is_transformer = type != 0 || (tap > 0.0 && tap != 1.0);
        net.branches.push_back(br);
    }

    if (net.bus_index(0)) {
        // Bus numbers start at 1 in every published case; a 0 here means a
        // record slid out of its columns.
        throw_error(ErrorKind::Parse, "bus number 0 encountered; fixed-width fields misaligned?");
    }
    bool has_slack = false;
    for (const Bus& bus : net.buses) has_slack = has_slack || bus.kind == BusKind::Slack;
    if (!has_slack) {
        throw_error(ErrorKind::Validation, "case defines no slack bus");
    }
    return net;
}

}  // namespace gridopt
