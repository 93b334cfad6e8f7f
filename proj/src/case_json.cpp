#include "gridopt/case_json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gridopt/cdf.hpp"
#include "gridopt/errors.hpp"

namespace gridopt {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void put_finite(ordered_json& obj, const char* key, double value) {
    if (std::isfinite(value)) obj[key] = value;
}

double get_or(const json& obj, const char* key, double fallback) {
    if (const auto it = obj.find(key); it != obj.end() && !it->is_null()) {
        return it->get<double>();
    }
    return fallback;
}

BusKind kind_from_string(const std::string& s) {
    if (s == "slack") return BusKind::Slack;
    if (s == "pv") return BusKind::PV;
    if (s == "pq") return BusKind::PQ;
    throw_error(ErrorKind::Parse, "unknown bus kind '" + s + "'");
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

ordered_json network_to_json(const Network& network) {
    ordered_json doc;
    doc["base_mva"] = network.base_mva;
    doc["buses"] = ordered_json::array();
    for (const Bus& bus : network.buses) {
        ordered_json b;
        b["id"] = bus.id;
        b["kind"] = to_string(bus.kind);
        b["p_load"] = bus.p_load;
        b["q_load"] = bus.q_load;
        b["g_shunt"] = bus.g_shunt;
        b["b_shunt"] = bus.b_shunt;
        b["v_mag"] = bus.v_mag;
        b["v_angle"] = bus.v_angle;
        b["v_min"] = bus.v_min;
        b["v_max"] = bus.v_max;
        doc["buses"].push_back(std::move(b));
    }
    doc["branches"] = ordered_json::array();
    for (const Branch& br : network.branches) {
        ordered_json b;
        b["from_bus"] = br.from_bus;
        b["to_bus"] = br.to_bus;
        b["r"] = br.r;
        b["x"] = br.x;
        b["b_charging"] = br.b_charging;
        b["tap"] = br.tap;
        b["rating"] = br.rating;
        b["is_transformer"] = br.is_transformer;
        doc["branches"].push_back(std::move(b));
    }
    doc["generators"] = ordered_json::array();
    for (const Generator& gen : network.generators) {
        ordered_json g;
        g["bus"] = gen.bus;
        g["p_gen"] = gen.p_gen;
        g["q_gen"] = gen.q_gen;
        put_finite(g, "p_min", gen.p_min);
        put_finite(g, "p_max", gen.p_max);
        put_finite(g, "q_min", gen.q_min);
        put_finite(g, "q_max", gen.q_max);
        if (gen.has_cost()) {
            g["cost_a"] = gen.cost_a;
            g["cost_b"] = gen.cost_b;
            g["cost_c"] = gen.cost_c;
        }
        doc["generators"].push_back(std::move(g));
    }
    return doc;
}

Network network_from_json(const json& doc) {
    Network net;
    net.base_mva = doc.at("base_mva").get<double>();
    for (const json& b : doc.at("buses")) {
        Bus bus;
        bus.id = b.at("id").get<int>();
        bus.kind = kind_from_string(b.at("kind").get<std::string>());
        bus.p_load = b.at("p_load").get<double>();
        bus.q_load = b.at("q_load").get<double>();
        bus.g_shunt = get_or(b, "g_shunt", 0.0);
        bus.b_shunt = get_or(b, "b_shunt", 0.0);
        bus.v_mag = get_or(b, "v_mag", 1.0);
        bus.v_angle = get_or(b, "v_angle", 0.0);
        bus.v_min = get_or(b, "v_min", 0.95);
        bus.v_max = get_or(b, "v_max", 1.10);
        net.buses.push_back(bus);
    }
    for (const json& b : doc.at("branches")) {
        Branch br;
        br.from_bus = b.at("from_bus").get<int>();
        br.to_bus = b.at("to_bus").get<int>();
        br.r = get_or(b, "r", 0.0);
        br.x = b.at("x").get<double>();
        br.b_charging = get_or(b, "b_charging", 0.0);
        br.tap = get_or(b, "tap", 1.0);
        br.rating = get_or(b, "rating", 0.0);
        br.is_transformer = b.value("is_transformer", false);
        net.branches.push_back(br);
    }
    if (const auto it = doc.find("generators"); it != doc.end()) {
        for (const json& g : *it) {
            Generator gen;
            gen.bus = g.at("bus").get<int>();
            gen.p_gen = get_or(g, "p_gen", 0.0);
            gen.q_gen = get_or(g, "q_gen", 0.0);
            gen.p_min = get_or(g, "p_min", 0.0);
            gen.p_max = get_or(g, "p_max", kInf);
            gen.q_min = get_or(g, "q_min", -kInf);
            gen.q_max = get_or(g, "q_max", kInf);
            gen.cost_a = get_or(g, "cost_a", std::numeric_limits<double>::quiet_NaN());
            gen.cost_b = get_or(g, "cost_b", std::numeric_limits<double>::quiet_NaN());
            gen.cost_c = get_or(g, "cost_c", std::numeric_limits<double>::quiet_NaN());
            net.generators.push_back(gen);
        }
    }
    return net;
}

Network network_from_json_text(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw_error(ErrorKind::Parse, "invalid JSON case document");
    }
    try {
        return network_from_json(doc);
    } catch (const json::exception& e) {
        throw_error(ErrorKind::Parse, std::string("bad case document: ") + e.what());
    }
}

std::vector<CostRecord> cost_records_from_json(const json& doc) {
    const json& list = doc.is_array() ? doc : doc.at("costs");
    std::vector<CostRecord> out;
    for (const json& item : list) {
        CostRecord rec;
        rec.bus = item.at("bus").get<int>();
        rec.a = item.at("a").get<double>();
        rec.b = item.at("b").get<double>();
        rec.c = item.at("c").get<double>();
        if (item.contains("p_min_mw")) rec.p_min_mw = item.at("p_min_mw").get<double>();
        if (item.contains("p_max_mw")) rec.p_max_mw = item.at("p_max_mw").get<double>();
        out.push_back(rec);
    }
    return out;
}

std::vector<CostRecord> cost_records_from_json_text(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw_error(ErrorKind::Parse, "invalid JSON cost document");
    }
    try {
        return cost_records_from_json(doc);
    } catch (const json::exception& e) {
        throw_error(ErrorKind::Parse, std::string("bad cost document: ") + e.what());
    }
}

Network attach_cost_data(const Network& network, std::span<const CostRecord> costs) {
    if (costs.size() != network.generators.size()) {
        throw_error(ErrorKind::Config,
                    "cost record count (" + std::to_string(costs.size()) +
                        ") does not match generator count (" +
                        std::to_string(network.generators.size()) + ")");
    }
    Network out = network;
    std::set<int> used;
    for (const CostRecord& rec : costs) {
        if (rec.c < 0.0) {
            throw_error(ErrorKind::Validation,
                        "bus " + std::to_string(rec.bus) + ": quadratic cost term must be >= 0");
        }
        if (!used.insert(rec.bus).second) {
            throw_error(ErrorKind::Config,
                        "duplicate cost record for bus " + std::to_string(rec.bus));
        }
        Generator* match = nullptr;
        for (Generator& gen : out.generators) {
            if (gen.bus == rec.bus) {
                match = &gen;
                break;
            }
        }
        if (match == nullptr) {
            throw_error(ErrorKind::Config,
                        "cost record for bus " + std::to_string(rec.bus) +
                            " matches no generator");
        }
        match->cost_a = rec.a;
        match->cost_b = rec.b;
        match->cost_c = rec.c;
        if (rec.p_min_mw) match->p_min = *rec.p_min_mw / out.base_mva;
        if (rec.p_max_mw) match->p_max = *rec.p_max_mw / out.base_mva;
    }
    return out;
}

Network load_case_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw_error(ErrorKind::Io, "cannot read case file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        return network_from_json_text(text);
    }
    return parse_ieee_cdf(text);
}

}  // namespace gridopt
