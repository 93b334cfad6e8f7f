#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridopt/network.hpp"

namespace gridopt {

/// Native case format: one JSON document mirroring the Network type.
/// Unbounded limits and unset cost coefficients are omitted on write and
/// restored on read, so parse -> serialize -> parse is the identity.
nlohmann::ordered_json network_to_json(const Network& network);
Network network_from_json(const nlohmann::json& doc);
Network network_from_json_text(std::string_view text);

/// Per-generator fuel-cost record, keyed by bus id. MW limits are optional;
/// when present they overwrite the generator's active-power bounds.
struct CostRecord {
    int bus = 0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    std::optional<double> p_min_mw;
    std::optional<double> p_max_mw;
};

std::vector<CostRecord> cost_records_from_json(const nlohmann::json& doc);
std::vector<CostRecord> cost_records_from_json_text(std::string_view text);

/// Returns a copy of the network with cost coefficients attached, one record
/// per generator matched by bus id. Rejects unknown buses, duplicate or
/// missing records, and c < 0.
Network attach_cost_data(const Network& network, std::span<const CostRecord> costs);

/// Reads a case file, dispatching on content: files starting with '{' parse
/// as the native JSON format, anything else as IEEE CDF.
Network load_case_file(const std::string& path);

}  // namespace gridopt
