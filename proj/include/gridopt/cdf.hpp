#pragma once

#include <iosfwd>
#include <string_view>

#include "gridopt/network.hpp"

namespace gridopt {

/// Parses an IEEE Common Data Format case (title card, BUS DATA / BRANCH DATA
/// sections terminated by -999) into a per-unit Network on the file's MVA base.
///
/// Bus type codes map 3 -> Slack, 2 -> PV, 0/1 -> PQ. A Generator is
/// synthesized for every PV/Slack bus and for every bus with nonzero scheduled
/// generation; PV-type buses with zero output keep the file's MVAr limits so
/// they still regulate voltage. Voltage bounds default to [0.95, 1.10] pu.
Network parse_ieee_cdf(std::string_view text);
Network parse_ieee_cdf(std::istream& in);

}  // namespace gridopt
