#include "gridopt.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "gridopt/case_json.hpp"
#include "gridopt/cdf.hpp"
#include "gridopt/errors.hpp"
#include "gridopt/network.hpp"
#include "gridopt/pipeline.hpp"
#include "gridopt/power_flow.hpp"

struct gridopt_network {
    gridopt::Network net;
};

struct gridopt_solution {
    gridopt::Network net;  // bus ids for accessors
    gridopt::PowerFlowSolution sol;
};

struct gridopt_report {
    std::string json;
    std::string csv;
    std::string summary;
};

namespace {

thread_local std::string g_last_error;

gridopt_status status_of(gridopt::ErrorKind kind) {
    using gridopt::ErrorKind;
    switch (kind) {
        case ErrorKind::Io: return GRIDOPT_ERROR_IO;
        case ErrorKind::Parse: return GRIDOPT_ERROR_PARSE;
        case ErrorKind::Validation: return GRIDOPT_ERROR_VALIDATION;
        case ErrorKind::Config: return GRIDOPT_ERROR_CONFIG;
        case ErrorKind::Numeric: return GRIDOPT_ERROR_NUMERIC;
        case ErrorKind::Diverged: return GRIDOPT_ERROR_DIVERGED;
    }
    return GRIDOPT_ERROR_INTERNAL;
}

/// Runs fn, translating exceptions into status codes + the thread-local
/// message. All C API entry points funnel through here.
template <typename Fn>
gridopt_status guarded(Fn&& fn) {
    try {
        fn();
        return GRIDOPT_OK;
    } catch (const gridopt::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return GRIDOPT_ERROR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return GRIDOPT_ERROR_INTERNAL;
    }
}

char* copy_text(const std::string& text) {
    char* out = new char[text.size() + 1];
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

std::string read_file(const char* path) {
    if (path == nullptr) {
        gridopt::throw_error(gridopt::ErrorKind::Config, "null path");
    }
    std::ifstream in(path);
    if (!in) {
        gridopt::throw_error(gridopt::ErrorKind::Io,
                             std::string("cannot read '") + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void require(bool ok, const char* what) {
    if (!ok) gridopt::throw_error(gridopt::ErrorKind::Config, what);
}

}  // namespace

extern "C" {

const char* gridopt_last_error(void) { return g_last_error.c_str(); }

const char* gridopt_version(void) { return "0.1.0"; }

gridopt_status gridopt_network_open(const char* path, gridopt_network** out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "null argument");
        *out = new gridopt_network{gridopt::load_case_file(path)};
    });
}

gridopt_status gridopt_network_parse(const char* text, gridopt_case_format format,
                                     gridopt_network** out) {
    return guarded([&] {
        require(text != nullptr && out != nullptr, "null argument");
        const std::string_view view(text);
        gridopt::Network net;
        switch (format) {
            case GRIDOPT_FORMAT_CDF:
                net = gridopt::parse_ieee_cdf(view);
                break;
            case GRIDOPT_FORMAT_JSON:
                net = gridopt::network_from_json_text(view);
                break;
            case GRIDOPT_FORMAT_AUTO:
            default: {
                const auto first = view.find_first_not_of(" \t\r\n");
                if (first != std::string_view::npos && view[first] == '{') {
                    net = gridopt::network_from_json_text(view);
                } else {
                    net = gridopt::parse_ieee_cdf(view);
                }
                break;
            }
        }
        *out = new gridopt_network{std::move(net)};
    });
}

void gridopt_network_free(gridopt_network* net) { delete net; }

int gridopt_network_bus_count(const gridopt_network* net) {
    return net ? static_cast<int>(net->net.buses.size()) : 0;
}

int gridopt_network_branch_count(const gridopt_network* net) {
    return net ? static_cast<int>(net->net.branches.size()) : 0;
}

int gridopt_network_generator_count(const gridopt_network* net) {
    return net ? static_cast<int>(net->net.generators.size()) : 0;
}

double gridopt_network_base_mva(const gridopt_network* net) {
    return net ? net->net.base_mva : 0.0;
}

gridopt_status gridopt_network_to_json(const gridopt_network* net, char** out_text) {
    return guarded([&] {
        require(net != nullptr && out_text != nullptr, "null argument");
        *out_text = copy_text(gridopt::network_to_json(net->net).dump(2));
    });
}

void gridopt_text_free(char* text) { delete[] text; }

int gridopt_network_validate(const gridopt_network* net, char** out_report) {
    int count = -1;
    const gridopt_status rc = guarded([&] {
        require(net != nullptr, "null argument");
        const auto violations = gridopt::validate(net->net);
        count = static_cast<int>(violations.size());
        if (out_report != nullptr) {
            std::ostringstream text;
            for (const gridopt::Violation& v : violations) {
                text << v.code << ": " << v.message << '\n';
            }
            *out_report = copy_text(text.str());
        }
    });
    return rc == GRIDOPT_OK ? count : -1;
}

gridopt_status gridopt_network_attach_costs(gridopt_network* net, const char* json_text) {
    return guarded([&] {
        require(net != nullptr && json_text != nullptr, "null argument");
        const auto records = gridopt::cost_records_from_json_text(json_text);
        net->net = gridopt::attach_cost_data(net->net, records);
    });
}

gridopt_status gridopt_network_attach_costs_file(gridopt_network* net, const char* path) {
    return guarded([&] {
        require(net != nullptr, "null argument");
        const std::string text = read_file(path);
        const auto records = gridopt::cost_records_from_json_text(text);
        net->net = gridopt::attach_cost_data(net->net, records);
    });
}

gridopt_status gridopt_network_scale_loads(const gridopt_network* net, double factor,
                                           gridopt_network** out) {
    return guarded([&] {
        require(net != nullptr && out != nullptr, "null argument");
        *out = new gridopt_network{gridopt::scale_loads(net->net, factor)};
    });
}

void gridopt_pf_options_init(gridopt_pf_options* options) {
    if (options == nullptr) return;
    const gridopt::SolverOptions defaults;
    options->tolerance = defaults.tolerance;
    options->max_iterations = defaults.max_iterations;
    options->flat_start = defaults.flat_start ? 1 : 0;
    options->enforce_q_limits = defaults.enforce_q_limits ? 1 : 0;
}

gridopt_status gridopt_solve_power_flow(const gridopt_network* net,
                                        const gridopt_pf_options* options,
                                        gridopt_solution** out) {
    return guarded([&] {
        require(net != nullptr && out != nullptr, "null argument");
        gridopt::SolverOptions opts;
        if (options != nullptr) {
            opts.tolerance = options->tolerance;
            opts.max_iterations = options->max_iterations;
            opts.flat_start = options->flat_start != 0;
            opts.enforce_q_limits = options->enforce_q_limits != 0;
        }
        gridopt::require_valid(net->net);
        auto sol = gridopt::solve_case(net->net, {}, opts);
        *out = new gridopt_solution{net->net, std::move(sol)};
    });
}

void gridopt_solution_free(gridopt_solution* sol) { delete sol; }

int gridopt_solution_converged(const gridopt_solution* sol) {
    return sol != nullptr && sol->sol.converged ? 1 : 0;
}

int gridopt_solution_iterations(const gridopt_solution* sol) {
    return sol ? sol->sol.iterations : 0;
}

double gridopt_solution_max_mismatch(const gridopt_solution* sol) {
    return sol ? sol->sol.max_mismatch : 0.0;
}

double gridopt_solution_loss_mw(const gridopt_solution* sol) {
    return sol ? sol->sol.total_loss_mw : 0.0;
}

int gridopt_solution_bus_count(const gridopt_solution* sol) {
    return sol ? static_cast<int>(sol->sol.v_mag.size()) : 0;
}

gridopt_status gridopt_solution_bus_state(const gridopt_solution* sol, int index,
                                          int* bus_id, double* v_mag, double* v_angle_rad) {
    return guarded([&] {
        require(sol != nullptr, "null argument");
        require(index >= 0 && index < static_cast<int>(sol->net.buses.size()),
                "bus index out of range");
        if (bus_id != nullptr) *bus_id = sol->net.buses[static_cast<std::size_t>(index)].id;
        if (v_mag != nullptr) *v_mag = sol->sol.v_mag(index);
        if (v_angle_rad != nullptr) *v_angle_rad = sol->sol.v_angle(index);
    });
}

gridopt_status gridopt_run_study(const gridopt_network* net, const char* config_json,
                                 gridopt_report** out) {
    return guarded([&] {
        require(net != nullptr && out != nullptr, "null argument");
        gridopt::StudyConfig config;
        if (config_json != nullptr && *config_json != '\0') {
            const auto doc = nlohmann::json::parse(config_json, nullptr, false);
            if (doc.is_discarded()) {
                gridopt::throw_error(gridopt::ErrorKind::Parse, "invalid study config JSON");
            }
            try {
                config = gridopt::study_config_from_json(doc);
            } catch (const nlohmann::json::exception& e) {
                gridopt::throw_error(gridopt::ErrorKind::Parse,
                                     std::string("bad study config: ") + e.what());
            }
        }
        const auto report = gridopt::run_study(net->net, config);
        auto* handle = new gridopt_report{};
        handle->json = gridopt::report_to_json(report).dump(2);
        handle->json.push_back('\n');
        handle->csv = gridopt::report_voltage_csv(report);
        handle->summary = gridopt::report_summary_text(report);
        *out = handle;
    });
}

void gridopt_report_free(gridopt_report* report) { delete report; }

const char* gridopt_report_json(const gridopt_report* report) {
    return report ? report->json.c_str() : "";
}

const char* gridopt_report_voltage_csv(const gridopt_report* report) {
    return report ? report->csv.c_str() : "";
}

const char* gridopt_report_summary(const gridopt_report* report) {
    return report ? report->summary.c_str() : "";
}

}  // extern "C"
