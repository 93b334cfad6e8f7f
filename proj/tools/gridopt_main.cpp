// gridopt command-line front end. Talks to the core exclusively through the
// C API in gridopt.h; JSON is used only to compose study configuration and
// to post-process the report for display.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridopt.h"

namespace {

// Exit-code contract: 0 success, 2 usage/config/io, 3 parse/validation,
// 4 numerical divergence.
int exit_code_for(gridopt_status status) {
    switch (status) {
        case GRIDOPT_OK: return 0;
        case GRIDOPT_ERROR_IO:
        case GRIDOPT_ERROR_CONFIG: return 2;
        case GRIDOPT_ERROR_PARSE:
        case GRIDOPT_ERROR_VALIDATION: return 3;
        case GRIDOPT_ERROR_DIVERGED:
        case GRIDOPT_ERROR_NUMERIC: return 4;
        case GRIDOPT_ERROR_INTERNAL: break;
    }
    return 1;
}

int fail(gridopt_status status) {
    std::cerr << "error: " << gridopt_last_error() << '\n';
    return exit_code_for(status);
}

struct NetworkHandle {
    gridopt_network* net = nullptr;
    ~NetworkHandle() { gridopt_network_free(net); }
};

int open_case(const std::string& case_path, const std::string& costs_path,
              NetworkHandle& handle) {
    if (const auto rc = gridopt_network_open(case_path.c_str(), &handle.net);
        rc != GRIDOPT_OK) {
        return fail(rc);
    }
    if (!costs_path.empty()) {
        if (const auto rc = gridopt_network_attach_costs_file(handle.net, costs_path.c_str());
            rc != GRIDOPT_OK) {
            return fail(rc);
        }
    }
    return 0;
}

/// Temp-file-then-rename so a killed run never leaves a partial report.
bool write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return false;
        out << content;
        if (!out.flush()) return false;
    }
    std::filesystem::rename(tmp, path, ec);
    return !ec;
}

int cmd_parse(const std::string& case_path, const std::string& costs_path) {
    NetworkHandle handle;
    if (const int rc = open_case(case_path, costs_path, handle); rc != 0) return rc;

    std::printf("%d buses, %d branches, %d generators (base %.1f MVA)\n",
                gridopt_network_bus_count(handle.net),
                gridopt_network_branch_count(handle.net),
                gridopt_network_generator_count(handle.net),
                gridopt_network_base_mva(handle.net));
    char* report = nullptr;
    const int violations = gridopt_network_validate(handle.net, &report);
    if (violations < 0) return fail(GRIDOPT_ERROR_INTERNAL);
    if (violations == 0) {
        std::printf("case is valid\n");
        gridopt_text_free(report);
        return 0;
    }
    std::printf("%d violation%s:\n%s", violations, violations == 1 ? "" : "s", report);
    gridopt_text_free(report);
    return 3;
}

int cmd_powerflow(const std::string& case_path, const std::string& costs_path,
                  double load_factor, double tolerance, int max_iterations,
                  bool no_q_limits) {
    NetworkHandle handle;
    if (const int rc = open_case(case_path, costs_path, handle); rc != 0) return rc;

    NetworkHandle scaled;
    const gridopt_network* target = handle.net;
    if (load_factor != 1.0) {
        if (const auto rc = gridopt_network_scale_loads(handle.net, load_factor, &scaled.net);
            rc != GRIDOPT_OK) {
            return fail(rc);
        }
        target = scaled.net;
    }

    gridopt_pf_options options;
    gridopt_pf_options_init(&options);
    options.tolerance = tolerance;
    options.max_iterations = max_iterations;
    options.enforce_q_limits = no_q_limits ? 0 : 1;

    gridopt_solution* sol = nullptr;
    if (const auto rc = gridopt_solve_power_flow(target, &options, &sol); rc != GRIDOPT_OK) {
        return fail(rc);
    }

    std::printf("bus       V (pu)   angle (deg)\n");
    const int n = gridopt_solution_bus_count(sol);
    for (int i = 0; i < n; ++i) {
        int id = 0;
        double v = 0.0, angle = 0.0;
        gridopt_solution_bus_state(sol, i, &id, &v, &angle);
        std::printf("%4d   %8.5f     %9.4f\n", id, v, angle * 180.0 / 3.141592653589793);
    }
    std::printf("loss: %.4f MW, %d iterations, max mismatch %.3e\n",
                gridopt_solution_loss_mw(sol), gridopt_solution_iterations(sol),
                gridopt_solution_max_mismatch(sol));
    const bool converged = gridopt_solution_converged(sol) != 0;
    gridopt_solution_free(sol);
    if (!converged) {
        std::cerr << "power flow did not converge\n";
        return 4;
    }
    return 0;
}

int cmd_study(const std::string& case_path, const std::string& costs_path,
              const std::string& config_path, const CLI::App* study,
              double load_factor, std::uint64_t seed, int population, int iterations,
              const std::string& out_dir, const std::string& format) {
    NetworkHandle handle;
    if (const int rc = open_case(case_path, costs_path, handle); rc != 0) return rc;

    nlohmann::json config = nlohmann::json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot read config '" << config_path << "'\n";
            return 2;
        }
        config = nlohmann::json::parse(in, nullptr, false);
        if (config.is_discarded()) {
            std::cerr << "error: invalid JSON in '" << config_path << "'\n";
            return 3;
        }
    }
    // Explicit flags override the config file.
    if (study->count("--load-factor") > 0) config["load_factor"] = load_factor;
    if (study->count("--seed") > 0) config["seed"] = seed;
    if (study->count("--population") > 0) {
        for (const char* key : {"stage1", "stage2", "dispatch"}) {
            config[key]["population"] = population;
        }
    }
    if (study->count("--iterations") > 0) {
        for (const char* key : {"stage1", "stage2", "dispatch"}) {
            config[key]["iterations"] = iterations;
        }
    }

    gridopt_report* report = nullptr;
    if (const auto rc = gridopt_run_study(handle.net, config.dump().c_str(), &report);
        rc != GRIDOPT_OK) {
        return fail(rc);
    }

    const std::filesystem::path dir(out_dir);
    bool ok = true;
    if (format == "json" || format == "both") {
        ok = ok && write_atomic(dir / "report.json", gridopt_report_json(report));
    }
    if (format == "csv" || format == "both") {
        ok = ok && write_atomic(dir / "voltage_profile.csv",
                                gridopt_report_voltage_csv(report));
    }
    std::printf("%s", gridopt_report_summary(report));
    gridopt_report_free(report);
    if (!ok) {
        std::cerr << "error: could not write report files to '" << out_dir << "'\n";
        return 2;
    }
    std::printf("wrote %s under %s\n",
                format == "both" ? "report.json and voltage_profile.csv"
                : format == "json" ? "report.json"
                                   : "voltage_profile.csv",
                dir.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridopt: AC power flow and series-compensator placement studies"};
    app.require_subcommand(1);

    std::string case_path, costs_path, config_path;
    std::string out_dir = ".";
    std::string format = "both";
    double load_factor = 1.0;
    double tolerance = 1e-6;
    int max_iterations = 30;
    bool no_q_limits = false;
    std::uint64_t seed = 1;
    int population = 30;
    int iterations = 200;

    CLI::App* parse = app.add_subcommand("parse", "validate a case file and print counts");
    parse->add_option("--case", case_path, "case file (IEEE CDF or native JSON)")->required();
    parse->add_option("--costs", costs_path, "fuel-cost JSON to attach");

    CLI::App* powerflow = app.add_subcommand("powerflow", "solve one AC power flow");
    powerflow->add_option("--case", case_path)->required();
    powerflow->add_option("--costs", costs_path);
    powerflow->add_option("--load-factor", load_factor, "scale all loads");
    powerflow->add_option("--tolerance", tolerance, "pu mismatch threshold");
    powerflow->add_option("--max-iterations", max_iterations);
    powerflow->add_flag("--no-q-limits", no_q_limits, "skip generator Q-limit switching");

    CLI::App* study = app.add_subcommand("study", "run the placement study");
    study->add_option("--case", case_path)->required();
    study->add_option("--costs", costs_path);
    study->add_option("--config", config_path, "study configuration JSON");
    study->add_option("--load-factor", load_factor, "stress multiplier");
    study->add_option("--seed", seed, "master random seed");
    study->add_option("--population", population, "optimizer population size");
    study->add_option("--iterations", iterations, "optimizer iterations");
    study->add_option("--out", out_dir, "output directory");
    study->add_option("--format", format, "report files: json, csv, or both")
        ->check(CLI::IsMember({"json", "csv", "both"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (parse->parsed()) return cmd_parse(case_path, costs_path);
    if (powerflow->parsed()) {
        return cmd_powerflow(case_path, costs_path, load_factor, tolerance, max_iterations,
                             no_q_limits);
    }
    return cmd_study(case_path, costs_path, config_path, study, load_factor, seed,
                     population, iterations, out_dir, format);
}
