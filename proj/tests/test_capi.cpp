#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <string>

#include "gridopt.h"

namespace {

std::string data_path(const char* name) {
    return std::string(GRIDOPT_DATA_DIR) + "/" + name;
}

struct Net {
    gridopt_network* ptr = nullptr;
    ~Net() { gridopt_network_free(ptr); }
};

}  // namespace

TEST_CASE("open, inspect, and validate the bundled case") {
    Net net;
    REQUIRE(gridopt_network_open(data_path("ieee30.cdf").c_str(), &net.ptr) == GRIDOPT_OK);
    CHECK(gridopt_network_bus_count(net.ptr) == 30);
    CHECK(gridopt_network_branch_count(net.ptr) == 41);
    CHECK(gridopt_network_generator_count(net.ptr) == 6);
    CHECK(gridopt_network_base_mva(net.ptr) == doctest::Approx(100.0));

    char* report = nullptr;
    CHECK(gridopt_network_validate(net.ptr, &report) == 0);
    CHECK(report != nullptr);
    gridopt_text_free(report);
}

TEST_CASE("missing file reports IO with a message") {
    gridopt_network* net = nullptr;
    CHECK(gridopt_network_open("/nonexistent/case.cdf", &net) == GRIDOPT_ERROR_IO);
    CHECK(std::strlen(gridopt_last_error()) > 0);
    CHECK(net == nullptr);
}

TEST_CASE("parse errors carry status and line information") {
    gridopt_network* net = nullptr;
    const char* garbage = "this is not a case file\n";
    CHECK(gridopt_network_parse(garbage, GRIDOPT_FORMAT_CDF, &net) == GRIDOPT_ERROR_PARSE);
}

TEST_CASE("JSON round trip through the C surface") {
    Net net;
    REQUIRE(gridopt_network_open(data_path("ieee30.cdf").c_str(), &net.ptr) == GRIDOPT_OK);
    char* text = nullptr;
    REQUIRE(gridopt_network_to_json(net.ptr, &text) == GRIDOPT_OK);
    Net again;
    CHECK(gridopt_network_parse(text, GRIDOPT_FORMAT_JSON, &again.ptr) == GRIDOPT_OK);
    CHECK(gridopt_network_bus_count(again.ptr) == 30);
    char* text2 = nullptr;
    REQUIRE(gridopt_network_to_json(again.ptr, &text2) == GRIDOPT_OK);
    CHECK(std::string(text) == text2);
    gridopt_text_free(text);
    gridopt_text_free(text2);
}

TEST_CASE("power flow solve and accessors") {
    Net net;
    REQUIRE(gridopt_network_open(data_path("ieee30.cdf").c_str(), &net.ptr) == GRIDOPT_OK);

    gridopt_pf_options options;
    gridopt_pf_options_init(&options);
    CHECK(options.tolerance == doctest::Approx(1e-6));
    CHECK(options.max_iterations == 30);

    gridopt_solution* sol = nullptr;
    REQUIRE(gridopt_solve_power_flow(net.ptr, &options, &sol) == GRIDOPT_OK);
    CHECK(gridopt_solution_converged(sol) == 1);
    CHECK(gridopt_solution_iterations(sol) <= 10);
    CHECK(gridopt_solution_max_mismatch(sol) <= 1e-6);
    CHECK(gridopt_solution_loss_mw(sol) > 0.0);
    CHECK(gridopt_solution_bus_count(sol) == 30);

    int id = 0;
    double v = 0.0, angle = 0.0;
    REQUIRE(gridopt_solution_bus_state(sol, 0, &id, &v, &angle) == GRIDOPT_OK);
    CHECK(id == 1);
    CHECK(v == doctest::Approx(1.06));
    CHECK(angle == doctest::Approx(0.0));
    CHECK(gridopt_solution_bus_state(sol, 99, &id, &v, &angle) == GRIDOPT_ERROR_CONFIG);
    gridopt_solution_free(sol);

    SUBCASE("bad options are a config error") {
        options.tolerance = 0.0;
        gridopt_solution* bad = nullptr;
        CHECK(gridopt_solve_power_flow(net.ptr, &options, &bad) == GRIDOPT_ERROR_CONFIG);
    }
}

TEST_CASE("divergence at extreme scaling is data, not an error") {
    Net net;
    REQUIRE(gridopt_network_open(data_path("ieee30.cdf").c_str(), &net.ptr) == GRIDOPT_OK);
    Net scaled;
    REQUIRE(gridopt_network_scale_loads(net.ptr, 10.0, &scaled.ptr) == GRIDOPT_OK);
    gridopt_solution* sol = nullptr;
    REQUIRE(gridopt_solve_power_flow(scaled.ptr, nullptr, &sol) == GRIDOPT_OK);
    CHECK(gridopt_solution_converged(sol) == 0);
    gridopt_solution_free(sol);
}

TEST_CASE("study through the C surface produces the report artifacts") {
    Net net;
    REQUIRE(gridopt_network_open(data_path("ieee30.cdf").c_str(), &net.ptr) == GRIDOPT_OK);
    REQUIRE(gridopt_network_attach_costs_file(net.ptr,
                                              data_path("ieee30_costs.json").c_str()) ==
            GRIDOPT_OK);

    // tiny optimizer budget keeps this a smoke test
    const char* config =
        "{\"stage1\":{\"iterations\":10},\"stage2\":{\"iterations\":10},"
        "\"run_dispatch_opf\":false}";
    gridopt_report* report = nullptr;
    REQUIRE(gridopt_run_study(net.ptr, config, &report) == GRIDOPT_OK);
    const std::string json = gridopt_report_json(report);
    CHECK(json.find("\"scenarios\"") != std::string::npos);
    CHECK(json.find("\"device\"") != std::string::npos);
    const std::string csv = gridopt_report_voltage_csv(report);
    CHECK(csv.rfind("bus_id,", 0) == 0);
    CHECK(std::strlen(gridopt_report_summary(report)) > 0);
    gridopt_report_free(report);

    SUBCASE("invalid study config is a parse error") {
        gridopt_report* bad = nullptr;
        CHECK(gridopt_run_study(net.ptr, "{nope", &bad) == GRIDOPT_ERROR_PARSE);
    }
}

TEST_CASE("cost attachment faults are reported") {
    Net net;
    REQUIRE(gridopt_network_open(data_path("ieee30.cdf").c_str(), &net.ptr) == GRIDOPT_OK);
    CHECK(gridopt_network_attach_costs(net.ptr, "{\"costs\":[]}") == GRIDOPT_ERROR_CONFIG);
    CHECK(gridopt_network_attach_costs(net.ptr, "not json") == GRIDOPT_ERROR_PARSE);
}
