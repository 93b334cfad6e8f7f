#include <doctest.h>

#include <cmath>

#include "gridopt/case_json.hpp"
#include "gridopt/errors.hpp"
#include "gridopt/tcsc.hpp"
#include "support/cases.hpp"

using namespace gridopt;
using gridopt::testing::data_file;
using gridopt::testing::two_bus_case;

TEST_CASE("apply_tcsc produces the effective-reactance override") {
    Network net = two_bus_case(0.5, 0.0, 0.0, 0.2);

    SUBCASE("zero compensation is the identity") {
        const auto ov = apply_tcsc(net, TcscDevice{0, 0.0, 0.0});
        REQUIRE(ov.size() == 1);
        CHECK(ov[0].x_eff == doctest::Approx(0.2));
    }
    SUBCASE("the capacitive bound is admissible") {
        const auto ov = apply_tcsc(net, TcscDevice{0, -0.14, 0.0});
        CHECK(ov[0].x_eff == doctest::Approx(0.06));
    }
    SUBCASE("just past the bound is rejected, quoting both bounds") {
        try {
            apply_tcsc(net, TcscDevice{0, -0.15, 0.0});
            FAIL("expected out-of-range error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Config);
            const std::string msg = e.what();
            CHECK(msg.find("-0.14") != std::string::npos);
            CHECK(msg.find("0.04") != std::string::npos);
        }
    }
    SUBCASE("transformer target is ineligible") {
        net.branches[0].is_transformer = true;
        CHECK_THROWS_AS(apply_tcsc(net, TcscDevice{0, 0.0, 0.0}), Error);
    }
}

TEST_CASE("zero device reproduces the uncompensated Y-bus entry-wise") {
    const Network net = load_case_file(data_file("ieee30.cdf"));
    const AdmittanceMatrix plain = build_ybus(net);
    const auto overrides = apply_tcsc(net, TcscDevice{0, 0.0, 0.0});
    const AdmittanceMatrix with = build_ybus(net, overrides);
    CHECK((with.y - plain.y).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("compensation cost quadratic") {
    SUBCASE("intercept at zero range") {
        const TcscCost c = tcsc_cost(0.0);
        CHECK(c.unit_cost_per_kvar == doctest::Approx(153.75));
        CHECK(c.total_cost == doctest::Approx(0.0));
    }
    SUBCASE("the published unit cost sits at the smaller root, near 22.6 MVAr") {
        // smaller root of C(S) = 138.4178, solved ahead of time:
        // S = (0.7130 - sqrt(0.7130^2 - 0.006*(153.75 - 138.4178))) / 0.003
        const double s = 22.5760397724;
        const TcscCost c = tcsc_cost(s);
        CHECK(c.unit_cost_per_kvar == doctest::Approx(138.4178).epsilon(1e-9));
        CHECK(std::abs(c.unit_cost_per_kvar - 138.4178) < 0.1);
        CHECK(c.total_cost == doctest::Approx(c.unit_cost_per_kvar * s * 1000.0));
    }
    SUBCASE("vertex of the quadratic is the cost minimum") {
        const double vertex = 0.7130 / (2.0 * 0.0015);
        CHECK(vertex == doctest::Approx(237.6666666667));
        const TcscCost c = tcsc_cost(vertex);
        CHECK(c.unit_cost_per_kvar == doctest::Approx(69.0218333333).epsilon(1e-9));
        CHECK(tcsc_cost(vertex - 1.0).unit_cost_per_kvar > c.unit_cost_per_kvar);
        CHECK(tcsc_cost(vertex + 1.0).unit_cost_per_kvar > c.unit_cost_per_kvar);
    }
    SUBCASE("negative range is a domain error") {
        CHECK_THROWS_AS(tcsc_cost(-1.0), Error);
    }
}

TEST_CASE("total cost is strictly increasing in the operating range") {
    // the derivative 0.0045 S^2 - 1.426 S + 153.75 has negative discriminant,
    // so larger ranges always cost more in total
    double prev = 0.0;
    for (double s = 5.0; s <= 500.0; s += 5.0) {
        const double total = tcsc_cost(s).total_cost;
        CHECK(total > prev);
        prev = total;
    }
}

TEST_CASE("operating range from a solved case") {
    const Network net = two_bus_case(0.5, 0.0, 0.0, 0.1);

    SUBCASE("zero device exchanges nothing") {
        const TcscDevice dev{0, 0.0, 0.0};
        const PowerFlowSolution sol = solve_case(net, apply_tcsc(net, dev));
        REQUIRE(sol.converged);
        CHECK(operating_range_from_solution(net, dev, sol) == doctest::Approx(0.0));
    }
    SUBCASE("unit current through 0.05 pu on a 100 MVA base gives 5 MVAr") {
        // engineered state: V chosen so |I| = 1 through x_eff = 0.05
        Network wide = two_bus_case(0.5, 0.0, 0.0, 0.1);
        const TcscDevice dev{0, -0.05, 0.0};
        PowerFlowSolution sol;
        sol.converged = true;
        sol.v_mag = Eigen::VectorXd::Ones(2);
        sol.v_angle = Eigen::VectorXd::Zero(2);
        sol.v_mag(1) = 1.0;
        // |vf - vt| * |1/(j 0.05)| = 1  =>  |vf - vt| = 0.05
        sol.v_mag(1) = 0.95;
        CHECK(operating_range_from_solution(wide, dev, sol) ==
              doctest::Approx(std::abs(-0.05) * 1.0 * 1.0 * 100.0));
    }
    SUBCASE("non-converged solution is unavailable") {
        const TcscDevice dev{0, -0.01, 0.0};
        PowerFlowSolution sol;
        sol.converged = false;
        CHECK_THROWS_AS(operating_range_from_solution(net, dev, sol), Error);
    }
}

TEST_CASE("capacitive compensation raises transfer on a lossless line") {
    // fixed angle difference, increasing compensation => strictly more power
    const Network net = two_bus_case(0.0, 0.0, 0.0, 0.1);
    Eigen::VectorXd v_mag(2), v_angle(2);
    v_mag << 1.0, 1.0;
    v_angle << 0.1, 0.0;
    double prev = 0.0;
    bool first = true;
    for (double frac = 0.0; frac >= -0.7; frac -= 0.1) {
        const auto overrides = apply_tcsc(net, TcscDevice{0, frac * 0.1, 0.0});
        const auto flows = compute_branch_flows(net, overrides, v_mag, v_angle);
        const double p = flows[0].sending.real();
        if (!first) CHECK(p > prev);
        prev = p;
        first = false;
    }
}
