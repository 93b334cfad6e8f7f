#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <set>

#include "gridopt/errors.hpp"
#include "gridopt/optimizer.hpp"

using namespace gridopt;

namespace {

double sphere(std::span<const double> x) {
    double sum = 0.0;
    for (const double v : x) sum += v * v;
    return sum;
}

double rosenbrock(std::span<const double> x) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = 1.0 - x[i];
        sum += 100.0 * a * a + b * b;
    }
    return sum;
}

OptimizerConfig config_for(std::size_t dim, double lo, double hi, int pop, int iters,
                           std::uint64_t seed) {
    OptimizerConfig config;
    config.population = pop;
    config.iterations = iters;
    config.seed = seed;
    config.bounds.assign(dim, {lo, hi});
    return config;
}

struct EnvGuard {
    std::string name;
    std::string saved;
    bool had = false;
    EnvGuard(const char* key, const char* value) : name(key) {
        if (const char* old = std::getenv(key)) {
            saved = old;
            had = true;
        }
        setenv(key, value, 1);
    }
    ~EnvGuard() {
        if (had) {
            setenv(name.c_str(), saved.c_str(), 1);
        } else {
            unsetenv(name.c_str());
        }
    }
};

}  // namespace

TEST_CASE("config validation") {
    OptimizerConfig config = config_for(2, -1, 1, 30, 10, 1);
    config.population = 1;
    CHECK_THROWS_AS(igsa_optimize(sphere, config), Error);
    config = config_for(2, -1, 1, 30, 0, 1);
    CHECK_THROWS_AS(fa_optimize(sphere, config), Error);
    config = config_for(0, -1, 1, 30, 10, 1);
    CHECK_THROWS_AS(igsa_optimize(sphere, config), Error);
    config = config_for(2, 1, -1, 30, 10, 1);
    CHECK_THROWS_AS(igsa_optimize(sphere, config), Error);
}

TEST_CASE("constant fitness is returned untouched and in bounds") {
    const auto flat = [](std::span<const double>) { return 5.0; };
    for (const bool use_fa : {false, true}) {
        const auto config = config_for(3, -2.0, 4.0, 10, 20, 7);
        const OptimizationResult r =
            use_fa ? fa_optimize(flat, config) : igsa_optimize(flat, config);
        CHECK(r.best_fitness == doctest::Approx(5.0));
        for (const double v : r.best_position) {
            CHECK(v >= -2.0);
            CHECK(v <= 4.0);
        }
    }
}

TEST_CASE("IGSA benchmark thresholds: sphere and rosenbrock") {
    // thresholds pre-validated with a reference implementation
    SUBCASE("10-d sphere under 1e-3") {
        const OptimizationResult r =
            igsa_optimize(sphere, config_for(10, -5, 5, 30, 500, 11));
        CHECK(r.best_fitness < 1e-3);
    }
    SUBCASE("2-d rosenbrock under 1e-2") {
        const OptimizationResult r =
            igsa_optimize(rosenbrock, config_for(2, -2, 2, 30, 1000, 11));
        CHECK(r.best_fitness < 1e-2);
    }
}

TEST_CASE("FA benchmark thresholds") {
    SUBCASE("10-d sphere under 1e-2") {
        const OptimizationResult r = fa_optimize(sphere, config_for(10, -5, 5, 30, 500, 11));
        CHECK(r.best_fitness < 1e-2);
    }
    SUBCASE("1-d quadratic recovered within 1e-3") {
        const auto f = [](std::span<const double> x) {
            return (x[0] - 0.3) * (x[0] - 0.3);
        };
        const OptimizationResult r = fa_optimize(f, config_for(1, 0, 1, 30, 200, 11));
        CHECK(std::abs(r.best_position[0] - 0.3) < 1e-3);
    }
}

TEST_CASE("determinism: identical seeds give identical traces") {
    for (const bool use_fa : {false, true}) {
        const auto config = config_for(4, -3, 3, 20, 60, 99);
        const OptimizationResult a =
            use_fa ? fa_optimize(sphere, config) : igsa_optimize(sphere, config);
        const OptimizationResult b =
            use_fa ? fa_optimize(sphere, config) : igsa_optimize(sphere, config);
        CHECK(a.best_fitness == b.best_fitness);
        CHECK(a.best_position == b.best_position);
        CHECK(a.trace.best_fitness == b.trace.best_fitness);
    }
}

TEST_CASE("elitism: trace best fitness is monotone non-increasing") {
    for (const bool use_fa : {false, true}) {
        const auto config = config_for(6, -4, 4, 15, 80, 5);
        const OptimizationResult r =
            use_fa ? fa_optimize(rosenbrock, config) : igsa_optimize(rosenbrock, config);
        for (std::size_t t = 1; t < r.trace.best_fitness.size(); ++t) {
            CHECK(r.trace.best_fitness[t] <= r.trace.best_fitness[t - 1]);
        }
        CHECK(r.trace.evaluations == 15u * 80u);
    }
}

TEST_CASE("bound respect: every evaluated position lies inside the box") {
    std::atomic<bool> violated{false};
    const double lo = -1.5, hi = 2.5;
    const auto audit = [&](std::span<const double> x) {
        double sum = 0.0;
        for (const double v : x) {
            if (v < lo || v > hi) violated = true;
            sum += (v - 1.0) * (v - 1.0);
        }
        return sum;
    };
    igsa_optimize(audit, config_for(5, lo, hi, 20, 100, 3));
    fa_optimize(audit, config_for(5, lo, hi, 20, 100, 3));
    CHECK_FALSE(violated.load());
}

TEST_CASE("coincident firefly pair only random-walks and stays in bounds") {
    OptimizerConfig config = config_for(2, -1.0, 1.0, 2, 50, 29);
    config.initial_positions = {{0.4, -0.2}, {0.4, -0.2}};
    std::vector<std::vector<double>> seen;
    const auto spy = [&](std::span<const double> x) {
        seen.emplace_back(x.begin(), x.end());
        return 1.0;  // equal brightness: neither firefly pulls the other
    };
    const OptimizationResult r = fa_optimize(spy, config);
    CHECK(r.best_fitness == doctest::Approx(1.0));
    for (const auto& pos : seen) {
        for (const double v : pos) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
    // they started together and drifted by the walk term afterwards
    CHECK(seen[0] == seen[1]);
    CHECK(seen[2] != seen[0]);
}

TEST_CASE("warm starts join the initial population") {
    OptimizerConfig config = config_for(2, -5, 5, 12, 1, 17);
    config.initial_positions = {{0.25, -0.75}};
    bool seen = false;
    const auto spy = [&](std::span<const double> x) {
        if (std::abs(x[0] - 0.25) < 1e-12 && std::abs(x[1] + 0.75) < 1e-12) seen = true;
        return sphere(x);
    };
    igsa_optimize(spy, config);
    CHECK(seen);
    // a warm start can only improve the best-ever record
    config.initial_positions = {{0.0, 0.0}};
    const OptimizationResult r = igsa_optimize(sphere, config);
    CHECK(r.best_fitness == doctest::Approx(0.0));
}

TEST_CASE("evaluate_population is identical sequential and parallel") {
    std::vector<std::vector<double>> positions;
    for (int i = 0; i < 30; ++i) {
        positions.push_back({0.1 * i, -0.05 * i, 1.0 / (i + 1)});
    }
    const FitnessFn f = [](std::span<const double> x) {
        return std::sin(x[0]) * std::cos(x[1]) + std::exp(-x[2]);
    };
    std::vector<double> sequential;
    {
        EnvGuard guard("GRIDOPT_THREADS", "0");
        sequential = evaluate_population(f, positions);
    }
    std::vector<double> parallel;
    {
        EnvGuard guard("GRIDOPT_THREADS", "8");
        parallel = evaluate_population(f, positions);
    }
    REQUIRE(sequential.size() == parallel.size());
    for (std::size_t i = 0; i < sequential.size(); ++i) {
        CHECK(sequential[i] == parallel[i]);  // bit-identical
    }
    SUBCASE("empty population gives an empty result") {
        CHECK(evaluate_population(f, {}).empty());
    }
}

TEST_CASE("whole optimizer runs are thread-count invariant") {
    const auto config = config_for(4, -2, 2, 16, 40, 23);
    OptimizationResult seq, par;
    {
        EnvGuard guard("GRIDOPT_THREADS", "0");
        seq = igsa_optimize(sphere, config);
    }
    {
        EnvGuard guard("GRIDOPT_THREADS", "8");
        par = igsa_optimize(sphere, config);
    }
    CHECK(seq.best_fitness == par.best_fitness);
    CHECK(seq.best_position == par.best_position);
    CHECK(seq.trace.best_fitness == par.trace.best_fitness);
}

TEST_CASE("exceptions from fitness propagate out of parallel evaluation") {
    EnvGuard guard("GRIDOPT_THREADS", "4");
    std::vector<std::vector<double>> positions(8, std::vector<double>{0.0});
    const FitnessFn bomb = [](std::span<const double>) -> double {
        throw_error(ErrorKind::Numeric, "boom");
    };
    CHECK_THROWS_AS(evaluate_population(bomb, positions), Error);
}

TEST_CASE("pattern-search refinement reaches the quadratic bowl bottom") {
    const std::vector<std::pair<double, double>> bounds{{-4.0, 4.0}, {-4.0, 4.0}};
    const std::vector<double> start{3.0, -2.5};
    const RefineResult r = refine_pattern_search(
        [](std::span<const double> x) {
            return (x[0] - 0.5) * (x[0] - 0.5) + 2.0 * (x[1] - 1.25) * (x[1] - 1.25);
        },
        start, bounds);
    CHECK(std::abs(r.position[0] - 0.5) < 1e-6);
    CHECK(std::abs(r.position[1] - 1.25) < 1e-6);
    SUBCASE("clamps to the box when the optimum is outside") {
        const RefineResult edge = refine_pattern_search(
            [](std::span<const double> x) { return -x[0]; }, start, bounds);
        CHECK(edge.position[0] == doctest::Approx(4.0));
    }
}

TEST_CASE("gravitational masses normalize and rank correctly") {
    SUBCASE("sums to one, best strictly above worst") {
        std::mt19937_64 rng(41);
        for (int round = 0; round < 50; ++round) {
            std::vector<double> fits(12);
            for (double& f : fits) {
                f = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 100.0;
            }
            const auto mass = gravitational_masses(fits);
            double sum = 0.0;
            std::size_t best = 0, worst = 0;
            for (std::size_t i = 0; i < fits.size(); ++i) {
                sum += mass[i];
                if (fits[i] < fits[best]) best = i;
                if (fits[i] > fits[worst]) worst = i;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
            CHECK(mass[best] > mass[worst]);
            CHECK(mass[worst] == doctest::Approx(0.0));
        }
    }
    SUBCASE("flat population shares mass evenly") {
        const std::vector<double> fits(8, 3.5);
        for (const double m : gravitational_masses(fits)) {
            CHECK(m == doctest::Approx(1.0 / 8.0));
        }
    }
}
