#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace gridopt {

/// Uniform doubles in [0,1) from a fully specified engine, so identical seeds
/// give identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::min<std::size_t>(static_cast<std::size_t>(uniform() * static_cast<double>(n)),
                                     n - 1);
    }

private:
    std::mt19937_64 engine_;
};

/// One population member. Positions and velocities live in the optimizer's
/// normalized unit-box coordinates.
struct Agent {
    std::vector<double> position;
    std::vector<double> velocity;
    double fitness = std::numeric_limits<double>::infinity();
    std::vector<double> best_position;
    double best_fitness = std::numeric_limits<double>::infinity();
};

struct OptimizerConfig {
    int population = 30;
    int iterations = 200;
    std::uint64_t seed = 1;
    std::vector<std::pair<double, double>> bounds;  // per-dimension [lo, hi]

    // gravitational search
    double g0 = 100.0;
    double alpha = 20.0;
    double inertia = 0.6;
    double c1 = 0.5;
    double c2 = 1.5;

    // firefly
    double beta0 = 1.0;
    double gamma = 1.0;
    double alpha0 = 0.2;
    double alpha_decay = 0.97;

    /// Optional warm starts placed into the initial population (clamped).
    std::vector<std::vector<double>> initial_positions;
};

void validate_config(const OptimizerConfig& config);

struct OptimizationTrace {
    std::vector<double> best_fitness;                 // per iteration, non-increasing
    std::vector<std::vector<double>> best_position;   // per iteration
    std::size_t evaluations = 0;
    double wall_seconds = 0.0;
};

struct OptimizationResult {
    std::vector<double> best_position;
    double best_fitness = std::numeric_limits<double>::infinity();
    OptimizationTrace trace;
};

using FitnessFn = std::function<double(std::span<const double>)>;

/// Worker-thread cap for population evaluation, from GRIDOPT_THREADS.
/// Unset, 0, or 1 means sequential.
int evaluation_thread_cap();

/// Element-wise fitness evaluation, optionally fanned out across threads.
/// Results are assigned by agent index, so the outcome is identical to the
/// sequential loop no matter the thread count.
std::vector<double> evaluate_population(const FitnessFn& fitness,
                                        std::span<const std::vector<double>> positions);

/// Gravitational masses from raw fitness values (minimization): worst maps to
/// zero, best to the largest share, normalized to sum to one. A flat
/// population splits mass evenly.
std::vector<double> gravitational_masses(std::span<const double> fitness);

/// Gravitational search with a global-best social term: canonical masses,
/// Kbest elite shrinking linearly to one, G decaying exponentially, and a
/// velocity blend v <- w v + c1 r1 a + c2 r2 (gbest - x).
OptimizationResult igsa_optimize(const FitnessFn& fitness, const OptimizerConfig& config);

/// Canonical firefly algorithm: each firefly moves toward every brighter one
/// with attractiveness beta0 exp(-gamma r^2) plus a decaying random walk; the
/// brightest wander randomly.
OptimizationResult fa_optimize(const FitnessFn& fitness, const OptimizerConfig& config);

struct RefineOptions {
    double initial_step = 0.05;  // fraction of each dimension's span
    double min_step = 1e-9;
    std::size_t max_evaluations = 50000;
};

struct RefineResult {
    std::vector<double> position;
    double fitness = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
};

/// Deterministic compass (pattern) search from a start point: per-dimension
/// +/- probes, step halved when a sweep stalls. Used to polish a metaheuristic
/// result to its local optimum; involves no randomness.
RefineResult refine_pattern_search(const FitnessFn& fitness,
                                   std::span<const double> start,
                                   std::span<const std::pair<double, double>> bounds,
                                   const RefineOptions& options = {});

}  // namespace gridopt
