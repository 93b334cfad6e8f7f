#include "gridopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include "gridopt/errors.hpp"

namespace gridopt {

void validate_config(const OptimizerConfig& config) {
    if (config.population < 2) {
        throw_error(ErrorKind::Config, "population must be at least 2");
    }
    if (config.iterations < 1) {
        throw_error(ErrorKind::Config, "iterations must be at least 1");
    }
    if (config.bounds.empty()) {
        throw_error(ErrorKind::Config, "bounds must not be empty");
    }
    for (const auto& [lo, hi] : config.bounds) {
        if (!(lo < hi)) {
            throw_error(ErrorKind::Config, "each bound must satisfy lo < hi");
        }
    }
}

int evaluation_thread_cap() {
    const char* env = std::getenv("GRIDOPT_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    const long v = std::strtol(env, nullptr, 10);
    if (v <= 1) return 1;
    return static_cast<int>(std::min<long>(v, 64));
}

std::vector<double> evaluate_population(const FitnessFn& fitness,
                                        std::span<const std::vector<double>> positions) {
    std::vector<double> out(positions.size());
    const int cap = evaluation_thread_cap();
    const int workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(cap), positions.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < positions.size(); ++i) {
            out[i] = fitness(positions[i]);
        }
        return out;
    }

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = static_cast<std::size_t>(w); i < positions.size();
                     i += static_cast<std::size_t>(workers)) {
                    out[i] = fitness(positions[i]);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

namespace {

/// Latin-hypercube init in the unit box: per dimension, one sample per
/// shuffled stratum. Deterministic in the rng stream.
std::vector<std::vector<double>> latin_hypercube(Rng& rng, int population, std::size_t dim) {
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(population),
                                         std::vector<double>(dim, 0.0));
    std::vector<std::size_t> perm(static_cast<std::size_t>(population));
    for (std::size_t d = 0; d < dim; ++d) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = perm.size() - 1; i > 0; --i) {
            const std::size_t j = rng.index(i + 1);
            std::swap(perm[i], perm[j]);
        }
        for (std::size_t i = 0; i < perm.size(); ++i) {
            pts[i][d] = (static_cast<double>(perm[i]) + rng.uniform()) /
                        static_cast<double>(population);
        }
    }
    return pts;
}

struct Domain {
    std::vector<double> lo, hi, span;

    explicit Domain(const std::vector<std::pair<double, double>>& bounds) {
        for (const auto& [l, h] : bounds) {
            lo.push_back(l);
            hi.push_back(h);
            span.push_back(h - l);
        }
    }

    std::vector<double> denormalize(std::span<const double> unit) const {
        std::vector<double> x(unit.size());
        for (std::size_t d = 0; d < unit.size(); ++d) {
            // Clamp away the one-ulp overshoot of lo + 1.0 * (hi - lo).
            x[d] = std::clamp(lo[d] + unit[d] * span[d], lo[d], hi[d]);
        }
        return x;
    }

    std::vector<double> normalize(std::span<const double> x) const {
        std::vector<double> unit(x.size());
        for (std::size_t d = 0; d < x.size(); ++d) {
            unit[d] = std::clamp((x[d] - lo[d]) / span[d], 0.0, 1.0);
        }
        return unit;
    }
};

std::vector<Agent> initial_agents(Rng& rng, const OptimizerConfig& config,
                                  const Domain& domain) {
    const std::size_t dim = config.bounds.size();
    auto pts = latin_hypercube(rng, config.population, dim);
    const std::size_t n_seeded =
        std::min<std::size_t>(config.initial_positions.size(), pts.size());
    for (std::size_t i = 0; i < n_seeded; ++i) {
        if (config.initial_positions[i].size() != dim) {
            throw_error(ErrorKind::Config, "initial position has wrong dimension");
        }
        pts[i] = domain.normalize(config.initial_positions[i]);
    }
    std::vector<Agent> agents(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        agents[i].position = std::move(pts[i]);
        agents[i].velocity.assign(dim, 0.0);
    }
    return agents;
}

struct Swarm {
    std::vector<Agent> agents;
    std::vector<std::vector<double>> scratch_positions;
    std::size_t best_index = 0;  // owner of the global best, lowest index on ties

    /// Evaluates everyone, refreshes personal bests (strictly-better updates,
    /// so ties keep the earlier record) and the global-best owner.
    void evaluate(const FitnessFn& fitness, const Domain& domain, OptimizationTrace& trace) {
        scratch_positions.resize(agents.size());
        for (std::size_t i = 0; i < agents.size(); ++i) {
            scratch_positions[i] = agents[i].position;
        }
        const std::vector<double> fits = evaluate_population(
            [&](std::span<const double> unit) { return fitness(domain.denormalize(unit)); },
            scratch_positions);
        trace.evaluations += fits.size();
        for (std::size_t i = 0; i < agents.size(); ++i) {
            agents[i].fitness = fits[i];
            if (fits[i] < agents[i].best_fitness) {
                agents[i].best_fitness = fits[i];
                agents[i].best_position = agents[i].position;
            }
        }
        for (std::size_t i = 0; i < agents.size(); ++i) {
            if (agents[i].best_fitness < agents[best_index].best_fitness) {
                best_index = i;
            }
        }
        trace.best_fitness.push_back(agents[best_index].best_fitness);
        trace.best_position.push_back(domain.denormalize(agents[best_index].best_position));
    }

    const std::vector<double>& gbest() const { return agents[best_index].best_position; }
    double gbest_fitness() const { return agents[best_index].best_fitness; }
};

OptimizationResult finish(const Swarm& swarm, const Domain& domain, OptimizationTrace trace,
                          std::chrono::steady_clock::time_point t0) {
    OptimizationResult result;
    result.best_fitness = swarm.gbest_fitness();
    result.best_position = domain.denormalize(swarm.gbest());
    result.trace = std::move(trace);
    result.trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace

std::vector<double> gravitational_masses(std::span<const double> fitness) {
    std::vector<double> mass(fitness.size());
    if (fitness.empty()) return mass;
    double f_best = fitness[0], f_worst = fitness[0];
    for (const double f : fitness) {
        f_best = std::min(f_best, f);
        f_worst = std::max(f_worst, f);
    }
    if (f_best == f_worst) {
        std::fill(mass.begin(), mass.end(), 1.0 / static_cast<double>(mass.size()));
        return mass;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        mass[i] = (fitness[i] - f_worst) / (f_best - f_worst);
        sum += mass[i];
    }
    for (double& m : mass) m /= sum;
    return mass;
}

OptimizationResult igsa_optimize(const FitnessFn& fitness, const OptimizerConfig& config) {
    validate_config(config);
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t dim = config.bounds.size();
    const Domain domain(config.bounds);
    Rng rng(config.seed);
    constexpr double kDistanceFloor = 1e-12;

    Swarm swarm;
    swarm.agents = initial_agents(rng, config, domain);
    const std::size_t pop = swarm.agents.size();
    OptimizationTrace trace;

    std::vector<double> mass(pop);
    std::vector<std::vector<double>> accel(pop, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> order(pop);

    for (int t = 1; t <= config.iterations; ++t) {
        swarm.evaluate(fitness, domain, trace);

        const double g = config.g0 *
                         std::exp(-config.alpha * static_cast<double>(t) /
                                  static_cast<double>(config.iterations));
        std::vector<double> fits(pop);
        for (std::size_t i = 0; i < pop; ++i) fits[i] = swarm.agents[i].fitness;
        mass = gravitational_masses(fits);

        // Elite set shrinks linearly from the whole population down to one.
        const auto kbest = static_cast<std::size_t>(
            config.population - (config.population - 1) * t / config.iterations);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double fa = swarm.agents[a].fitness;
            const double fb = swarm.agents[b].fitness;
            return fa != fb ? fa < fb : a < b;
        });

        for (std::size_t i = 0; i < pop; ++i) {
            const auto& xi = swarm.agents[i].position;
            std::fill(accel[i].begin(), accel[i].end(), 0.0);
            for (std::size_t e = 0; e < kbest; ++e) {
                const std::size_t j = order[e];
                if (j == i) continue;
                const auto& xj = swarm.agents[j].position;
                double r2 = 0.0;
                for (std::size_t d = 0; d < dim; ++d) {
                    const double diff = xj[d] - xi[d];
                    r2 += diff * diff;
                }
                const double coef = g * mass[j] / (std::sqrt(r2) + kDistanceFloor);
                for (std::size_t d = 0; d < dim; ++d) {
                    accel[i][d] += rng.uniform() * coef * (xj[d] - xi[d]);
                }
            }
        }

        const std::vector<double>& gbest = swarm.gbest();
        for (std::size_t i = 0; i < pop; ++i) {
            Agent& agent = swarm.agents[i];
            for (std::size_t d = 0; d < dim; ++d) {
                agent.velocity[d] = config.inertia * agent.velocity[d] +
                                    config.c1 * rng.uniform() * accel[i][d] +
                                    config.c2 * rng.uniform() * (gbest[d] - agent.position[d]);
                double x = agent.position[d] + agent.velocity[d];
                if (x < 0.0) {
                    x = 0.0;
                    agent.velocity[d] = 0.0;  // avoid boundary sticking
                } else if (x > 1.0) {
                    x = 1.0;
                    agent.velocity[d] = 0.0;
                }
                agent.position[d] = x;
            }
        }
    }

    return finish(swarm, domain, std::move(trace), t0);
}

OptimizationResult fa_optimize(const FitnessFn& fitness, const OptimizerConfig& config) {
    validate_config(config);
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t dim = config.bounds.size();
    const Domain domain(config.bounds);
    Rng rng(config.seed);

    Swarm swarm;
    swarm.agents = initial_agents(rng, config, domain);
    const std::size_t pop = swarm.agents.size();
    OptimizationTrace trace;
    double walk = config.alpha0;

    for (int t = 1; t <= config.iterations; ++t) {
        swarm.evaluate(fitness, domain, trace);

        // Moves use this generation's brightness; positions update in place.
        for (std::size_t i = 0; i < pop; ++i) {
            Agent& agent = swarm.agents[i];
            bool attracted = false;
            for (std::size_t j = 0; j < pop; ++j) {
                if (!(swarm.agents[j].fitness < agent.fitness)) continue;  // dimmer never pulls
                attracted = true;
                const auto& xj = swarm.agents[j].position;
                double r2 = 0.0;
                for (std::size_t d = 0; d < dim; ++d) {
                    const double diff = xj[d] - agent.position[d];
                    r2 += diff * diff;
                }
                const double beta = config.beta0 * std::exp(-config.gamma * r2);
                for (std::size_t d = 0; d < dim; ++d) {
                    const double x = agent.position[d] + beta * (xj[d] - agent.position[d]) +
                                     walk * (rng.uniform() - 0.5);
                    agent.position[d] = std::clamp(x, 0.0, 1.0);
                }
            }
            if (!attracted) {
                // The brightest (and exact ties) wander.
                for (std::size_t d = 0; d < dim; ++d) {
                    const double x = agent.position[d] + walk * (rng.uniform() - 0.5);
                    agent.position[d] = std::clamp(x, 0.0, 1.0);
                }
            }
        }
        walk *= config.alpha_decay;
    }

    return finish(swarm, domain, std::move(trace), t0);
}

RefineResult refine_pattern_search(const FitnessFn& fitness, std::span<const double> start,
                                   std::span<const std::pair<double, double>> bounds,
                                   const RefineOptions& options) {
    if (start.size() != bounds.size()) {
        throw_error(ErrorKind::Config, "refine start has wrong dimension");
    }
    RefineResult best;
    best.position.assign(start.begin(), start.end());
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        best.position[d] = std::clamp(best.position[d], bounds[d].first, bounds[d].second);
    }
    best.fitness = fitness(best.position);
    best.evaluations = 1;

    double step = options.initial_step;
    std::vector<double> probe = best.position;
    while (step >= options.min_step && best.evaluations < options.max_evaluations) {
        bool improved = false;
        for (std::size_t d = 0; d < bounds.size(); ++d) {
            const double span = bounds[d].second - bounds[d].first;
            for (const double dir : {+1.0, -1.0}) {
                const double x = std::clamp(best.position[d] + dir * step * span,
                                            bounds[d].first, bounds[d].second);
                if (x == best.position[d]) continue;
                probe = best.position;
                probe[d] = x;
                const double f = fitness(probe);
                ++best.evaluations;
                if (f < best.fitness) {
                    best.fitness = f;
                    best.position[d] = x;
                    improved = true;
                    break;  // greedy: keep the winning direction, next dimension
                }
            }
            if (best.evaluations >= options.max_evaluations) break;
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

}  // namespace gridopt
