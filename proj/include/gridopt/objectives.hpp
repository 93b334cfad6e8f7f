#pragma once

#include <span>
#include <vector>

#include "gridopt/network.hpp"
#include "gridopt/power_flow.hpp"
#include "gridopt/tcsc.hpp"

namespace gridopt {

/// Exterior-penalty weights. w_diverge must dwarf any feasible objective so a
/// failed power flow can never win a fitness comparison.
struct PenaltyWeights {
    double w_vbound = 1e4;   // $/pu^2 on voltage-band violations
    double w_pbound = 1e4;   // $/pu^2 on generator active-power violations
    double w_line = 1e3;     // on squared overload ratio excess
    double w_diverge = 1e9;  // flat penalty for a non-converged solve
};

void validate_weights(const PenaltyWeights& weights);

/// Load multipliers for stress scans. Must be non-empty, all positive, and
/// include the nominal factor 1.0.
struct LoadFactorSet {
    std::vector<double> factors{1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
};

void validate_factors(const LoadFactorSet& factors);

/// Quadratic fuel cost of every costed generator at its p_gen, in $/hr.
/// Throws Config if any generator lacks coefficients.
double fuel_cost(const Network& network);
double fuel_cost(std::span<const Generator> generators, double base_mva);

/// Sum of absolute per-bus deviations between a reference profile and an
/// observed one.
double voltage_deviation(std::span<const double> v_normal, std::span<const double> v_actual);

struct BranchPfi {
    std::size_t branch_index = 0;
    double pfi = 0.0;
};

/// Power-flow index per eligible branch: the worst loading ratio seen across
/// the load-factor grid. A diverged factor stamps every eligible branch with
/// the w_diverge sentinel (maximal stress evidence). Eligible means a rated,
/// non-transformer line.
std::vector<BranchPfi> power_flow_index(const Network& network, const AdmittanceMatrix& ybus,
                                        const LoadFactorSet& factors,
                                        const PenaltyWeights& weights,
                                        const SolverOptions& options = {});

/// Quadratic exterior penalty over voltage bands, generator active-power
/// bounds, and line overloads, plus the divergence sentinel.
double constraint_penalty(const Network& network, const PowerFlowSolution& solution,
                          const PenaltyWeights& weights);

/// Economic-dispatch fitness: controls are the non-slack generator active
/// set-points (pu) followed by the PV-bus voltage set-points. Fitness is fuel
/// cost plus constraint penalty; the slack unit absorbs the power balance.
class DispatchProblem {
public:
    DispatchProblem(Network network, std::vector<ReactanceOverride> overrides,
                    PenaltyWeights weights, SolverOptions options = {});

    /// Appends the reactance of an installed series compensator to the control
    /// vector, bounded by its admissible band. The device is operated, not
    /// resized: re-dispatch may swing it anywhere hardware allows.
    void enable_tcsc_control(std::size_t branch_index);
    bool has_tcsc_control() const { return tcsc_branch_.has_value(); }

    std::size_t dimension() const { return bounds_.size(); }
    const std::vector<std::pair<double, double>>& bounds() const { return bounds_; }

    /// The network's current dispatch and set-points, clamped into the box.
    /// With a device control enabled, the final entry defaults to x_tcsc = 0.
    std::vector<double> start_point() const;

    struct Eval {
        double fitness = 0.0;
        double fuel = 0.0;
        double penalty = 0.0;
        double x_tcsc = 0.0;      // operated device setting, when controlled
        Network dispatched;       // network with controls applied, slack updated
        PowerFlowSolution solution;
    };

    Eval evaluate(std::span<const double> controls) const;
    double fitness(std::span<const double> controls) const { return evaluate(controls).fitness; }

    /// Applies controls and the solved slack output to a copy of the network.
    Network apply_controls(std::span<const double> controls) const;

private:
    std::vector<ReactanceOverride> overrides_for(std::span<const double> controls) const;

    Network network_;
    std::vector<ReactanceOverride> overrides_;
    PenaltyWeights weights_;
    SolverOptions options_;
    std::vector<std::size_t> control_gens_;   // generator indices, slack excluded
    std::vector<std::size_t> control_buses_;  // PV bus positions
    std::optional<std::size_t> tcsc_branch_;
    std::vector<std::pair<double, double>> bounds_;
};

/// Stage-2 sizing fitness: w1 * V_d + w2 * (device cost in M$) + penalty,
/// evaluated on the stressed network with the device inserted. V_d compares
/// the solved profile against the normal-condition profile.
class SizingProblem {
public:
    SizingProblem(Network stressed, std::size_t branch_index, std::vector<double> v_normal,
                  PenaltyWeights weights, SolverOptions options = {}, double w1 = 1.0,
                  double w2 = 0.01);

    std::pair<double, double> bounds() const;  // admissible x_tcsc band

    struct Eval {
        double fitness = 0.0;
        double deviation = 0.0;
        double cost_term = 0.0;
        double penalty = 0.0;
        TcscDevice device;
        PowerFlowSolution solution;
    };

    Eval evaluate(double x_tcsc) const;
    double fitness(double x_tcsc) const { return evaluate(x_tcsc).fitness; }

private:
    Network stressed_;
    std::size_t branch_index_;
    std::vector<double> v_normal_;
    PenaltyWeights weights_;
    SolverOptions options_;
    double w1_, w2_;
};

}  // namespace gridopt
