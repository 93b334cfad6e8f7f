#include "gridopt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridopt/errors.hpp"

namespace gridopt {

void validate_weights(const PenaltyWeights& weights) {
    if (weights.w_vbound < 0 || weights.w_pbound < 0 || weights.w_line < 0 ||
        weights.w_diverge < 0) {
        throw_error(ErrorKind::Config, "penalty weights must be non-negative");
    }
}

void validate_factors(const LoadFactorSet& factors) {
    if (factors.factors.empty()) {
        throw_error(ErrorKind::Config, "load factor set is empty");
    }
    bool has_nominal = false;
    for (const double f : factors.factors) {
        if (!(f > 0.0)) {
            throw_error(ErrorKind::Config, "load factors must be positive");
        }
        has_nominal = has_nominal || f == 1.0;
    }
    if (!has_nominal) {
        throw_error(ErrorKind::Config, "load factor set must contain 1.0");
    }
}

double fuel_cost(std::span<const Generator> generators, double base_mva) {
    double total = 0.0;
    for (const Generator& gen : generators) {
        if (!gen.has_cost()) {
            throw_error(ErrorKind::Config,
                        "generator at bus " + std::to_string(gen.bus) +
                            " has no cost coefficients");
        }
        const double p_mw = gen.p_gen * base_mva;
        total += gen.cost_a + gen.cost_b * p_mw + gen.cost_c * p_mw * p_mw;
    }
    return total;
}

double fuel_cost(const Network& network) {
    return fuel_cost(network.generators, network.base_mva);
}

double voltage_deviation(std::span<const double> v_normal, std::span<const double> v_actual) {
    if (v_normal.size() != v_actual.size()) {
        throw_error(ErrorKind::Config, "voltage profiles have different lengths");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < v_normal.size(); ++i) {
        sum += std::abs(v_normal[i] - v_actual[i]);
    }
    return sum;
}

std::vector<BranchPfi> power_flow_index(const Network& network, const AdmittanceMatrix& ybus,
                                        const LoadFactorSet& factors,
                                        const PenaltyWeights& weights,
                                        const SolverOptions& options) {
    validate_factors(factors);
    std::vector<BranchPfi> out;
    for (std::size_t k = 0; k < network.branches.size(); ++k) {
        if (tcsc_eligible(network.branches[k])) {
            out.push_back(BranchPfi{k, 0.0});
        }
    }

    for (const double lambda : factors.factors) {
        const Network scaled = scale_loads(network, lambda);
        PowerFlowSolution sol;
        bool failed = false;
        try {
            sol = solve_newton_raphson(scaled, ybus, options);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Numeric) throw;
            failed = true;
        }
        if (failed || !sol.converged) {
            // No flow picture exists for this factor; treat it as maximal
            // stress evidence on every candidate.
            for (BranchPfi& entry : out) {
                entry.pfi = std::max(entry.pfi, weights.w_diverge);
            }
            continue;
        }
        const auto flows = compute_branch_flows(scaled, {}, sol.v_mag, sol.v_angle);
        for (BranchPfi& entry : out) {
            const Branch& br = network.branches[entry.branch_index];
            const double s_mva = std::max(std::abs(flows[entry.branch_index].sending),
                                          std::abs(flows[entry.branch_index].receiving)) *
                                 network.base_mva;
            entry.pfi = std::max(entry.pfi, s_mva / br.rating);
        }
    }
    return out;
}

double constraint_penalty(const Network& network, const PowerFlowSolution& solution,
                          const PenaltyWeights& weights) {
    double penalty = 0.0;
    if (!solution.converged) {
        penalty += weights.w_diverge;
    }

    const auto n = std::min<std::size_t>(network.buses.size(),
                                         static_cast<std::size_t>(solution.v_mag.size()));
    for (std::size_t i = 0; i < n; ++i) {
        const Bus& bus = network.buses[i];
        const double v = solution.v_mag(static_cast<Eigen::Index>(i));
        const double viol = std::max({0.0, v - bus.v_max, bus.v_min - v});
        penalty += weights.w_vbound * viol * viol;
    }

    // Generator active power: the slack unit's output is whatever the solution
    // demands, so read it from the solved injection.
    for (const Generator& gen : network.generators) {
        const auto idx = network.bus_index(gen.bus);
        if (!idx) continue;
        double p = gen.p_gen;
        if (network.buses[*idx].kind == BusKind::Slack &&
            solution.p_inj.size() == static_cast<Eigen::Index>(network.buses.size())) {
            p = solution.p_inj(static_cast<Eigen::Index>(*idx)) + network.buses[*idx].p_load;
        }
        const double viol = std::max({0.0, p - gen.p_max, gen.p_min - p});
        if (std::isfinite(viol)) {
            penalty += weights.w_pbound * viol * viol;
        }
    }

    if (!solution.branch_flows.empty()) {
        for (const Overload& ov : check_line_limits(network, solution.branch_flows)) {
            const double excess = ov.ratio - 1.0;
            penalty += weights.w_line * excess * excess;
        }
    }
    return penalty;
}

DispatchProblem::DispatchProblem(Network network, std::vector<ReactanceOverride> overrides,
                                 PenaltyWeights weights, SolverOptions options)
    : network_(std::move(network)),
      overrides_(std::move(overrides)),
      weights_(weights),
      options_(options) {
    validate_weights(weights_);
    validate_options(options_);
    const std::size_t slack = network_.slack_index();
    for (std::size_t g = 0; g < network_.generators.size(); ++g) {
        const Generator& gen = network_.generators[g];
        if (!gen.has_cost()) {
            throw_error(ErrorKind::Config,
                        "generator at bus " + std::to_string(gen.bus) +
                            " has no cost coefficients");
        }
        const auto idx = network_.bus_index(gen.bus);
        if (idx && *idx == slack) continue;
        if (!std::isfinite(gen.p_min) || !std::isfinite(gen.p_max)) {
            throw_error(ErrorKind::Config,
                        "generator at bus " + std::to_string(gen.bus) +
                            " needs finite active-power bounds for dispatch");
        }
        control_gens_.push_back(g);
        bounds_.emplace_back(gen.p_min, gen.p_max);
    }
    for (std::size_t b = 0; b < network_.buses.size(); ++b) {
        if (network_.buses[b].kind == BusKind::PV) {
            control_buses_.push_back(b);
            bounds_.emplace_back(network_.buses[b].v_min, network_.buses[b].v_max);
        }
    }
    if (bounds_.empty()) {
        throw_error(ErrorKind::Config, "dispatch problem has no control variables");
    }
}

void DispatchProblem::enable_tcsc_control(std::size_t branch_index) {
    if (tcsc_branch_) {
        throw_error(ErrorKind::Config, "device control already enabled");
    }
    if (branch_index >= network_.branches.size() ||
        !tcsc_eligible(network_.branches[branch_index])) {
        throw_error(ErrorKind::Config, "device control targets an ineligible branch");
    }
    for (const ReactanceOverride& ov : overrides_) {
        if (ov.branch_index == branch_index) {
            throw_error(ErrorKind::Config,
                        "device control conflicts with a fixed reactance override");
        }
    }
    tcsc_branch_ = branch_index;
    const double x_line = network_.branches[branch_index].x;
    bounds_.emplace_back(tcsc_lower_bound(x_line), tcsc_upper_bound(x_line));
}

std::vector<double> DispatchProblem::start_point() const {
    std::vector<double> x;
    x.reserve(bounds_.size());
    for (const std::size_t g : control_gens_) {
        x.push_back(network_.generators[g].p_gen);
    }
    for (const std::size_t b : control_buses_) {
        x.push_back(network_.buses[b].v_mag);
    }
    if (tcsc_branch_) x.push_back(0.0);
    for (std::size_t d = 0; d < x.size(); ++d) {
        x[d] = std::clamp(x[d], bounds_[d].first, bounds_[d].second);
    }
    return x;
}

Network DispatchProblem::apply_controls(std::span<const double> controls) const {
    if (controls.size() != bounds_.size()) {
        throw_error(ErrorKind::Config, "control vector has wrong dimension");
    }
    Network net = network_;
    std::size_t d = 0;
    for (const std::size_t g : control_gens_) {
        net.generators[g].p_gen = controls[d++];
    }
    for (const std::size_t b : control_buses_) {
        net.buses[b].v_mag = controls[d++];
    }
    return net;
}

std::vector<ReactanceOverride> DispatchProblem::overrides_for(
    std::span<const double> controls) const {
    if (!tcsc_branch_) return overrides_;
    auto overrides = overrides_;
    const auto device_override =
        apply_tcsc(network_, TcscDevice{*tcsc_branch_, controls.back(), 0.0});
    overrides.insert(overrides.end(), device_override.begin(), device_override.end());
    return overrides;
}

DispatchProblem::Eval DispatchProblem::evaluate(std::span<const double> controls) const {
    Eval out;
    out.dispatched = apply_controls(controls);
    if (tcsc_branch_) out.x_tcsc = controls.back();
    out.solution = try_solve_case(out.dispatched, overrides_for(controls), options_);

    if (out.solution.converged) {
        // Fold the solved slack output back into the dispatch.
        const std::size_t slack = out.dispatched.slack_index();
        const double slack_p =
            out.solution.p_inj(static_cast<Eigen::Index>(slack)) +
            out.dispatched.buses[slack].p_load;
        for (Generator& gen : out.dispatched.generators) {
            const auto idx = out.dispatched.bus_index(gen.bus);
            if (idx && *idx == slack) gen.p_gen = slack_p;
        }
    }
    out.fuel = fuel_cost(out.dispatched);
    out.penalty = constraint_penalty(out.dispatched, out.solution, weights_);
    out.fitness = out.fuel + out.penalty;
    return out;
}

SizingProblem::SizingProblem(Network stressed, std::size_t branch_index,
                             std::vector<double> v_normal, PenaltyWeights weights,
                             SolverOptions options, double w1, double w2)
    : stressed_(std::move(stressed)),
      branch_index_(branch_index),
      v_normal_(std::move(v_normal)),
      weights_(weights),
      options_(options),
      w1_(w1),
      w2_(w2) {
    validate_weights(weights_);
    validate_options(options_);
    if (branch_index_ >= stressed_.branches.size()) {
        throw_error(ErrorKind::Config, "sizing target branch does not exist");
    }
    if (!tcsc_eligible(stressed_.branches[branch_index_])) {
        throw_error(ErrorKind::Config, "sizing target branch is not TCSC-eligible");
    }
    if (v_normal_.size() != stressed_.buses.size()) {
        throw_error(ErrorKind::Config, "normal voltage profile has wrong length");
    }
}

std::pair<double, double> SizingProblem::bounds() const {
    const double x_line = stressed_.branches[branch_index_].x;
    return {tcsc_lower_bound(x_line), tcsc_upper_bound(x_line)};
}

SizingProblem::Eval SizingProblem::evaluate(double x_tcsc) const {
    Eval out;
    out.device = TcscDevice{branch_index_, x_tcsc, 0.0};
    const auto overrides = apply_tcsc(stressed_, out.device);
    out.solution = try_solve_case(stressed_, overrides, options_);

    if (out.solution.converged) {
        out.deviation = voltage_deviation(
            v_normal_, std::span<const double>(out.solution.v_mag.data(),
                                               static_cast<std::size_t>(out.solution.v_mag.size())));
        out.device.operating_range_mvar =
            operating_range_from_solution(stressed_, out.device, out.solution);
    } else {
        out.deviation = 0.0;
        out.device.operating_range_mvar = 0.0;
    }
    // Device cost enters in M$ so it acts as a tiebreak against V_d in pu.
    out.cost_term = tcsc_cost(out.device.operating_range_mvar).total_cost / 1e6;
    out.penalty = constraint_penalty(stressed_, out.solution, weights_);
    out.fitness = w1_ * out.deviation + w2_ * out.cost_term + out.penalty;
    return out;
}

}  // namespace gridopt
