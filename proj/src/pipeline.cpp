#include "gridopt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gridopt/errors.hpp"

namespace gridopt {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

/// splitmix64 step; used to derive independent stage seeds from the master.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + salt * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Published 30-bus benchmark figures printed for side-by-side comparison.
struct ReferenceValues {
    double generation_before = 283.4;
    double generation_stressed_no_tcsc = 293.9;
    double loss_before_mw = 6.8095;
    double loss_stressed_no_tcsc_mw = 8.641;
    double loss_with_tcsc_mw = 2.6351;
    double cost_before = 828.3393;
    double cost_stressed_no_tcsc = 810.2864;
    double cost_with_tcsc = 795.675;
    double tcsc_unit_cost = 138.4178;
};

constexpr ReferenceValues kReference{};

std::optional<double> scenario_fuel_cost(const Network& dispatched) {
    for (const Generator& gen : dispatched.generators) {
        if (!gen.has_cost()) return std::nullopt;
    }
    return fuel_cost(dispatched);
}

/// Folds the solved injections back into the dispatch: every generating bus
/// reports what it actually produced, so generation minus load equals the
/// branch-loss total to rounding rather than to solver tolerance. The residual
/// of a multi-unit bus lands on its first unit.
Network settle_dispatch(const Network& network, const PowerFlowSolution& sol) {
    Network out = network;
    if (!sol.converged) return out;
    std::vector<bool> settled(out.buses.size(), false);
    for (Generator& gen : out.generators) {
        const auto idx = out.bus_index(gen.bus);
        if (!idx || settled[*idx]) continue;
        settled[*idx] = true;
        const auto i = static_cast<Eigen::Index>(*idx);
        double p_other = 0.0, q_other = 0.0;
        for (const Generator& peer : out.generators) {
            if (&peer != &gen && peer.bus == gen.bus) {
                p_other += peer.p_gen;
                q_other += peer.q_gen;
            }
        }
        gen.p_gen = sol.p_inj(i) + out.buses[*idx].p_load - p_other;
        if (out.buses[*idx].kind != BusKind::PQ) {
            gen.q_gen = sol.q_inj(i) + out.buses[*idx].q_load - q_other;
        }
    }
    return out;
}

ScenarioReport make_scenario(std::string name, double lambda, const Network& network,
                             const PowerFlowSolution& sol) {
    ScenarioReport rep;
    rep.name = std::move(name);
    rep.load_factor = lambda;
    rep.converged = sol.converged;
    rep.iterations = sol.iterations;
    rep.loss_mw = sol.total_loss_mw;

    const Network settled = settle_dispatch(network, sol);
    double gen_mw = 0.0;
    for (const Generator& gen : settled.generators) {
        gen_mw += gen.p_gen * settled.base_mva;
        rep.dispatch_mw.emplace_back(gen.bus, gen.p_gen * settled.base_mva);
    }
    rep.total_generation_mw = gen_mw;
    rep.fuel_cost_per_hr = scenario_fuel_cost(settled);
    rep.v_mag.assign(sol.v_mag.data(), sol.v_mag.data() + sol.v_mag.size());
    rep.v_angle.assign(sol.v_angle.data(), sol.v_angle.data() + sol.v_angle.size());
    return rep;
}

DispatchOutcome run_dispatch(const Network& network, const StudyConfig& config,
                             std::uint64_t seed, std::optional<std::size_t> operated_branch,
                             const std::vector<std::vector<double>>& extra_starts) {
    DispatchProblem problem(network, {}, config.weights, config.solver);
    if (operated_branch) problem.enable_tcsc_control(*operated_branch);
    OptimizerConfig opt = config.dispatch;
    opt.bounds = problem.bounds();
    opt.seed = seed;
    opt.initial_positions.clear();
    opt.initial_positions.push_back(problem.start_point());
    for (const auto& start : extra_starts) {
        if (start.size() == problem.dimension()) {
            opt.initial_positions.push_back(start);
        }
    }

    const auto fn = [&problem](std::span<const double> x) { return problem.fitness(x); };
    const OptimizationResult best = igsa_optimize(fn, opt);
    // Deterministic local polish so both study scenarios reach their actual
    // optimum and the comparison is not clouded by search noise.
    const RefineResult refined = refine_pattern_search(fn, best.best_position, opt.bounds);

    const auto eval = problem.evaluate(refined.position);
    DispatchOutcome out;
    out.fuel = eval.fuel;
    out.penalty = eval.penalty;
    out.fitness = eval.fitness;
    out.controls = refined.position;
    if (operated_branch) out.x_tcsc = eval.x_tcsc;
    for (const Generator& gen : eval.dispatched.generators) {
        out.dispatch_mw.emplace_back(gen.bus, gen.p_gen * eval.dispatched.base_mva);
    }
    return out;
}

}  // namespace

void validate_study_config(const StudyConfig& config) {
    if (!(config.load_factor >= 1.0)) {
        throw_error(ErrorKind::Config, "study load factor must be >= 1.0");
    }
    validate_factors(config.pfi_factors);
    validate_weights(config.weights);
    validate_options(config.solver);
    if (config.stage1.population < 2 || config.stage2.population < 2 ||
        config.dispatch.population < 2) {
        throw_error(ErrorKind::Config, "optimizer population must be at least 2");
    }
    if (config.stage1.iterations < 1 || config.stage2.iterations < 1 ||
        config.dispatch.iterations < 1) {
        throw_error(ErrorKind::Config, "optimizer iterations must be at least 1");
    }
    if (config.sizing_w1 < 0 || config.sizing_w2 < 0) {
        throw_error(ErrorKind::Config, "sizing weights must be non-negative");
    }
}

StageOneResult stage1_locate(const Network& network, const StudyConfig& config) {
    validate_study_config(config);
    std::vector<BranchPfi> table;
    {
        const AdmittanceMatrix ybus = build_ybus(network);
        table = power_flow_index(network, ybus, config.pfi_factors, config.weights,
                                 config.solver);
    }
    if (table.empty()) {
        throw_error(ErrorKind::Config, "no TCSC-eligible branch (rated, non-transformer)");
    }

    StageOneResult result;
    result.table = table;

    // Exhaustive argmax: ties resolve to the lowest branch index.
    std::size_t oracle = 0;
    for (std::size_t c = 1; c < table.size(); ++c) {
        if (table[c].pfi > table[oracle].pfi) oracle = c;
    }
    result.oracle_branch = table[oracle].branch_index;

    // IGSA over the candidate lattice; one stratum per candidate cell.
    OptimizerConfig opt = config.stage1;
    opt.population = std::max<int>(opt.population, static_cast<int>(table.size()));
    opt.bounds = {{0.0, static_cast<double>(table.size())}};
    opt.seed = mix_seed(config.seed, 1);
    const auto decode = [&table](double x) {
        const auto cell = static_cast<std::ptrdiff_t>(std::floor(x));
        return static_cast<std::size_t>(
            std::clamp<std::ptrdiff_t>(cell, 0, static_cast<std::ptrdiff_t>(table.size()) - 1));
    };
    const OptimizationResult best = igsa_optimize(
        [&](std::span<const double> x) { return -table[decode(x[0])].pfi; }, opt);
    result.trace = best.trace;

    const std::size_t igsa_cell = decode(best.best_position[0]);
    result.igsa_branch = table[igsa_cell].branch_index;

    // The optimizer honors the method; the oracle guards correctness.
    if (table[igsa_cell].pfi < table[oracle].pfi) {
        result.fallback_used = true;
        result.selected_branch = result.oracle_branch;
        result.pfi = table[oracle].pfi;
    } else {
        result.selected_branch = result.igsa_branch;
        result.pfi = table[igsa_cell].pfi;
    }
    return result;
}

SizingResult stage2_size(const Network& stressed, std::size_t branch_index,
                         std::vector<double> v_normal, const StudyConfig& config) {
    const SizingProblem problem(stressed, branch_index, std::move(v_normal), config.weights,
                                config.solver, config.sizing_w1, config.sizing_w2);

    OptimizerConfig opt = config.stage2;
    const auto [lo, hi] = problem.bounds();
    opt.bounds = {{lo, hi}};
    opt.seed = mix_seed(config.seed, 2);
    // Zero compensation is always a candidate, so doing nothing stays on the
    // table and the result can only improve on it.
    opt.initial_positions = {{0.0}};

    const auto fn = [&problem](std::span<const double> x) { return problem.fitness(x[0]); };
    const OptimizationResult best = fa_optimize(fn, opt);
    const RefineResult refined = refine_pattern_search(fn, best.best_position, opt.bounds);

    auto eval = problem.evaluate(refined.position[0]);
    SizingResult out;
    out.device = eval.device;
    out.fitness = eval.fitness;
    out.deviation = eval.deviation;
    out.solution = std::move(eval.solution);
    out.trace = best.trace;
    return out;
}

PlacementReport run_study(const Network& network, const StudyConfig& config) {
    validate_study_config(config);
    require_valid(network);

    PlacementReport report;
    report.seed = config.seed;
    report.load_factor = config.load_factor;
    for (const Bus& bus : network.buses) report.bus_ids.push_back(bus.id);

    const PowerFlowSolution base_sol = solve_case(network, {}, config.solver);
    if (!base_sol.converged) {
        throw_error(ErrorKind::Diverged,
                    "base case did not converge (mismatch " +
                        std::to_string(base_sol.max_mismatch) + " after " +
                        std::to_string(base_sol.iterations) + " iterations)");
    }
    report.base = make_scenario("base", 1.0, network, base_sol);

    const Network stressed = scale_loads(network, config.load_factor);
    const PowerFlowSolution stressed_sol = solve_case(stressed, {}, config.solver);
    report.stressed_no_tcsc =
        make_scenario("stressed_no_tcsc", config.load_factor, stressed, stressed_sol);

    report.stage1 = stage1_locate(network, config);

    std::vector<double> v_normal(base_sol.v_mag.data(),
                                 base_sol.v_mag.data() + base_sol.v_mag.size());
    report.stage2 =
        stage2_size(stressed, report.stage1.selected_branch, v_normal, config);
    report.device = report.stage2.device;
    report.device_x_line = network.branches[report.device.branch_index].x;
    report.cost = tcsc_cost(report.device.operating_range_mvar);
    report.stressed_with_tcsc = make_scenario("stressed_with_tcsc", config.load_factor,
                                              stressed, report.stage2.solution);

    bool costed = !network.generators.empty();
    for (const Generator& gen : network.generators) costed = costed && gen.has_cost();
    if (config.run_dispatch_opf && costed) {
        report.base.optimized =
            run_dispatch(network, config, mix_seed(config.seed, 3), std::nullopt, {});
        report.stressed_no_tcsc.optimized =
            run_dispatch(stressed, config, mix_seed(config.seed, 4), std::nullopt, {});
        // The installed device is a controllable series reactance, so the
        // re-dispatch of the compensated system operates it within its band.
        // Warm starts: the uncompensated optimum with the device idle (x=0)
        // and with the device at its stage-2 setting.
        std::vector<std::vector<double>> warm;
        warm.push_back(report.stressed_no_tcsc.optimized->controls);
        warm.back().push_back(0.0);
        warm.push_back(report.stressed_no_tcsc.optimized->controls);
        warm.back().push_back(report.device.x_tcsc);
        report.stressed_with_tcsc.optimized =
            run_dispatch(stressed, config, mix_seed(config.seed, 5),
                         report.device.branch_index, warm);
    }
    return report;
}

namespace {

ordered_json trace_to_json(const OptimizationTrace& trace) {
    ordered_json out;
    out["evaluations"] = trace.evaluations;
    out["best_fitness"] = trace.best_fitness;
    return out;
}

ordered_json dispatch_to_json(const std::vector<std::pair<int, double>>& dispatch) {
    ordered_json arr = ordered_json::array();
    for (const auto& [bus, mw] : dispatch) {
        ordered_json g;
        g["bus"] = bus;
        g["p_gen_mw"] = mw;
        arr.push_back(std::move(g));
    }
    return arr;
}

ordered_json scenario_to_json(const ScenarioReport& rep) {
    ordered_json out;
    out["load_factor"] = rep.load_factor;
    out["converged"] = rep.converged;
    out["iterations"] = rep.iterations;
    out["total_generation_mw"] = rep.total_generation_mw;
    out["loss_mw"] = rep.loss_mw;
    if (rep.fuel_cost_per_hr) {
        out["fuel_cost_per_hr"] = *rep.fuel_cost_per_hr;
    } else {
        out["fuel_cost_per_hr"] = nullptr;
    }
    out["dispatch"] = dispatch_to_json(rep.dispatch_mw);
    out["v_mag"] = rep.v_mag;
    out["v_angle"] = rep.v_angle;
    if (rep.optimized) {
        ordered_json opt;
        opt["fuel_cost_per_hr"] = rep.optimized->fuel;
        opt["penalty"] = rep.optimized->penalty;
        opt["fitness"] = rep.optimized->fitness;
        if (rep.optimized->x_tcsc) opt["x_tcsc"] = *rep.optimized->x_tcsc;
        opt["dispatch"] = dispatch_to_json(rep.optimized->dispatch_mw);
        out["optimized"] = std::move(opt);
    }
    return out;
}

}  // namespace

ordered_json report_to_json(const PlacementReport& report) {
    ordered_json out;
    out["seed"] = report.seed;
    out["load_factor"] = report.load_factor;
    out["bus_ids"] = report.bus_ids;
    out["scenarios"]["base"] = scenario_to_json(report.base);
    out["scenarios"]["stressed_no_tcsc"] = scenario_to_json(report.stressed_no_tcsc);
    out["scenarios"]["stressed_with_tcsc"] = scenario_to_json(report.stressed_with_tcsc);

    ordered_json dev;
    dev["branch_index"] = report.device.branch_index;
    dev["x_line"] = report.device_x_line;
    dev["x_tcsc"] = report.device.x_tcsc;
    dev["x_lower_bound"] = tcsc_lower_bound(report.device_x_line);
    dev["x_upper_bound"] = tcsc_upper_bound(report.device_x_line);
    dev["operating_range_mvar"] = report.device.operating_range_mvar;
    out["device"] = std::move(dev);

    ordered_json cost;
    cost["unit_cost_per_kvar"] = report.cost.unit_cost_per_kvar;
    cost["total_cost"] = report.cost.total_cost;
    out["tcsc_cost"] = std::move(cost);

    ordered_json s1;
    s1["selected_branch"] = report.stage1.selected_branch;
    s1["pfi"] = report.stage1.pfi;
    s1["igsa_branch"] = report.stage1.igsa_branch;
    s1["oracle_branch"] = report.stage1.oracle_branch;
    s1["fallback_used"] = report.stage1.fallback_used;
    ordered_json table = ordered_json::array();
    for (const BranchPfi& entry : report.stage1.table) {
        ordered_json row;
        row["branch_index"] = entry.branch_index;
        row["pfi"] = entry.pfi;
        table.push_back(std::move(row));
    }
    s1["pfi_table"] = std::move(table);
    s1["trace"] = trace_to_json(report.stage1.trace);
    out["stage1"] = std::move(s1);

    ordered_json s2;
    s2["fitness"] = report.stage2.fitness;
    s2["voltage_deviation"] = report.stage2.deviation;
    s2["trace"] = trace_to_json(report.stage2.trace);
    out["stage2"] = std::move(s2);

    ordered_json ref;
    ref["note"] = "published 30-bus study figures, for side-by-side comparison";
    ref["generation_before_mw"] = kReference.generation_before;
    ref["generation_stressed_no_tcsc_mw"] = kReference.generation_stressed_no_tcsc;
    ref["loss_before_mw"] = kReference.loss_before_mw;
    ref["loss_stressed_no_tcsc_mw"] = kReference.loss_stressed_no_tcsc_mw;
    ref["loss_with_tcsc_mw"] = kReference.loss_with_tcsc_mw;
    ref["cost_before_per_hr"] = kReference.cost_before;
    ref["cost_stressed_no_tcsc_per_hr"] = kReference.cost_stressed_no_tcsc;
    ref["cost_with_tcsc_per_hr"] = kReference.cost_with_tcsc;
    ref["tcsc_unit_cost_per_kvar"] = kReference.tcsc_unit_cost;
    out["reference_values"] = std::move(ref);
    return out;
}

std::string report_voltage_csv(const PlacementReport& report) {
    std::ostringstream out;
    out << "bus_id,v_base,v_stressed,v_with_tcsc\n";
    out.setf(std::ios::fmtflags(0), std::ios::floatfield);
    out.precision(10);
    const auto n = report.base.v_mag.size();
    for (std::size_t i = 0; i < n; ++i) {
        out << (i < report.bus_ids.size() ? report.bus_ids[i] : static_cast<int>(i + 1));
        out << ',' << report.base.v_mag[i];
        out << ',' << (i < report.stressed_no_tcsc.v_mag.size()
                           ? report.stressed_no_tcsc.v_mag[i]
                           : 0.0);
        out << ',' << (i < report.stressed_with_tcsc.v_mag.size()
                           ? report.stressed_with_tcsc.v_mag[i]
                           : 0.0);
        out << '\n';
    }
    return out.str();
}

std::string report_summary_text(const PlacementReport& report) {
    std::ostringstream out;
    out.setf(std::ios::fixed, std::ios::floatfield);
    auto line = [&out](const std::string& name, const ScenarioReport& s) {
        out.precision(4);
        out << "  " << name;
        for (std::size_t pad = name.size(); pad < 34; ++pad) out << ' ';
        out << (s.converged ? "  " : " !") << s.total_generation_mw << "  " << s.loss_mw;
        if (s.fuel_cost_per_hr) out << "  " << *s.fuel_cost_per_hr;
        if (s.optimized) out << "  " << s.optimized->fuel;
        out << '\n';
    };
    out << "scenario                              gen MW    loss MW   cost $/hr"
           "  opt cost $/hr\n";
    line("base (lf 1.00)", report.base);
    {
        std::ostringstream name;
        name.setf(std::ios::fixed, std::ios::floatfield);
        name.precision(2);
        name << "stressed, no TCSC (lf " << report.load_factor << ")";
        line(name.str(), report.stressed_no_tcsc);
        std::ostringstream name2;
        name2.setf(std::ios::fixed, std::ios::floatfield);
        name2.precision(2);
        name2 << "stressed, with TCSC (lf " << report.load_factor << ")";
        line(name2.str(), report.stressed_with_tcsc);
    }
    out.precision(6);
    out << "device: branch index " << report.device.branch_index << ", x_line "
        << report.device_x_line << " pu, x_tcsc " << report.device.x_tcsc << " pu\n";
    out.precision(4);
    out << "        operating range " << report.device.operating_range_mvar
        << " MVAr, unit cost " << report.cost.unit_cost_per_kvar << " $/kVAr, total "
        << report.cost.total_cost << " $\n";
    out << "stage 1: selected branch " << report.stage1.selected_branch << " (PFI "
        << report.stage1.pfi << "), optimizer pick " << report.stage1.igsa_branch
        << ", exhaustive argmax " << report.stage1.oracle_branch
        << (report.stage1.fallback_used ? " [fallback used]" : "") << '\n';
    out << "reference (published figures): loss " << kReference.loss_before_mw << " -> "
        << kReference.loss_with_tcsc_mw << " MW (stressed no-TCSC "
        << kReference.loss_stressed_no_tcsc_mw << "), cost " << kReference.cost_before
        << " -> " << kReference.cost_with_tcsc << " $/hr (stressed no-TCSC "
        << kReference.cost_stressed_no_tcsc << "), unit cost "
        << kReference.tcsc_unit_cost << " $/kVAr\n";
    return out.str();
}

StudyConfig study_config_from_json(const json& doc) {
    StudyConfig config;
    const auto opt_double = [&doc](const char* key, double& target) {
        if (const auto it = doc.find(key); it != doc.end()) target = it->get<double>();
    };
    opt_double("load_factor", config.load_factor);
    opt_double("sizing_w1", config.sizing_w1);
    opt_double("sizing_w2", config.sizing_w2);
    if (const auto it = doc.find("seed"); it != doc.end()) {
        config.seed = it->get<std::uint64_t>();
    }
    if (const auto it = doc.find("run_dispatch_opf"); it != doc.end()) {
        config.run_dispatch_opf = it->get<bool>();
    }
    if (const auto it = doc.find("pfi_factors"); it != doc.end()) {
        config.pfi_factors.factors = it->get<std::vector<double>>();
    }
    if (const auto it = doc.find("weights"); it != doc.end()) {
        const json& w = *it;
        if (w.contains("w_vbound")) config.weights.w_vbound = w["w_vbound"].get<double>();
        if (w.contains("w_pbound")) config.weights.w_pbound = w["w_pbound"].get<double>();
        if (w.contains("w_line")) config.weights.w_line = w["w_line"].get<double>();
        if (w.contains("w_diverge")) config.weights.w_diverge = w["w_diverge"].get<double>();
    }
    if (const auto it = doc.find("solver"); it != doc.end()) {
        const json& s = *it;
        if (s.contains("tolerance")) config.solver.tolerance = s["tolerance"].get<double>();
        if (s.contains("max_iterations")) {
            config.solver.max_iterations = s["max_iterations"].get<int>();
        }
        if (s.contains("flat_start")) config.solver.flat_start = s["flat_start"].get<bool>();
        if (s.contains("enforce_q_limits")) {
            config.solver.enforce_q_limits = s["enforce_q_limits"].get<bool>();
        }
    }
    const auto read_optimizer = [&doc](const char* key, OptimizerConfig& opt) {
        const auto it = doc.find(key);
        if (it == doc.end()) return;
        const json& o = *it;
        if (o.contains("population")) opt.population = o["population"].get<int>();
        if (o.contains("iterations")) opt.iterations = o["iterations"].get<int>();
        // per-stage seeds always derive from the master seed
        if (o.contains("g0")) opt.g0 = o["g0"].get<double>();
        if (o.contains("alpha")) opt.alpha = o["alpha"].get<double>();
        if (o.contains("inertia")) opt.inertia = o["inertia"].get<double>();
        if (o.contains("c1")) opt.c1 = o["c1"].get<double>();
        if (o.contains("c2")) opt.c2 = o["c2"].get<double>();
        if (o.contains("beta0")) opt.beta0 = o["beta0"].get<double>();
        if (o.contains("gamma")) opt.gamma = o["gamma"].get<double>();
        if (o.contains("alpha0")) opt.alpha0 = o["alpha0"].get<double>();
        if (o.contains("alpha_decay")) opt.alpha_decay = o["alpha_decay"].get<double>();
    };
    read_optimizer("stage1", config.stage1);
    read_optimizer("stage2", config.stage2);
    read_optimizer("dispatch", config.dispatch);
    return config;
}

nlohmann::ordered_json study_config_to_json(const StudyConfig& config) {
    ordered_json out;
    out["load_factor"] = config.load_factor;
    out["pfi_factors"] = config.pfi_factors.factors;
    out["seed"] = config.seed;
    out["run_dispatch_opf"] = config.run_dispatch_opf;
    out["sizing_w1"] = config.sizing_w1;
    out["sizing_w2"] = config.sizing_w2;
    out["weights"] = {{"w_vbound", config.weights.w_vbound},
                      {"w_pbound", config.weights.w_pbound},
                      {"w_line", config.weights.w_line},
                      {"w_diverge", config.weights.w_diverge}};
    out["solver"] = {{"tolerance", config.solver.tolerance},
                     {"max_iterations", config.solver.max_iterations},
                     {"flat_start", config.solver.flat_start},
                     {"enforce_q_limits", config.solver.enforce_q_limits}};
    const auto optimizer_json = [](const OptimizerConfig& opt, bool igsa) {
        ordered_json o;
        o["population"] = opt.population;
        o["iterations"] = opt.iterations;
        if (igsa) {
            o["g0"] = opt.g0;
            o["alpha"] = opt.alpha;
            o["inertia"] = opt.inertia;
            o["c1"] = opt.c1;
            o["c2"] = opt.c2;
        } else {
            o["beta0"] = opt.beta0;
            o["gamma"] = opt.gamma;
            o["alpha0"] = opt.alpha0;
            o["alpha_decay"] = opt.alpha_decay;
        }
        return o;
    };
    out["stage1"] = optimizer_json(config.stage1, true);
    out["stage2"] = optimizer_json(config.stage2, false);
    out["dispatch"] = optimizer_json(config.dispatch, true);
    return out;
}

}  // namespace gridopt
