#include "gridopt/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridopt/errors.hpp"

namespace gridopt {

void validate_options(const SolverOptions& options) {
    if (!(options.tolerance > 0.0)) {
        throw_error(ErrorKind::Config, "solver tolerance must be positive");
    }
    if (options.max_iterations < 1) {
        throw_error(ErrorKind::Config, "solver max_iterations must be at least 1");
    }
}

MismatchModel::MismatchModel(const AdmittanceMatrix& ybus, std::vector<BusKind> kinds,
                             Eigen::VectorXd p_sched, Eigen::VectorXd q_sched)
    : ybus_(ybus),
      kinds_(std::move(kinds)),
      p_sched_(std::move(p_sched)),
      q_sched_(std::move(q_sched)) {
    const auto n = static_cast<Eigen::Index>(kinds_.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (kinds_[i] != BusKind::Slack) pvpq_.push_back(i);
        if (kinds_[i] == BusKind::PQ) pq_.push_back(i);
    }
}

Eigen::Index MismatchModel::state_size() const {
    return static_cast<Eigen::Index>(pvpq_.size() + pq_.size());
}

void compute_injections(const AdmittanceMatrix& ybus, const Eigen::VectorXd& v_mag,
                        const Eigen::VectorXd& v_angle, Eigen::VectorXd& p_out,
                        Eigen::VectorXd& q_out) {
    const auto n = v_mag.size();
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = std::polar(v_mag(i), v_angle(i));
    }
    const Eigen::VectorXcd s = v.array() * (ybus.y * v).conjugate().array();
    p_out = s.real();
    q_out = s.imag();
}

void MismatchModel::injections(const Eigen::VectorXd& v_mag, const Eigen::VectorXd& v_angle,
                               Eigen::VectorXd& p_out, Eigen::VectorXd& q_out) const {
    compute_injections(ybus_, v_mag, v_angle, p_out, q_out);
}

Eigen::VectorXd MismatchModel::mismatch(const Eigen::VectorXd& v_mag,
                                        const Eigen::VectorXd& v_angle) const {
    Eigen::VectorXd p, q;
    injections(v_mag, v_angle, p, q);
    Eigen::VectorXd out(state_size());
    Eigen::Index row = 0;
    for (const Eigen::Index i : pvpq_) out(row++) = p_sched_(i) - p(i);
    for (const Eigen::Index i : pq_) out(row++) = q_sched_(i) - q(i);
    return out;
}

Eigen::MatrixXd MismatchModel::jacobian(const Eigen::VectorXd& v_mag,
                                        const Eigen::VectorXd& v_angle) const {
    Eigen::VectorXd p, q;
    injections(v_mag, v_angle, p, q);
    const Eigen::MatrixXd g = y().real();
    const Eigen::MatrixXd b = y().imag();

    const auto na = static_cast<Eigen::Index>(pvpq_.size());
    const auto nm = static_cast<Eigen::Index>(pq_.size());
    Eigen::MatrixXd jac(na + nm, na + nm);

    // dP/dtheta and dP/dV
    for (Eigen::Index row = 0; row < na; ++row) {
        const Eigen::Index i = pvpq_[row];
        for (Eigen::Index col = 0; col < na; ++col) {
            const Eigen::Index k = pvpq_[col];
            if (i == k) {
                jac(row, col) = -q(i) - b(i, i) * v_mag(i) * v_mag(i);
            } else {
                const double tik = v_angle(i) - v_angle(k);
                jac(row, col) =
                    v_mag(i) * v_mag(k) * (g(i, k) * std::sin(tik) - b(i, k) * std::cos(tik));
            }
        }
        for (Eigen::Index col = 0; col < nm; ++col) {
            const Eigen::Index k = pq_[col];
            if (i == k) {
                jac(row, na + col) = p(i) / v_mag(i) + g(i, i) * v_mag(i);
            } else {
                const double tik = v_angle(i) - v_angle(k);
                jac(row, na + col) =
                    v_mag(i) * (g(i, k) * std::cos(tik) + b(i, k) * std::sin(tik));
            }
        }
    }
    // dQ/dtheta and dQ/dV
    for (Eigen::Index row = 0; row < nm; ++row) {
        const Eigen::Index i = pq_[row];
        for (Eigen::Index col = 0; col < na; ++col) {
            const Eigen::Index k = pvpq_[col];
            if (i == k) {
                jac(na + row, col) = p(i) - g(i, i) * v_mag(i) * v_mag(i);
            } else {
                const double tik = v_angle(i) - v_angle(k);
                jac(na + row, col) =
                    -v_mag(i) * v_mag(k) * (g(i, k) * std::cos(tik) + b(i, k) * std::sin(tik));
            }
        }
        for (Eigen::Index col = 0; col < nm; ++col) {
            const Eigen::Index k = pq_[col];
            if (i == k) {
                jac(na + row, na + col) = q(i) / v_mag(i) - b(i, i) * v_mag(i);
            } else {
                const double tik = v_angle(i) - v_angle(k);
                jac(na + row, na + col) =
                    v_mag(i) * (g(i, k) * std::sin(tik) - b(i, k) * std::cos(tik));
            }
        }
    }
    return jac;
}

namespace {

struct BusGenLimits {
    double q_min = -std::numeric_limits<double>::infinity();
    double q_max = std::numeric_limits<double>::infinity();
    bool present = false;
};

std::vector<BusGenLimits> gather_q_limits(const Network& network) {
    std::vector<BusGenLimits> out(network.buses.size());
    for (const Generator& gen : network.generators) {
        const auto idx = network.bus_index(gen.bus);
        if (!idx) continue;
        BusGenLimits& lim = out[*idx];
        if (!lim.present) {
            lim.present = true;
            lim.q_min = gen.q_min;
            lim.q_max = gen.q_max;
        } else {
            // Units on a shared bus pool their reactive capability.
            lim.q_min += gen.q_min;
            lim.q_max += gen.q_max;
        }
    }
    return out;
}

/// Newton iterations for one frozen classification. Returns iterations used.
int newton_inner(const MismatchModel& model, const SolverOptions& options,
                 Eigen::VectorXd& v_mag, Eigen::VectorXd& v_angle, double& out_mismatch,
                 int iteration_base) {
    for (int it = 0;; ++it) {
        const Eigen::VectorXd f = model.mismatch(v_mag, v_angle);
        out_mismatch = f.size() > 0 ? f.cwiseAbs().maxCoeff() : 0.0;
        if (out_mismatch <= options.tolerance || it >= options.max_iterations) {
            return it;
        }
        const Eigen::MatrixXd jac = model.jacobian(v_mag, v_angle);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        const Eigen::VectorXd dx = lu.solve(f);
        const double residual = (jac * dx - f).cwiseAbs().maxCoeff();
        if (!dx.allFinite() || residual > 1e-6 * std::max(1.0, f.cwiseAbs().maxCoeff())) {
            throw_error(ErrorKind::Numeric,
                        "singular Jacobian at iteration " +
                            std::to_string(iteration_base + it + 1));
        }
        Eigen::Index row = 0;
        for (const Eigen::Index i : model.angle_buses()) v_angle(i) += dx(row++);
        for (const Eigen::Index i : model.magnitude_buses()) v_mag(i) += dx(row++);
    }
}

}  // namespace

PowerFlowSolution solve_newton_raphson(const Network& network, const AdmittanceMatrix& ybus,
                                       const SolverOptions& options) {
    validate_options(options);
    const auto n = static_cast<Eigen::Index>(network.buses.size());
    if (ybus.order() != n) {
        throw_error(ErrorKind::Config, "Y-bus order does not match bus count");
    }

    // Scheduled injections from generator set-points and loads.
    Eigen::VectorXd p_sched = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd q_sched = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p_sched(i) -= network.buses[i].p_load;
        q_sched(i) -= network.buses[i].q_load;
    }
    for (const Generator& gen : network.generators) {
        if (const auto idx = network.bus_index(gen.bus)) {
            p_sched(static_cast<Eigen::Index>(*idx)) += gen.p_gen;
            q_sched(static_cast<Eigen::Index>(*idx)) += gen.q_gen;
        }
    }

    std::vector<BusKind> kinds(network.buses.size());
    Eigen::VectorXd v_mag(n), v_angle(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Bus& bus = network.buses[i];
        kinds[i] = bus.kind;
        if (options.flat_start) {
            v_mag(i) = bus.kind == BusKind::PQ ? 1.0 : bus.v_mag;
            v_angle(i) = 0.0;
        } else {
            v_mag(i) = bus.v_mag;
            v_angle(i) = bus.v_angle;
        }
    }

    const auto q_limits = gather_q_limits(network);

    PowerFlowSolution sol;
    sol.iterations = 0;
    double mismatch = std::numeric_limits<double>::infinity();

    // Outer loop: solve, then retype PV buses whose reactive output left its
    // band (held at the violated limit). Bounded by the bus count.
    for (std::size_t pass = 0; pass <= network.buses.size(); ++pass) {
        const MismatchModel model(ybus, kinds, p_sched, q_sched);
        sol.iterations += newton_inner(model, options, v_mag, v_angle, mismatch, sol.iterations);
        if (mismatch > options.tolerance) break;
        if (!options.enforce_q_limits) break;

        Eigen::VectorXd p, q;
        model.injections(v_mag, v_angle, p, q);
        bool switched = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (kinds[i] != BusKind::PV || !q_limits[i].present) continue;
            const double q_gen = q(i) + network.buses[i].q_load;
            double held = q_gen;
            if (q_gen > q_limits[i].q_max + 1e-9) {
                held = q_limits[i].q_max;
            } else if (q_gen < q_limits[i].q_min - 1e-9) {
                held = q_limits[i].q_min;
            } else {
                continue;
            }
            kinds[i] = BusKind::PQ;
            q_sched(i) = held - network.buses[i].q_load;
            switched = true;
        }
        if (!switched) break;
    }

    sol.v_mag = v_mag;
    sol.v_angle = v_angle;
    sol.max_mismatch = mismatch;
    sol.converged = mismatch <= options.tolerance;
    compute_injections(ybus, v_mag, v_angle, sol.p_inj, sol.q_inj);
    return sol;
}

std::vector<BranchFlow> compute_branch_flows(const Network& network,
                                             std::span<const ReactanceOverride> overrides,
                                             const Eigen::VectorXd& v_mag,
                                             const Eigen::VectorXd& v_angle) {
    std::vector<BranchFlow> flows(network.branches.size());
    for (std::size_t k = 0; k < network.branches.size(); ++k) {
        const Branch& br = network.branches[k];
        const auto fi = static_cast<Eigen::Index>(*network.bus_index(br.from_bus));
        const auto ti = static_cast<Eigen::Index>(*network.bus_index(br.to_bus));
        const std::complex<double> vf = std::polar(v_mag(fi), v_angle(fi));
        const std::complex<double> vt = std::polar(v_mag(ti), v_angle(ti));
        const double x_eff = effective_reactance(network, k, overrides);
        const std::complex<double> ys = 1.0 / std::complex<double>{br.r, x_eff};
        const std::complex<double> ysh{0.0, br.b_charging / 2.0};
        const double t = br.tap != 0.0 ? br.tap : 1.0;

        const std::complex<double> i_from = (ys + ysh) / (t * t) * vf - ys / t * vt;
        const std::complex<double> i_to = (ys + ysh) * vt - ys / t * vf;
        flows[k].sending = vf * std::conj(i_from);
        flows[k].receiving = vt * std::conj(i_to);
    }
    return flows;
}

double total_loss_mw(const Network& network, std::span<const BranchFlow> flows) {
    double loss = 0.0;
    for (const BranchFlow& f : flows) {
        loss += f.sending.real() + f.receiving.real();
    }
    return loss * network.base_mva;
}

std::vector<Overload> check_line_limits(const Network& network,
                                        std::span<const BranchFlow> flows) {
    std::vector<Overload> out;
    for (std::size_t k = 0; k < flows.size() && k < network.branches.size(); ++k) {
        const double rating = network.branches[k].rating;
        if (rating <= 0.0) continue;
        const double s_mva =
            std::max(std::abs(flows[k].sending), std::abs(flows[k].receiving)) * network.base_mva;
        if (s_mva > rating) {
            out.push_back(Overload{k, s_mva / rating});
        }
    }
    return out;
}

PowerFlowSolution solve_case(const Network& network,
                             std::span<const ReactanceOverride> overrides,
                             const SolverOptions& options) {
    const AdmittanceMatrix ybus = build_ybus(network, overrides);
    PowerFlowSolution sol = solve_newton_raphson(network, ybus, options);
    sol.branch_flows = compute_branch_flows(network, overrides, sol.v_mag, sol.v_angle);
    sol.total_loss_mw = total_loss_mw(network, sol.branch_flows);
    return sol;
}

PowerFlowSolution try_solve_case(const Network& network,
                                 std::span<const ReactanceOverride> overrides,
                                 const SolverOptions& options) {
    try {
        return solve_case(network, overrides, options);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numeric) throw;
        PowerFlowSolution sol;
        const auto n = static_cast<Eigen::Index>(network.buses.size());
        sol.v_mag = Eigen::VectorXd::Ones(n);
        sol.v_angle = Eigen::VectorXd::Zero(n);
        sol.p_inj = Eigen::VectorXd::Zero(n);
        sol.q_inj = Eigen::VectorXd::Zero(n);
        sol.converged = false;
        return sol;
    }
}

}  // namespace gridopt
