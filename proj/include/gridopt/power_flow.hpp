#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gridopt/network.hpp"
#include "gridopt/ybus.hpp"

namespace gridopt {

struct SolverOptions {
    double tolerance = 1e-6;   // pu mismatch threshold
    int max_iterations = 30;
    bool flat_start = true;
    bool enforce_q_limits = true;
};

void validate_options(const SolverOptions& options);

/// Complex power entering the branch at each end, pu. Branch loss is
/// Re(sending) + Re(receiving).
struct BranchFlow {
    std::complex<double> sending;
    std::complex<double> receiving;
};

struct PowerFlowSolution {
    Eigen::VectorXd v_mag;    // pu
    Eigen::VectorXd v_angle;  // rad
    Eigen::VectorXd p_inj;    // pu net injection
    Eigen::VectorXd q_inj;
    std::vector<BranchFlow> branch_flows;
    double total_loss_mw = 0.0;
    bool converged = false;
    int iterations = 0;
    double max_mismatch = std::numeric_limits<double>::infinity();
};

/// Net complex injections S_i = V_i * conj(sum_k Y_ik V_k) split into P and Q.
void compute_injections(const AdmittanceMatrix& ybus, const Eigen::VectorXd& v_mag,
                        const Eigen::VectorXd& v_angle, Eigen::VectorXd& p_out,
                        Eigen::VectorXd& q_out);

/// Polar-form mismatch equations for a frozen bus classification. Exposed so
/// tests can difference the analytic Jacobian against the mismatch function.
class MismatchModel {
public:
    /// q_sched entries are only meaningful for PQ buses; PV buses regulate to
    /// their v_mag set-point.
    MismatchModel(const AdmittanceMatrix& ybus, std::vector<BusKind> kinds,
                  Eigen::VectorXd p_sched, Eigen::VectorXd q_sched);

    /// State vector layout: angles at all non-slack buses, then magnitudes at
    /// PQ buses.
    Eigen::Index state_size() const;
    const std::vector<Eigen::Index>& angle_buses() const { return pvpq_; }
    const std::vector<Eigen::Index>& magnitude_buses() const { return pq_; }

    /// Scheduled-minus-calculated injections ordered as the state vector.
    Eigen::VectorXd mismatch(const Eigen::VectorXd& v_mag,
                             const Eigen::VectorXd& v_angle) const;

    /// Jacobian of calculated injections w.r.t. the state vector.
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& v_mag,
                             const Eigen::VectorXd& v_angle) const;

    void injections(const Eigen::VectorXd& v_mag, const Eigen::VectorXd& v_angle,
                    Eigen::VectorXd& p_out, Eigen::VectorXd& q_out) const;

private:
    const Eigen::MatrixXcd& y() const { return ybus_.y; }

    AdmittanceMatrix ybus_;
    std::vector<BusKind> kinds_;
    Eigen::VectorXd p_sched_;
    Eigen::VectorXd q_sched_;
    std::vector<Eigen::Index> pvpq_;
    std::vector<Eigen::Index> pq_;
};

/// Full-Jacobian polar Newton-Raphson with outer-loop generator Q-limit
/// switching. Non-convergence is reported in the result, never thrown;
/// a singular Jacobian throws ErrorKind::Numeric naming the iteration.
PowerFlowSolution solve_newton_raphson(const Network& network,
                                       const AdmittanceMatrix& ybus,
                                       const SolverOptions& options = {});

/// Pi-model sending/receiving flows for every branch at the given voltages.
std::vector<BranchFlow> compute_branch_flows(const Network& network,
                                             std::span<const ReactanceOverride> overrides,
                                             const Eigen::VectorXd& v_mag,
                                             const Eigen::VectorXd& v_angle);

/// Sum of per-branch real losses, in MW.
double total_loss_mw(const Network& network, std::span<const BranchFlow> flows);

struct Overload {
    std::size_t branch_index = 0;
    double ratio = 0.0;  // max(|S_send|,|S_recv|) * base_mva / rating
};

/// Branches loaded past their MVA rating; unrated (rating = 0) branches are
/// never reported.
std::vector<Overload> check_line_limits(const Network& network,
                                        std::span<const BranchFlow> flows);

/// Convenience wrapper: builds the Y-bus (with overrides), solves, and fills
/// branch flows and losses into the returned solution.
PowerFlowSolution solve_case(const Network& network,
                             std::span<const ReactanceOverride> overrides = {},
                             const SolverOptions& options = {});

/// Like solve_case, but maps numeric failures (singular Jacobian) onto a
/// non-converged solution so population fitness sweeps survive bad candidates.
PowerFlowSolution try_solve_case(const Network& network,
                                 std::span<const ReactanceOverride> overrides = {},
                                 const SolverOptions& options = {});

}  // namespace gridopt
