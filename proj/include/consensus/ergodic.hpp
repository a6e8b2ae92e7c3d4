#pragma once

#include "consensus/gantmacher.hpp"
#include "consensus/schedule.hpp"
#include "consensus/source.hpp"
#include "consensus/stochastic.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace consensus {

struct DeltaSeries {
    std::vector<double> values;
    std::vector<double> partial_sums;
};

/// delta_i = min+ of window i, the tightest lower bound the data admits.
DeltaSeries delta_bounds(std::span<const StochasticMatrix> windows, double eps_z = kDefaultZeroThreshold);

/// Constant delta for every window.
DeltaSeries uniform_delta(double delta, std::size_t count);

struct EssentialLimit {
    Eigen::RowVectorXd limit_row;  // row of K_k (column-envelope midpoints)
    double residual = 0.0;         // final column spread
    bool converged = false;
    std::size_t windows_used = 0;
};

/// Accumulates B_i = A_k(i) ... A_k(0) over the class block of each window.
///
/// Column minima must not decrease and column maxima must not increase
/// (slack 1e-12); a violation throws MonotonicityViolation. Stops as soon as
/// the column spread is at most eps_c.
EssentialLimit essential_limit(std::span<const StochasticMatrix> windows, std::span<const std::size_t> class_indices,
                               double eps_c, std::size_t max_windows);

struct TauEnvelope {
    std::vector<double> measured;  // tau(B_i)
    std::vector<double> bound;     // prod_{j <= i} (1 - delta_j)
    std::vector<double> spread;    // column spread of B_i
};

/// Measured coefficient of ergodicity of the accumulated class block against
/// the product bound. With `enforce_bound` a point above bound + 1e-10 throws
/// InvariantViolation.
TauEnvelope tau_envelope(std::span<const StochasticMatrix> windows, std::span<const std::size_t> class_indices,
                         std::span<const double> deltas, bool enforce_bound = true);

/// Row-sum norm of the accumulated [J, J] block (J = inessential indices)
/// after each window. Empty when every class is essential. With
/// `enforce_bound` each single-window norm must be <= 1 - delta_i + 1e-10 and
/// the running norm <= prod (1 - delta_j) + 1e-10.
std::vector<double> inessential_decay(std::span<const StochasticMatrix> windows, const GantmacherForm& form,
                                      std::span<const double> deltas, bool enforce_bound = true);

struct TheoremOptions {
    std::optional<std::size_t> max_windows;
    Tolerances tolerances;
    std::optional<double> delta_override;
};

struct ClassResult {
    std::size_t class_index = 0;
    std::vector<std::size_t> indices;
    Eigen::RowVectorXd limit_row;
    double residual = 0.0;
    double tau_measured = 0.0;
    double tau_bound = 1.0;
    bool converged = false;
    std::size_t windows_used = 0;
    // Predicted consensus value K_k y restricted to the class, with
    // y = A(t_0, 0) x(0), and the largest deviation of x(T) from it.
    double consensus_value = 0.0;
    double opinion_deviation = 0.0;
    bool opinion_consistent = true;
};

struct ConvergenceReport {
    GantmacherForm form;
    std::vector<ClassResult> classes;
    DeltaSeries deltas;
    bool delta_overridden = false;
    std::vector<double> tau_bound;
    std::vector<std::vector<double>> tau_measured;  // per essential class
    std::vector<std::vector<double>> spread;        // per essential class
    std::vector<double> inessential_norm;
    std::size_t windows = 0;
    std::size_t final_step = 0;     // opinions evaluated up to x(final_step)
    Eigen::MatrixXd tail_factor;    // A(t_0, 0)
    Eigen::VectorXd final_opinion;
    bool all_converged = false;
    std::vector<std::string> warnings;
    Tolerances tolerances;
};

/// Assembles the convergence report for a backward schedule and runs the
/// opinion process alongside. The coupling blocks [J, essential] are left
/// out of every convergence claim.
ConvergenceReport check_theorem(const MatrixSource& seq, const AccumulationSchedule& schedule,
                                const OpinionVector& x0, const TheoremOptions& options = {});

/// x(t) = A(t, 0) x(0) for t = 0..steps. Throws DimensionMismatch.
std::vector<Eigen::VectorXd> run_opinion_process(const MatrixSource& seq, const OpinionVector& x0, std::size_t steps);

} // namespace consensus
