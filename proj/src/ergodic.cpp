#include "consensus/ergodic.hpp"

#include "consensus/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace consensus {

namespace {

constexpr double kEnvelopeSlack = 1e-12;
constexpr double kBoundSlack = 1e-10;

Eigen::MatrixXd sub_block(const Eigen::MatrixXd& a, std::span<const std::size_t> rows,
                          std::span<const std::size_t> cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                a(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
    return out;
}

void require_deltas(std::size_t windows, std::span<const double> deltas) {
    if (deltas.size() < windows) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(deltas.size()) + " delta values for " + std::to_string(windows) + " windows");
    }
}

} // namespace

DeltaSeries delta_bounds(std::span<const StochasticMatrix> windows, double eps_z) {
    DeltaSeries out;
    double sum = 0.0;
    for (const auto& w : windows) {
        const double d = pos_min(w, eps_z);
        sum += d;
        out.values.push_back(d);
        out.partial_sums.push_back(sum);
    }
    return out;
}

DeltaSeries uniform_delta(double delta, std::size_t count) {
    DeltaSeries out;
    for (std::size_t i = 0; i < count; ++i) {
        out.values.push_back(delta);
        out.partial_sums.push_back(delta * static_cast<double>(i + 1));
    }
    return out;
}

EssentialLimit essential_limit(std::span<const StochasticMatrix> windows, std::span<const std::size_t> class_indices,
                               double eps_c, std::size_t max_windows) {
    EssentialLimit out;
    const auto nk = static_cast<Eigen::Index>(class_indices.size());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(nk, nk);
    Eigen::RowVectorXd col_min = acc.colwise().minCoeff();
    Eigen::RowVectorXd col_max = acc.colwise().maxCoeff();

    const std::size_t limit = std::min(max_windows, windows.size());
    for (std::size_t i = 0; i < limit; ++i) {
        acc = sub_block(windows[i].matrix(), class_indices, class_indices) * acc;
        const Eigen::RowVectorXd new_min = acc.colwise().minCoeff();
        const Eigen::RowVectorXd new_max = acc.colwise().maxCoeff();
        for (Eigen::Index c = 0; c < nk; ++c) {
            if (new_min(c) < col_min(c) - kEnvelopeSlack || new_max(c) > col_max(c) + kEnvelopeSlack) {
                std::ostringstream os;
                os.precision(17);
                os << "window " << i << " column " << c << ": min " << col_min(c) << " -> " << new_min(c)
                   << ", max " << col_max(c) << " -> " << new_max(c);
                throw Error(ErrorCode::MonotonicityViolation, os.str());
            }
        }
        col_min = new_min;
        col_max = new_max;
        out.windows_used = i + 1;
        out.residual = (col_max - col_min).maxCoeff();
        if (out.residual <= eps_c) {
            out.converged = true;
            break;
        }
    }
    if (out.windows_used == 0) out.residual = nk > 1 ? 1.0 : 0.0;
    if (nk == 1) out.converged = true;
    out.limit_row = 0.5 * (col_min + col_max);
    return out;
}

TauEnvelope tau_envelope(std::span<const StochasticMatrix> windows, std::span<const std::size_t> class_indices,
                         std::span<const double> deltas, bool enforce_bound) {
    require_deltas(windows.size(), deltas);
    TauEnvelope out;
    const auto nk = static_cast<Eigen::Index>(class_indices.size());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(nk, nk);
    double bound = 1.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        acc = sub_block(windows[i].matrix(), class_indices, class_indices) * acc;
        bound *= 1.0 - deltas[i];
        const double measured = tau(acc);
        if (enforce_bound && measured > bound + kBoundSlack) {
            std::ostringstream os;
            os.precision(17);
            os << "window " << i << ": tau " << measured << " above product bound " << bound;
            throw Error(ErrorCode::InvariantViolation, os.str());
        }
        out.measured.push_back(measured);
        out.bound.push_back(bound);
        out.spread.push_back(column_spread(acc));
    }
    return out;
}

std::vector<double> inessential_decay(std::span<const StochasticMatrix> windows, const GantmacherForm& form,
                                      std::span<const double> deltas, bool enforce_bound) {
    require_deltas(windows.size(), deltas);
    std::vector<std::size_t> inessential(form.permutation.begin() + static_cast<std::ptrdiff_t>(
                                                                         form.offsets[form.essential_count()]),
                                         form.permutation.end());
    std::vector<double> out;
    if (inessential.empty()) return out;

    const auto m = static_cast<Eigen::Index>(inessential.size());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(m, m);
    double bound = 1.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const Eigen::MatrixXd block = sub_block(windows[i].matrix(), inessential, inessential);
        acc = block * acc;
        bound *= 1.0 - deltas[i];
        const double single = row_sum_norm(block);
        const double running = row_sum_norm(acc);
        if (enforce_bound && (single > 1.0 - deltas[i] + kBoundSlack || running > bound + kBoundSlack)) {
            std::ostringstream os;
            os.precision(17);
            os << "window " << i << ": inessential block norm " << single << " (running " << running
               << ") exceeds its bound " << 1.0 - deltas[i] << " (running " << bound << ")";
            throw Error(ErrorCode::InvariantViolation, os.str());
        }
        out.push_back(running);
    }
    return out;
}

std::vector<Eigen::VectorXd> run_opinion_process(const MatrixSource& seq, const OpinionVector& x0, std::size_t steps) {
    if (x0.size() != seq.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "opinion vector of length " + std::to_string(x0.size()) +
                                                      " for dimension " + std::to_string(seq.dimension()));
    }
    std::vector<Eigen::VectorXd> out;
    out.reserve(steps + 1);
    out.push_back(x0.values());
    for (std::size_t t = 0; t < steps; ++t) out.push_back(seq.at(t).matrix() * out.back());
    return out;
}

ConvergenceReport check_theorem(const MatrixSource& seq, const AccumulationSchedule& schedule,
                                const OpinionVector& x0, const TheoremOptions& options) {
    if (schedule.direction != Direction::Backward) {
        throw Error(ErrorCode::ParameterOutOfRange, "the convergence check needs a backward schedule");
    }
    if (x0.size() != seq.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "opinion vector of length " + std::to_string(x0.size()) +
                                                      " for dimension " + std::to_string(seq.dimension()));
    }

    const Tolerances& tol = options.tolerances;
    ConvergenceReport report;
    report.tolerances = tol;
    if (!schedule.stabilized) {
        report.warnings.push_back("ScheduleNotStabilized: the report is advisory");
    }
    if (schedule.times.empty()) {
        throw Error(ErrorCode::ScheduleNotStabilized, "schedule has no stabilization time");
    }

    report.form = gantmacher_form(schedule.common_pattern);
    const auto windows = window_accumulations(seq, schedule, tol.eps_row, options.max_windows);
    report.windows = windows.size();

    report.deltas = delta_bounds(windows, tol.eps_z);
    if (options.delta_override) {
        report.deltas = uniform_delta(*options.delta_override, windows.size());
        report.delta_overridden = true;
    }
    const bool enforce = !report.delta_overridden;

    const std::size_t t0 = schedule.times.front();
    report.tail_factor = backward_accumulate(seq, 0, t0, tol.eps_row).matrix();
    report.final_step = schedule.times[windows.size()];

    // Opinion process with envelope monotonicity.
    Eigen::VectorXd x = x0.values();
    Eigen::VectorXd at_t0 = x;
    double lo = x.minCoeff();
    double hi = x.maxCoeff();
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    for (std::size_t t = 0; t < report.final_step; ++t) {
        x = seq.at(t).matrix() * x;
        if (x.minCoeff() < lo - kEnvelopeSlack * scale || x.maxCoeff() > hi + kEnvelopeSlack * scale) {
            throw Error(ErrorCode::MonotonicityViolation, "opinion envelope widened at step " + std::to_string(t));
        }
        lo = x.minCoeff();
        hi = x.maxCoeff();
        if (t + 1 == t0) at_t0 = x;
    }
    report.final_opinion = x;

    const std::size_t max_windows = windows.size();
    report.all_converged = true;
    for (std::size_t k = 0; k < report.form.essential_count(); ++k) {
        const auto& indices = report.form.partition.classes[k];
        ClassResult result;
        result.class_index = k;
        result.indices = indices;

        const EssentialLimit limit = essential_limit(windows, indices, tol.eps_c, max_windows);
        const TauEnvelope envelope = tau_envelope(windows, indices, report.deltas.values, enforce);
        result.limit_row = limit.limit_row;
        result.residual = limit.residual;
        result.converged = limit.converged;
        result.windows_used = limit.windows_used;
        if (!envelope.measured.empty()) {
            result.tau_measured = envelope.measured.back();
            result.tau_bound = envelope.bound.back();
        }

        double weight = 0.0;
        double predicted = 0.0;
        for (std::size_t c = 0; c < indices.size(); ++c) {
            const double y = at_t0(static_cast<Eigen::Index>(indices[c]));
            predicted += result.limit_row(static_cast<Eigen::Index>(c)) * y;
            weight += std::abs(y);
        }
        result.consensus_value = predicted;
        for (auto i : indices) {
            result.opinion_deviation =
                std::max(result.opinion_deviation, std::abs(x(static_cast<Eigen::Index>(i)) - predicted));
        }
        result.opinion_consistent =
            result.opinion_deviation <= 0.5 * result.residual * weight + kEnvelopeSlack * scale;
        if (!result.opinion_consistent) {
            report.warnings.push_back("class " + std::to_string(k) +
                                      ": opinions deviate from the predicted consensus value");
        }
        if (!result.converged) {
            report.all_converged = false;
            report.warnings.push_back("NotConvergedAtHorizon: class " + std::to_string(k) + " spread " +
                                      std::to_string(result.residual));
        }

        report.tau_measured.push_back(envelope.measured);
        report.spread.push_back(envelope.spread);
        if (report.tau_bound.empty()) report.tau_bound = envelope.bound;
        report.classes.push_back(std::move(result));
    }
    if (report.tau_bound.empty()) {
        double bound = 1.0;
        for (double d : report.deltas.values) report.tau_bound.push_back(bound *= 1.0 - d);
    }
    report.inessential_norm = inessential_decay(windows, report.form, report.deltas.values, enforce);
    return report;
}

} // namespace consensus
