#include "consensus/growth.hpp"

#include "consensus/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace consensus {

std::string_view to_string(GapMode mode) {
    switch (mode) {
    case GapMode::Bounded: return "bounded";
    case GapMode::Log: return "log";
    case GapMode::LogLog: return "loglog";
    }
    return "unknown";
}

std::string_view to_string(SeriesMode mode) { return mode == SeriesMode::Log ? "log" : "loglog"; }

std::string_view to_string(Trend trend) {
    switch (trend) {
    case Trend::Converging: return "converging-trend";
    case Trend::Diverging: return "diverging-trend";
    case Trend::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::size_t GapRule::gap(std::size_t i) const {
    const double x = static_cast<double>(i);
    double length = 1.0;
    switch (mode) {
    case GapMode::Bounded: length = std::ceil(parameter); break;
    case GapMode::Log: length = std::ceil(parameter * std::log(x + 2.0)); break;
    case GapMode::LogLog: length = std::ceil(parameter * std::log(std::log(x + 3.0))); break;
    }
    return static_cast<std::size_t>(std::max(1.0, length));
}

// Generator ---------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits; identical on every platform,
// unlike std::uniform_real_distribution.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t max_row_count(const ZeroPattern& p) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < p.size(); ++j) c += p(i, j) ? 1 : 0;
        best = std::max(best, c);
    }
    return best;
}

} // namespace

GeneratedSequence::GeneratedSequence(GeneratorSpec spec) : spec_(std::move(spec)) {
    if (spec_.n == 0) throw Error(ErrorCode::ParameterOutOfRange, "dimension must be positive");
    if (spec_.steps == 0) throw Error(ErrorCode::ParameterOutOfRange, "steps must be positive");
    if (!(spec_.gaps.parameter > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "gap parameter must be positive");
    if (spec_.activation == Activation::RandomSubset &&
        !(spec_.activation_probability >= 0.0 && spec_.activation_probability <= 1.0)) {
        throw Error(ErrorCode::ParameterOutOfRange, "activation probability outside [0, 1]");
    }
    base_ = spec_.base_pattern.value_or(ZeroPattern::full(spec_.n));
    if (base_.size() != spec_.n) throw Error(ErrorCode::DimensionMismatch, "base pattern does not match n");
    if (!base_.has_positive_diagonal()) {
        throw Error(ErrorCode::MissingPositiveDiagonal, "base pattern needs a positive diagonal");
    }
    const std::size_t widest = max_row_count(base_);
    if (!(spec_.delta > 0.0) || spec_.delta * static_cast<double>(widest) > 1.0 + 1e-15) {
        throw Error(ErrorCode::InvalidDelta, "delta " + std::to_string(spec_.delta) + " cannot floor a row with " +
                                                 std::to_string(widest) + " positive entries");
    }

    active_.assign(spec_.steps, false);
    std::size_t t = 0;
    for (std::size_t i = 0; t < spec_.steps; ++i) {
        active_[t] = true;
        activation_times_.push_back(t);
        const std::size_t g = spec_.gaps.gap(i);
        max_gap_ = std::max(max_gap_, g);
        t += g;
    }
}

StochasticMatrix GeneratedSequence::at(std::size_t t) const {
    if (t >= spec_.steps) {
        throw Error(ErrorCode::SourceExhausted,
                    "index " + std::to_string(t) + " requested, " + std::to_string(spec_.steps) + " available");
    }
    const auto n = static_cast<Eigen::Index>(spec_.n);
    if (!active_[t]) return StochasticMatrix::identity(spec_.n);

    std::mt19937_64 rng(splitmix64(spec_.seed ^ splitmix64(static_cast<std::uint64_t>(t))));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<Eigen::Index> support;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!base_(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) continue;
            if (i != j && spec_.activation == Activation::RandomSubset && unit(rng) >= spec_.activation_probability)
                continue;
            support.push_back(j);
        }
        // Floor of delta on every positive entry, remaining mass split by
        // random weights.
        std::vector<double> w(support.size());
        double total = 0.0;
        for (auto& x : w) total += (x = unit(rng));
        if (total <= 0.0) {
            std::fill(w.begin(), w.end(), 1.0);
            total = static_cast<double>(w.size());
        }
        const double free_mass = 1.0 - spec_.delta * static_cast<double>(support.size());
        for (std::size_t k = 0; k < support.size(); ++k) {
            m(i, support[k]) = spec_.delta + free_mass * w[k] / total;
        }
    }
    return validate(m, kDefaultRowTolerance, /*renormalize=*/false);
}

GeneratedSequence generate_sequence(const GeneratorSpec& spec) { return GeneratedSequence(spec); }

// Series ------------------------------------------------------------------

SeriesReport series_partial_sums(SeriesMode mode, double delta, double a, std::size_t terms) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::ParameterOutOfRange, "delta must lie in (0, 1)");
    if (!(a > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "a must be positive");
    if (terms < 10) throw Error(ErrorCode::ParameterOutOfRange, "at least 10 terms are required");

    SeriesReport out;
    out.mode = mode;
    out.delta = delta;
    out.a = a;
    out.terms = terms;
    out.exponent = a * std::log(delta);
    out.near_boundary = mode == SeriesMode::Log && std::abs(out.exponent + 1.0) < 0.05;

    const double e = out.exponent;
    auto term = [&](double x) {
        return mode == SeriesMode::Log ? std::exp(e * std::log(x)) : std::exp(e * std::log(std::log(x)));
    };

    const std::size_t first = mode == SeriesMode::Log ? 1 : 3;
    std::size_t next_checkpoint = 10;
    double sum = 0.0;
    double carry = 0.0;  // Kahan compensation
    double last = 0.0;
    double next_sample = static_cast<double>(first);
    const double sample_step = std::pow(10.0, 1.0 / 20.0);
    for (std::size_t n = first; n <= terms; ++n) {
        last = term(static_cast<double>(n));
        const double y = last - carry;
        const double s = sum + y;
        carry = (s - sum) - y;
        sum = s;
        if (static_cast<double>(n) >= next_sample || n == terms) {
            out.samples.push_back({n, last, sum});
            next_sample = std::max(static_cast<double>(n + 1), next_sample * sample_step);
        }
        if (n == next_checkpoint || n == terms) {
            out.checkpoints.push_back({n, last, sum});
            if (n == next_checkpoint) next_checkpoint *= 10;
        }
    }

    // Decade checkpoints 10, 100, ... with their partial sums.
    std::vector<SeriesCheckpoint> decades;
    for (const auto& c : out.checkpoints) {
        double k = std::log10(static_cast<double>(c.n));
        if (std::abs(k - std::round(k)) < 1e-12) decades.push_back(c);
    }
    if (decades.size() >= 3) {
        const auto& d = decades;
        const std::size_t k = d.size() - 1;
        const double gain_last = d[k].partial_sum - d[k - 1].partial_sum;
        const double gain_prev = d[k - 1].partial_sum - d[k - 2].partial_sum;
        out.decade_ratio = gain_last / gain_prev;
        // The ratio tends to 10^(1 + e) for the log series.
        const double log_ratio = std::log10(out.decade_ratio);
        if (std::abs(log_ratio) < 0.01)
            out.empirical = Trend::Inconclusive;
        else
            out.empirical = log_ratio < 0.0 ? Trend::Converging : Trend::Diverging;
    }

    if (mode == SeriesMode::Log) {
        out.verdict = e < -1.0 ? Trend::Converging : Trend::Diverging;
        if (e < -1.0) {
            // Euler-Maclaurin: sum = S(N) + int_N^inf x^e dx - f(N) / 2 + O(f'(N)).
            const double big_n = static_cast<double>(terms);
            out.tail_corrected_limit = sum + std::pow(big_n, e + 1.0) / (-e - 1.0) - 0.5 * last;
        }
    } else {
        out.verdict = Trend::Diverging;
        // Terms n in (c, C] dominate the integral of the decreasing f over
        // [c + 1, C + 1]. With x = e^y the integrand is e^y y^e.
        auto integrand = [e](double y) { return std::exp(y) * std::pow(y, e); };
        for (std::size_t k = 1; k < decades.size(); ++k) {
            const double lo = std::log(static_cast<double>(decades[k - 1].n) + 1.0);
            const double hi = std::log(static_cast<double>(decades[k].n) + 1.0);
            const double bound =
                boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 15, 1e-13);
            const double gain = decades[k].partial_sum - decades[k - 1].partial_sum;
            out.interval_gains.push_back(gain);
            out.interval_lower_bounds.push_back(bound);
            if (!(gain > bound)) out.gains_exceed_bounds = false;
        }
    }
    return out;
}

// Experiment --------------------------------------------------------------

GrowthReport growth_experiment(const GeneratorSpec& spec, std::size_t horizon, double eps_c,
                               const Tolerances& tolerances) {
    GeneratorSpec run_spec = spec;
    run_spec.steps = horizon;
    const GeneratedSequence seq = generate_sequence(run_spec);

    GrowthReport out;
    out.spec = run_spec;

    ScheduleOptions schedule_options;
    schedule_options.horizon = horizon;
    schedule_options.eps_z = tolerances.eps_z;
    schedule_options.confirmation_span = std::max(run_spec.n * run_spec.n, seq.max_gap() + 1);
    out.schedule = detect_schedule(seq, schedule_options);

    Eigen::VectorXd x0(static_cast<Eigen::Index>(run_spec.n));
    for (Eigen::Index i = 0; i < x0.size(); ++i)
        x0(i) = run_spec.n > 1 ? static_cast<double>(i) / static_cast<double>(run_spec.n - 1) : 0.0;

    TheoremOptions theorem;
    theorem.tolerances = tolerances;
    theorem.tolerances.eps_c = eps_c;
    out.convergence = check_theorem(seq, out.schedule, OpinionVector(x0), theorem);

    for (std::size_t i = 0; i < seq.activation_times().size(); ++i) {
        const std::size_t g = run_spec.gaps.gap(i);
        out.gaps.push_back(g);
        out.designed_series += std::pow(run_spec.delta, static_cast<double>(g));
    }
    if (!out.convergence.deltas.partial_sums.empty()) out.measured_delta_sum = out.convergence.deltas.partial_sums.back();

    for (std::size_t i = 0; i < out.convergence.deltas.values.size(); ++i) {
        const auto length = static_cast<double>(out.schedule.times[i + 1] - out.schedule.times[i]);
        if (out.convergence.deltas.values[i] < std::pow(run_spec.delta, length) * (1.0 - 1e-12)) {
            out.delta_floor_holds = false;
        }
    }
    out.hypothesis_at_risk = run_spec.gaps.mode == GapMode::Log && run_spec.gaps.parameter * std::log(run_spec.delta) < -1.0;

    out.reached_consensus = out.convergence.all_converged;
    if (out.reached_consensus) {
        for (const auto& c : out.convergence.classes) out.windows_to_converge = std::max(out.windows_to_converge, c.windows_used);
        out.steps_to_converge = out.schedule.times[out.windows_to_converge];
    }
    return out;
}

DeltaThreshold check_delta_threshold(double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorCode::ParameterOutOfRange, "delta must lie in (0, 1]");
    DeltaThreshold out;
    out.inv_e = std::exp(-1.0);
    // k entries of at least delta fit in a unit row iff k * delta <= 1.
    out.max_positive_entries = static_cast<std::size_t>(std::floor(1.0 / delta + 1e-12));
    out.above_inv_e = delta > out.inv_e;
    return out;
}

} // namespace consensus
