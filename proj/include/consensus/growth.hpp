#pragma once

#include "consensus/ergodic.hpp"
#include "consensus/schedule.hpp"
#include "consensus/source.hpp"
#include "consensus/stochastic.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace consensus {

enum class GapMode { Bounded, Log, LogLog };

/// Length of the i-th intercommunication gap: ceil(N), ceil(a log(i + 2)) or
/// ceil(a log(log(i + 3))), never below 1.
struct GapRule {
    GapMode mode = GapMode::Bounded;
    double parameter = 1.0;  // N for bounded gaps, a otherwise

    std::size_t gap(std::size_t i) const;
};

enum class Activation { Full, RandomSubset };

struct GeneratorSpec {
    std::size_t n = 3;
    std::uint64_t seed = 0;
    std::size_t steps = 1000;
    double delta = 0.1;
    std::optional<ZeroPattern> base_pattern;  // all-true when unset
    Activation activation = Activation::Full;
    double activation_probability = 0.5;      // per off-diagonal entry, RandomSubset only
    GapRule gaps;
};

/// Deterministic sequence with communication only at scheduled steps.
///
/// Step t is active when it starts a gap; the factor there has the base
/// pattern (or a random subset of its off-diagonal entries) with every
/// positive entry >= delta. All other factors are exact identities. Any
/// factor can be requested in any order; equal specs give bitwise equal
/// matrices.
class GeneratedSequence final : public MatrixSource {
public:
    explicit GeneratedSequence(GeneratorSpec spec);

    std::size_t dimension() const override { return spec_.n; }
    std::optional<std::size_t> length() const override { return spec_.steps; }
    StochasticMatrix at(std::size_t t) const override;

    const GeneratorSpec& spec() const noexcept { return spec_; }
    bool is_active(std::size_t t) const { return t < active_.size() && active_[t]; }
    const std::vector<std::size_t>& activation_times() const noexcept { return activation_times_; }
    std::size_t max_gap() const noexcept { return max_gap_; }

private:
    GeneratorSpec spec_;
    ZeroPattern base_;
    std::vector<bool> active_;
    std::vector<std::size_t> activation_times_;
    std::size_t max_gap_ = 1;
};

/// Validates the spec (InvalidDelta when a row of the base pattern cannot
/// hold delta on every positive entry) and builds the sequence.
GeneratedSequence generate_sequence(const GeneratorSpec& spec);

enum class SeriesMode { Log, LogLog };
enum class Trend { Converging, Diverging, Inconclusive };

std::string_view to_string(GapMode mode);
std::string_view to_string(SeriesMode mode);
std::string_view to_string(Trend trend);

struct SeriesCheckpoint {
    std::size_t n = 0;
    double term = 0.0;
    double partial_sum = 0.0;
};

struct SeriesReport {
    SeriesMode mode = SeriesMode::Log;
    double delta = 0.0;
    double a = 0.0;
    std::size_t terms = 0;
    // Terms are n^exponent (log) or (ln n)^exponent (loglog), exponent = a ln delta.
    double exponent = 0.0;
    std::vector<SeriesCheckpoint> checkpoints;
    std::vector<SeriesCheckpoint> samples;  // log-spaced, about 20 per decade
    Trend verdict = Trend::Inconclusive;    // closed form
    Trend empirical = Trend::Inconclusive;  // from successive decade gains
    double decade_ratio = 0.0;              // last decade gain / previous one
    bool near_boundary = false;             // |a ln delta + 1| < 0.05
    std::optional<double> tail_corrected_limit;  // converging log series only
    // Loglog: gain between consecutive decade checkpoints and the integral
    // lower bound over the same terms.
    std::vector<double> interval_gains;
    std::vector<double> interval_lower_bounds;
    bool gains_exceed_bounds = true;
};

/// Partial sums of sum_{n>=1} delta^(a log n) or sum_{n>=3} delta^(a log log n).
/// Throws ParameterOutOfRange unless 0 < delta < 1, a > 0 and terms >= 10.
SeriesReport series_partial_sums(SeriesMode mode, double delta, double a, std::size_t terms);

struct GrowthReport {
    GeneratorSpec spec;
    AccumulationSchedule schedule;
    ConvergenceReport convergence;
    std::vector<std::size_t> gaps;      // designed gaps within the horizon
    double designed_series = 0.0;       // sum of delta^gap_i
    double measured_delta_sum = 0.0;    // sum of measured delta_i
    bool delta_floor_holds = true;      // delta_i >= delta^(window length) on every window
    bool hypothesis_at_risk = false;    // log gaps with a ln delta < -1
    bool reached_consensus = false;
    std::size_t windows_to_converge = 0;
    std::size_t steps_to_converge = 0;
};

/// Generates the sequence, detects its schedule (confirmation span at least
/// one more than the largest gap) and runs the convergence check with
/// x(0) spread evenly over [0, 1].
GrowthReport growth_experiment(const GeneratorSpec& spec, std::size_t horizon, double eps_c,
                               const Tolerances& tolerances = {});

struct DeltaThreshold {
    double inv_e = 0.0;
    std::size_t max_positive_entries = 0;  // per stochastic row with min+ >= delta
    bool above_inv_e = false;
};

/// Throws ParameterOutOfRange unless 0 < delta <= 1.
DeltaThreshold check_delta_threshold(double delta);

} // namespace consensus
