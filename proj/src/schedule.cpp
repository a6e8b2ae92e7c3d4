#include "consensus/schedule.hpp"

#include "consensus/errors.hpp"
#include "consensus/gantmacher.hpp"

namespace consensus {

namespace {

class PatternCache {
public:
    PatternCache(const MatrixSource& seq, double eps_z) : seq_(seq), eps_z_(eps_z) {}

    const ZeroPattern& at(std::size_t t) {
        while (patterns_.size() <= t) {
            ZeroPattern p = pattern_of(seq_.at(patterns_.size()), eps_z_);
            if (!p.has_positive_diagonal()) {
                throw Error(ErrorCode::MissingPositiveDiagonal,
                            "factor " + std::to_string(patterns_.size()) + " has a zero diagonal entry");
            }
            patterns_.push_back(std::move(p));
        }
        return patterns_[t];
    }

private:
    const MatrixSource& seq_;
    double eps_z_;
    std::vector<ZeroPattern> patterns_;
};

ZeroPattern extend(const ZeroPattern& acc, const ZeroPattern& factor, Direction direction) {
    return direction == Direction::Backward ? pattern_product(factor, acc) : pattern_product(acc, factor);
}

} // namespace

namespace {

// One pass with a fixed span. `short_span` is set when a window gained
// entries over its predecessor.
AccumulationSchedule detect_with_span(const MatrixSource& seq, PatternCache& cache, const ScheduleOptions& options,
                                      std::size_t horizon, std::size_t span, bool& short_span) {
    const std::size_t n = seq.dimension();
    short_span = false;
    AccumulationSchedule out;
    out.direction = options.direction;
    out.horizon = horizon;
    out.confirmation_span = span;

    std::vector<ZeroPattern> window_patterns;
    std::size_t cut = 0;
    bool first = true;
    while (cut < horizon) {
        ZeroPattern acc = cache.at(cut);
        std::size_t t = cut + 1;
        std::size_t last_change = t;
        bool confirmed = false;
        while (true) {
            if (t - last_change >= span) {
                confirmed = true;
                break;
            }
            if (t >= horizon) break;
            ZeroPattern next = extend(acc, cache.at(t), options.direction);
            if (!acc.is_subset_of(next)) {
                throw Error(ErrorCode::InvariantViolation,
                            "window pattern lost an entry at step " + std::to_string(t));
            }
            ++t;
            if (!(next == acc)) {
                acc = std::move(next);
                last_change = t;
            }
        }
        if (!confirmed) break;
        if (!first) window_patterns.push_back(acc);
        first = false;
        out.raw_cuts.push_back(last_change);
        cut = last_change;
    }

    // Keep the longest tail of identical window patterns.
    std::size_t discarded = window_patterns.size();
    while (discarded > 0 && window_patterns[discarded - 1] == window_patterns.back()) --discarded;

    for (std::size_t i = 0; i + 1 < window_patterns.size(); ++i) {
        if (!window_patterns[i + 1].is_subset_of(window_patterns[i])) {
            out.warnings.push_back("window " + std::to_string(i + 1) +
                                   " gained entries over its predecessor; confirmation span may be too short");
            short_span = true;
            break;
        }
    }

    if (!window_patterns.empty()) {
        out.times.assign(out.raw_cuts.begin() + static_cast<std::ptrdiff_t>(discarded), out.raw_cuts.end());
        out.common_pattern = window_patterns.back();
    } else {
        out.times = out.raw_cuts;
        out.common_pattern = ZeroPattern::identity(n);
    }

    const std::size_t equal_windows = window_patterns.size() - discarded;
    if (equal_windows < 2) {
        out.warnings.push_back("HorizonTooSmall: " + std::to_string(equal_windows) +
                               " confirmed equal-pattern windows within " + std::to_string(horizon) + " steps");
    } else if (!has_stable_block_structure(out.common_pattern)) {
        out.warnings.push_back("common pattern has non-uniform Gantmacher blocks; windows are not maximal");
    } else {
        out.stabilized = true;
    }
    return out;
}

} // namespace

AccumulationSchedule detect_schedule(const MatrixSource& seq, const ScheduleOptions& options) {
    const std::size_t n = seq.dimension();
    const std::size_t horizon = seq.available(options.horizon);
    std::size_t span = options.confirmation_span.value_or(n * n);
    if (span == 0) throw Error(ErrorCode::ParameterOutOfRange, "confirmation span must be positive");

    PatternCache cache(seq, options.eps_z);
    bool short_span = false;
    AccumulationSchedule out = detect_with_span(seq, cache, options, horizon, span, short_span);
    // A default span that lets a later window outgrow an earlier one is too
    // short for this sequence: double it while windows can still repeat.
    while (!options.confirmation_span && short_span && 2 * span <= horizon / 8) {
        span *= 2;
        AccumulationSchedule longer = detect_with_span(seq, cache, options, horizon, span, short_span);
        if (!longer.stabilized && out.stabilized) break;
        out = std::move(longer);
    }
    return out;
}

ScheduleCheck verify_schedule(const MatrixSource& seq, const AccumulationSchedule& schedule, double eps_z) {
    ScheduleCheck check;
    for (std::size_t i = 0; i + 1 < schedule.times.size(); ++i) {
        const std::size_t begin = schedule.times[i];
        const std::size_t end = schedule.times[i + 1];
        ZeroPattern acc = ZeroPattern::identity(seq.dimension());
        for (std::size_t t = begin; t < end; ++t) {
            acc = extend(acc, pattern_of(seq.at(t), eps_z), schedule.direction);
        }
        if (!(acc == schedule.common_pattern)) {
            check.ok = false;
            check.first_violation = i;
            return check;
        }
    }
    return check;
}

std::vector<StochasticMatrix> window_accumulations(const MatrixSource& seq, const AccumulationSchedule& schedule,
                                                   double eps_row, std::optional<std::size_t> max_windows) {
    std::size_t count = schedule.window_count();
    if (max_windows) count = std::min(count, *max_windows);
    std::vector<StochasticMatrix> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t begin = schedule.times[i];
        const std::size_t end = schedule.times[i + 1];
        out.push_back(schedule.direction == Direction::Backward ? backward_accumulate(seq, begin, end, eps_row)
                                                                : forward_accumulate(seq, begin, end, eps_row));
    }
    return out;
}

bool has_stable_block_structure(const ZeroPattern& p) {
    if (!p.has_positive_diagonal()) return false;
    const GantmacherForm form = gantmacher_form(p);
    const auto signs = block_signs(p, form);
    for (std::size_t k = 0; k < form.class_count(); ++k) {
        if (signs[k][k] != BlockSign::Positive) return false;
        for (std::size_t l = 0; l < form.class_count(); ++l) {
            if (l > k && signs[k][l] != BlockSign::Zero) return false;
            if (l < k && signs[k][l] == BlockSign::Mixed) return false;
        }
    }
    return true;
}

} // namespace consensus
