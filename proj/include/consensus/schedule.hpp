#pragma once

#include "consensus/source.hpp"
#include "consensus/stochastic.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace consensus {

enum class Direction { Backward, Forward };

struct ScheduleOptions {
    std::size_t horizon = 10000;  // factors examined, capped by the source length
    // Factors a window pattern must survive unchanged before the cut is
    // declared; defaults to n * n.
    std::optional<std::size_t> confirmation_span;
    double eps_z = kDefaultZeroThreshold;
    Direction direction = Direction::Backward;
};

/// Stabilization times t_0 < t_1 < ... with a shared window pattern.
///
/// Window i is the accumulation over [times[i], times[i + 1]).
struct AccumulationSchedule {
    std::vector<std::size_t> times;
    ZeroPattern common_pattern;
    Direction direction = Direction::Backward;
    std::size_t horizon = 0;
    bool stabilized = false;
    std::size_t confirmation_span = 0;
    // Confirmed cuts before the leading windows were discarded.
    std::vector<std::size_t> raw_cuts;
    std::vector<std::string> warnings;

    std::size_t window_count() const noexcept { return times.empty() ? 0 : times.size() - 1; }
};

/// Finite-horizon version of the stabilization construction.
///
/// Each window grows from the previous cut until its boolean accumulation
/// pattern has stayed unchanged for the confirmation span; the cut is placed
/// where that pattern was first reached. The first cut only removes the
/// prefix A(t*_0, 0). Leading windows are then dropped until the remaining
/// window patterns are all equal. Throws MissingPositiveDiagonal; a horizon
/// that is too short yields stabilized == false and a warning.
AccumulationSchedule detect_schedule(const MatrixSource& seq, const ScheduleOptions& options = {});

struct ScheduleCheck {
    bool ok = true;
    std::optional<std::size_t> first_violation;  // window index
};

/// Recomputes every window pattern from the factors and compares it with
/// the schedule's common pattern.
ScheduleCheck verify_schedule(const MatrixSource& seq, const AccumulationSchedule& schedule,
                              double eps_z = kDefaultZeroThreshold);

/// The window accumulations A(i) = A(t_{i+1}, t_i) (or the forward products).
std::vector<StochasticMatrix> window_accumulations(const MatrixSource& seq, const AccumulationSchedule& schedule,
                                                   double eps_row = kDefaultRowTolerance,
                                                   std::optional<std::size_t> max_windows = std::nullopt);

/// Diagonal blocks of the pattern's Gantmacher form are all-true and every
/// block below them is all-true or all-false.
bool has_stable_block_structure(const ZeroPattern& p);

} // namespace consensus
