#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace consensus {

enum class ErrorCode {
    NonSquare,
    NegativeEntry,
    RowSumViolation,
    ZeroRow,
    DimensionMismatch,
    SourceExhausted,
    MissingPositiveDiagonal,
    BlockAboveDiagonal,
    EigenSolverFailure,
    BlockTooSmall,
    FormMismatch,
    MonotonicityViolation,
    InvariantViolation,
    Explosion,
    InvalidDelta,
    ParameterOutOfRange,
    MalformedInput,
    ScheduleNotStabilized,
};

std::string_view to_string(ErrorCode code);

// Input errors map to exit status 1, broken invariants to 2, exhausted
// budgets to 3.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class RowSumViolation : public Error {
public:
    RowSumViolation(std::size_t row, double deviation);

    std::size_t row() const noexcept { return row_; }
    double deviation() const noexcept { return deviation_; }

private:
    std::size_t row_;
    double deviation_;
};

} // namespace consensus
