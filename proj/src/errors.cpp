#include "consensus/errors.hpp"

#include <sstream>

namespace consensus {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::RowSumViolation: return "RowSumViolation";
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SourceExhausted: return "SourceExhausted";
    case ErrorCode::MissingPositiveDiagonal: return "MissingPositiveDiagonal";
    case ErrorCode::BlockAboveDiagonal: return "BlockAboveDiagonal";
    case ErrorCode::EigenSolverFailure: return "EigenSolverFailure";
    case ErrorCode::BlockTooSmall: return "BlockTooSmall";
    case ErrorCode::FormMismatch: return "FormMismatch";
    case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::Explosion: return "Explosion";
    case ErrorCode::InvalidDelta: return "InvalidDelta";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::ScheduleNotStabilized: return "ScheduleNotStabilized";
    }
    return "Unknown";
}

int exit_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::MonotonicityViolation:
    case ErrorCode::InvariantViolation:
    case ErrorCode::EigenSolverFailure:
        return 2;
    case ErrorCode::Explosion:
        return 3;
    default:
        return 1;
    }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {

std::string row_sum_message(std::size_t row, double deviation) {
    std::ostringstream os;
    os << "row " << row << " deviates from 1 by " << deviation;
    return os.str();
}

} // namespace

RowSumViolation::RowSumViolation(std::size_t row, double deviation)
    : Error(ErrorCode::RowSumViolation, row_sum_message(row, deviation)),
      row_(row),
      deviation_(deviation) {}

} // namespace consensus
