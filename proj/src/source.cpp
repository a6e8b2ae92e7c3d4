#include "consensus/source.hpp"

#include "consensus/errors.hpp"

#include <algorithm>

namespace consensus {

namespace {

[[noreturn]] void exhausted(std::size_t t, std::size_t length) {
    throw Error(ErrorCode::SourceExhausted,
                "index " + std::to_string(t) + " requested, " + std::to_string(length) + " available");
}

} // namespace

std::size_t MatrixSource::available(std::size_t horizon) const {
    const auto len = length();
    return len ? std::min(*len, horizon) : horizon;
}

VectorSource::VectorSource(std::vector<StochasticMatrix> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw Error(ErrorCode::MalformedInput, "empty matrix sequence");
    const std::size_t n = factors_.front().size();
    for (const auto& f : factors_) {
        if (f.size() != n) {
            throw Error(ErrorCode::DimensionMismatch, "sequence mixes dimensions");
        }
    }
}

std::size_t VectorSource::dimension() const { return factors_.front().size(); }

StochasticMatrix VectorSource::at(std::size_t t) const {
    if (t >= factors_.size()) exhausted(t, factors_.size());
    return factors_[t];
}

ConstantSource::ConstantSource(StochasticMatrix a, std::optional<std::size_t> length)
    : a_(std::move(a)), length_(length) {}

StochasticMatrix ConstantSource::at(std::size_t t) const {
    if (length_ && t >= *length_) exhausted(t, *length_);
    return a_;
}

FunctionSource::FunctionSource(std::size_t n, Generator gen, std::optional<std::size_t> length)
    : n_(n), gen_(std::move(gen)), length_(length) {}

StochasticMatrix FunctionSource::at(std::size_t t) const {
    if (length_ && t >= *length_) exhausted(t, *length_);
    return gen_(t);
}

StochasticMatrix backward_accumulate(const MatrixSource& seq, std::size_t s, std::size_t t,
                                     double eps_row) {
    if (t < s) throw Error(ErrorCode::ParameterOutOfRange, "backward accumulation needs s <= t");
    StochasticMatrix acc = StochasticMatrix::identity(seq.dimension());
    for (std::size_t u = s; u < t; ++u) acc = multiply(seq.at(u), acc, eps_row);
    return acc;
}

StochasticMatrix forward_accumulate(const MatrixSource& seq, std::size_t s, std::size_t t,
                                    double eps_row) {
    if (t < s) throw Error(ErrorCode::ParameterOutOfRange, "forward accumulation needs s <= t");
    StochasticMatrix acc = StochasticMatrix::identity(seq.dimension());
    for (std::size_t u = s; u < t; ++u) acc = multiply(acc, seq.at(u), eps_row);
    return acc;
}

} // namespace consensus
