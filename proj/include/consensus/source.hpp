#pragma once

#include "consensus/stochastic.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace consensus {

/// Indexed sequence A(0), A(1), ... of confidence matrices.
///
/// Implementations must be deterministic: at(t) returns the same matrix on
/// every call.
class MatrixSource {
public:
    virtual ~MatrixSource() = default;

    virtual std::size_t dimension() const = 0;
    // Number of available factors, or nullopt for an unbounded source.
    virtual std::optional<std::size_t> length() const = 0;
    // Throws Error(SourceExhausted) past the end.
    virtual StochasticMatrix at(std::size_t t) const = 0;

    // Factors available in [0, horizon).
    std::size_t available(std::size_t horizon) const;
};

class VectorSource final : public MatrixSource {
public:
    explicit VectorSource(std::vector<StochasticMatrix> factors);

    std::size_t dimension() const override;
    std::optional<std::size_t> length() const override { return factors_.size(); }
    StochasticMatrix at(std::size_t t) const override;

    const std::vector<StochasticMatrix>& factors() const noexcept { return factors_; }

private:
    std::vector<StochasticMatrix> factors_;
};

class ConstantSource final : public MatrixSource {
public:
    explicit ConstantSource(StochasticMatrix a, std::optional<std::size_t> length = std::nullopt);

    std::size_t dimension() const override { return a_.size(); }
    std::optional<std::size_t> length() const override { return length_; }
    StochasticMatrix at(std::size_t t) const override;

private:
    StochasticMatrix a_;
    std::optional<std::size_t> length_;
};

class FunctionSource final : public MatrixSource {
public:
    using Generator = std::function<StochasticMatrix(std::size_t)>;

    FunctionSource(std::size_t n, Generator gen, std::optional<std::size_t> length = std::nullopt);

    std::size_t dimension() const override { return n_; }
    std::optional<std::size_t> length() const override { return length_; }
    StochasticMatrix at(std::size_t t) const override;

private:
    std::size_t n_;
    Generator gen_;
    std::optional<std::size_t> length_;
};

/// A(t, s) = A(t-1) ... A(s); identity when t == s.
StochasticMatrix backward_accumulate(const MatrixSource& seq, std::size_t s, std::size_t t,
                                     double eps_row = kDefaultRowTolerance);

/// A(s, t) = A(s) ... A(t-1); identity when t == s.
StochasticMatrix forward_accumulate(const MatrixSource& seq, std::size_t s, std::size_t t,
                                    double eps_row = kDefaultRowTolerance);

} // namespace consensus
