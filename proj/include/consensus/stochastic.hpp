#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace consensus {

inline constexpr double kDefaultZeroThreshold = 1e-12;
inline constexpr double kDefaultRowTolerance = 1e-10;
inline constexpr double kDefaultConsensusTolerance = 1e-9;

struct Tolerances {
    double eps_z = kDefaultZeroThreshold;   // entries <= eps_z are structural zeros
    double eps_row = kDefaultRowTolerance;  // admissible row-sum deviation
    double eps_c = kDefaultConsensusTolerance;  // column spread counted as consensus
};

/// Square nonnegative matrix whose rows sum to one (a confidence matrix).
///
/// Instances are only produced by validate() and the operations below, so
/// holding one means the invariants were checked.
class StochasticMatrix {
public:
    static StochasticMatrix identity(std::size_t n);

    std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    double operator()(std::size_t i, std::size_t j) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const Eigen::MatrixXd& matrix() const noexcept { return m_; }

    friend bool operator==(const StochasticMatrix& a, const StochasticMatrix& b) {
        return a.m_ == b.m_;
    }

private:
    explicit StochasticMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}

    friend StochasticMatrix validate(const Eigen::MatrixXd&, double, bool);
    friend StochasticMatrix multiply(const StochasticMatrix&, const StochasticMatrix&, double);

    Eigen::MatrixXd m_;
};

/// Positivity mask of an n x n matrix, stored as one bit row per index.
///
/// Two nonnegative matrices are of the same type iff their patterns compare
/// equal.
class ZeroPattern {
public:
    ZeroPattern() = default;
    explicit ZeroPattern(std::size_t n);

    static ZeroPattern identity(std::size_t n);
    static ZeroPattern full(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    bool operator()(std::size_t i, std::size_t j) const {
        return (bits_[i * words_ + j / 64] >> (j % 64)) & 1U;
    }
    void set(std::size_t i, std::size_t j, bool value = true);

    std::size_t count() const;
    bool has_positive_diagonal() const;
    bool is_subset_of(const ZeroPattern& other) const;
    ZeroPattern transposed() const;

    // Row i ORed into row `into` of `out`; building block of the boolean product.
    void or_row_into(std::size_t i, ZeroPattern& out, std::size_t into) const;

    friend bool operator==(const ZeroPattern& a, const ZeroPattern& b) {
        return a.n_ == b.n_ && a.bits_ == b.bits_;
    }

private:
    std::size_t n_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> bits_;
};

/// Real opinion vector x(t), one entry per agent.
class OpinionVector {
public:
    OpinionVector() = default;
    explicit OpinionVector(Eigen::VectorXd values) : values_(std::move(values)) {}

    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    const Eigen::VectorXd& values() const noexcept { return values_; }

private:
    Eigen::VectorXd values_;
};

/// Checks that `entries` is square, nonnegative and row-stochastic.
///
/// With `renormalize` every row is divided by its sum instead of being
/// checked against `eps_row`. Throws Error (NonSquare, NegativeEntry, ZeroRow)
/// or RowSumViolation carrying the worst row.
StochasticMatrix validate(const Eigen::MatrixXd& entries, double eps_row = kDefaultRowTolerance,
                          bool renormalize = false);

/// Exact product a * b, revalidated at size * eps_row.
StochasticMatrix multiply(const StochasticMatrix& a, const StochasticMatrix& b,
                          double eps_row = kDefaultRowTolerance);

ZeroPattern pattern_of(const Eigen::MatrixXd& a, double eps_z = kDefaultZeroThreshold);
ZeroPattern pattern_of(const StochasticMatrix& a, double eps_z = kDefaultZeroThreshold);

/// Boolean semiring product: (PQ)_ij iff P_ik and Q_kj for some k.
ZeroPattern pattern_product(const ZeroPattern& p, const ZeroPattern& q);

/// Coefficient of ergodicity 1 - min_{i,j} sum_k min(a_ik, a_jk). A 1x1
/// matrix has coefficient 0.
double tau(const Eigen::MatrixXd& a);
double tau(const StochasticMatrix& a);

/// Smallest entry strictly above eps_z; 0 when there is none.
double pos_min(const Eigen::MatrixXd& a, double eps_z = kDefaultZeroThreshold);
double pos_min(const StochasticMatrix& a, double eps_z = kDefaultZeroThreshold);

/// max_i sum_j |m_ij|; 0 for an empty block.
double row_sum_norm(const Eigen::MatrixXd& m);

/// Largest column spread (column max minus column min).
double column_spread(const Eigen::MatrixXd& a);

bool is_consensus(const StochasticMatrix& a, double eps_c);
bool is_type_symmetric(const StochasticMatrix& a, double eps_z = kDefaultZeroThreshold);

} // namespace consensus
