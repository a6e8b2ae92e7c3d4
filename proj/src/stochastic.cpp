#include "consensus/stochastic.hpp"

#include "consensus/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace consensus {

// StochasticMatrix --------------------------------------------------------

StochasticMatrix StochasticMatrix::identity(std::size_t n) {
    const auto sz = static_cast<Eigen::Index>(n);
    return StochasticMatrix(Eigen::MatrixXd::Identity(sz, sz));
}

StochasticMatrix validate(const Eigen::MatrixXd& entries, double eps_row, bool renormalize) {
    if (entries.rows() != entries.cols()) {
        std::ostringstream os;
        os << entries.rows() << "x" << entries.cols() << " input";
        throw Error(ErrorCode::NonSquare, os.str());
    }
    if (entries.rows() == 0) {
        throw Error(ErrorCode::NonSquare, "empty matrix");
    }
    for (Eigen::Index i = 0; i < entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < entries.cols(); ++j) {
            const double v = entries(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                std::ostringstream os;
                os << "entry (" << i << "," << j << ") = " << v;
                throw Error(ErrorCode::NegativeEntry, os.str());
            }
        }
    }

    Eigen::MatrixXd m = entries;
    const Eigen::VectorXd sums = m.rowwise().sum();
    if (renormalize) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (sums(i) <= 0.0) {
                throw Error(ErrorCode::ZeroRow, "row " + std::to_string(i) + " sums to zero");
            }
            m.row(i) /= sums(i);
        }
        return StochasticMatrix(std::move(m));
    }

    Eigen::Index worst = 0;
    double worst_dev = -1.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double dev = std::abs(sums(i) - 1.0);
        if (dev > worst_dev) {
            worst_dev = dev;
            worst = i;
        }
    }
    if (worst_dev > eps_row) {
        throw RowSumViolation(static_cast<std::size_t>(worst), worst_dev);
    }
    return StochasticMatrix(std::move(m));
}

StochasticMatrix multiply(const StochasticMatrix& a, const StochasticMatrix& b, double eps_row) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    Eigen::MatrixXd p = a.m_ * b.m_;
    const double tol = static_cast<double>(a.size()) * eps_row;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const double dev = std::abs(p.row(i).sum() - 1.0);
        if (dev > tol) {
            throw RowSumViolation(static_cast<std::size_t>(i), dev);
        }
    }
    return StochasticMatrix(std::move(p));
}

// ZeroPattern -------------------------------------------------------------

ZeroPattern::ZeroPattern(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

ZeroPattern ZeroPattern::identity(std::size_t n) {
    ZeroPattern p(n);
    for (std::size_t i = 0; i < n; ++i) p.set(i, i);
    return p;
}

ZeroPattern ZeroPattern::full(std::size_t n) {
    ZeroPattern p(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p.set(i, j);
    return p;
}

void ZeroPattern::set(std::size_t i, std::size_t j, bool value) {
    const std::uint64_t mask = std::uint64_t{1} << (j % 64);
    auto& word = bits_[i * words_ + j / 64];
    word = value ? (word | mask) : (word & ~mask);
}

std::size_t ZeroPattern::count() const {
    std::size_t c = 0;
    for (auto w : bits_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

bool ZeroPattern::has_positive_diagonal() const {
    for (std::size_t i = 0; i < n_; ++i)
        if (!(*this)(i, i)) return false;
    return true;
}

bool ZeroPattern::is_subset_of(const ZeroPattern& other) const {
    if (n_ != other.n_) return false;
    for (std::size_t k = 0; k < bits_.size(); ++k)
        if (bits_[k] & ~other.bits_[k]) return false;
    return true;
}

ZeroPattern ZeroPattern::transposed() const {
    ZeroPattern t(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
            if ((*this)(i, j)) t.set(j, i);
    return t;
}

void ZeroPattern::or_row_into(std::size_t i, ZeroPattern& out, std::size_t into) const {
    for (std::size_t w = 0; w < words_; ++w) out.bits_[into * words_ + w] |= bits_[i * words_ + w];
}

ZeroPattern pattern_of(const Eigen::MatrixXd& a, double eps_z) {
    const auto n = static_cast<std::size_t>(a.rows());
    ZeroPattern p(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > eps_z) p.set(i, j);
    return p;
}

ZeroPattern pattern_of(const StochasticMatrix& a, double eps_z) {
    return pattern_of(a.matrix(), eps_z);
}

ZeroPattern pattern_product(const ZeroPattern& p, const ZeroPattern& q) {
    if (p.size() != q.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(p.size()) + " vs " + std::to_string(q.size()));
    }
    const std::size_t n = p.size();
    ZeroPattern out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (p(i, k)) q.or_row_into(k, out, i);
    return out;
}

// Scalar functionals ------------------------------------------------------

// For rows summing to one, 1 - sum_k min(a_ik, a_jk) = (1/2) sum_k |a_ik - a_jk|.
// The second form has no cancellation near zero and is exactly 0 on equal rows.
double tau(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    if (n <= 1) return 0.0;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            worst = std::max(worst, 0.5 * (a.row(i) - a.row(j)).cwiseAbs().sum());
        }
    }
    return std::min(worst, 1.0);
}

double tau(const StochasticMatrix& a) { return tau(a.matrix()); }

double pos_min(const Eigen::MatrixXd& a, double eps_z) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (a(i, j) > eps_z) best = std::min(best, a(i, j));
    return std::isinf(best) ? 0.0 : best;
}

double pos_min(const StochasticMatrix& a, double eps_z) { return pos_min(a.matrix(), eps_z); }

double row_sum_norm(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double column_spread(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return 0.0;
    return (a.colwise().maxCoeff() - a.colwise().minCoeff()).maxCoeff();
}

bool is_consensus(const StochasticMatrix& a, double eps_c) { return column_spread(a.matrix()) <= eps_c; }

bool is_type_symmetric(const StochasticMatrix& a, double eps_z) {
    const ZeroPattern p = pattern_of(a, eps_z);
    return p == p.transposed();
}

} // namespace consensus
