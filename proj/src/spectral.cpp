#include "consensus/spectral.hpp"

#include "consensus/errors.hpp"
#include "consensus/linalg.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace consensus {

Projection build_projection(std::size_t n_k) {
    if (n_k < 2) {
        throw Error(ErrorCode::BlockTooSmall, "a block of size " + std::to_string(n_k) + " needs no projection");
    }
    const auto n = static_cast<Eigen::Index>(n_k);
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(n - 1, n);
    for (Eigen::Index j = 1; j < n; ++j) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(j * (j + 1)));
        rows.row(j - 1).head(j).setConstant(scale);
        rows(j - 1, j) = -static_cast<double>(j) * scale;
    }
    return {std::move(rows)};
}

Eigen::MatrixXd transform_block(const Eigen::MatrixXd& a_k, const Projection& p) {
    if (a_k.rows() != a_k.cols()) throw Error(ErrorCode::NonSquare, "transform of a non-square block");
    if (a_k.rows() == 1 && p.rows.size() == 0) return Eigen::MatrixXd(0, 0);
    if (static_cast<std::size_t>(a_k.rows()) != p.block_size()) {
        throw Error(ErrorCode::DimensionMismatch, "block of size " + std::to_string(a_k.rows()) +
                                                      " with projection for " + std::to_string(p.block_size()));
    }
    return p.rows * a_k * p.rows.transpose();
}

namespace {

Projection projection_or_empty(std::size_t n_k) {
    if (n_k < 2) return {Eigen::MatrixXd(0, static_cast<Eigen::Index>(n_k))};
    return build_projection(n_k);
}

Eigen::Index ei(std::size_t v) { return static_cast<Eigen::Index>(v); }

} // namespace

Eigen::MatrixXd stacked_projection(const GantmacherForm& form) {
    const std::size_t n = form.dimension();
    const std::size_t g = form.essential_count();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(ei(n - g), ei(n));
    std::size_t row = 0;
    for (std::size_t k = 0; k < form.class_count(); ++k) {
        const std::size_t nk = form.class_size(k);
        if (k < g) {
            const Projection pk = projection_or_empty(nk);
            p.block(ei(row), ei(form.offsets[k]), ei(nk - 1), ei(nk)) = pk.rows;
            row += nk - 1;
        } else {
            p.block(ei(row), ei(form.offsets[k]), ei(nk), ei(nk)).setIdentity();
            row += nk;
        }
    }
    return p;
}

Eigen::MatrixXd transform_full(const StochasticMatrix& a, const GantmacherForm& form, double eps_z) {
    if (a.size() != form.dimension()) {
        throw Error(ErrorCode::FormMismatch, "matrix of size " + std::to_string(a.size()) + " against a form of size " +
                                                 std::to_string(form.dimension()));
    }
    if (!is_block_lower_triangular(pattern_of(a, eps_z), form)) {
        throw Error(ErrorCode::FormMismatch, "matrix has entries above the block diagonal of the form");
    }

    const Eigen::MatrixXd permuted = form.permute(a.matrix());
    const std::size_t g = form.essential_count();
    const std::size_t classes = form.class_count();

    std::vector<Projection> projections;
    std::vector<std::size_t> out_offsets{0};
    for (std::size_t k = 0; k < classes; ++k) {
        const std::size_t nk = form.class_size(k);
        if (k < g) projections.push_back(projection_or_empty(nk));
        out_offsets.push_back(out_offsets.back() + (k < g ? nk - 1 : nk));
    }

    const auto m = ei(out_offsets.back());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    auto source_block = [&](std::size_t k, std::size_t l) {
        const BlockRange b = form.block(k, l);
        return permuted.block(ei(b.row_begin), ei(b.col_begin), ei(b.rows), ei(b.cols));
    };
    for (std::size_t k = 0; k < classes; ++k) {
        const auto rows = ei(out_offsets[k + 1] - out_offsets[k]);
        if (rows == 0) continue;
        if (k < g) {
            out.block(ei(out_offsets[k]), ei(out_offsets[k]), rows, rows) =
                transform_block(source_block(k, k), projections[k]);
            continue;
        }
        for (std::size_t l = 0; l <= k; ++l) {
            const auto cols = ei(out_offsets[l + 1] - out_offsets[l]);
            if (cols == 0) continue;
            auto target = out.block(ei(out_offsets[k]), ei(out_offsets[l]), rows, cols);
            if (l < g)
                target = source_block(k, l) * projections[l].rows.transpose();
            else
                target = source_block(k, l);
        }
    }
    return out;
}

double spectral_radius(const Eigen::MatrixXd& m) {
    double rho = 0.0;
    for (const auto& lambda : eigenvalues(m)) rho = std::max(rho, std::abs(lambda));
    return rho;
}

std::size_t fixed_space_multiplicity(const StochasticMatrix& a, double tol) {
    const Eigen::MatrixXd shifted = a.matrix() - Eigen::MatrixXd::Identity(ei(a.size()), ei(a.size()));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(shifted);
    const double threshold = tol * row_sum_norm(a.matrix());
    std::size_t nullity = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) <= threshold) ++nullity;
    return nullity;
}

// JSR enumeration ----------------------------------------------------------

namespace {

struct LengthStats {
    double max_norm = 0.0;
    double max_rho = -1.0;
    std::vector<std::size_t> witness;
};

// Depth-first enumeration of all products A(i_1)...A(i_m) with a fixed
// first factor, lengths 1..depth.
class ProductWalker {
public:
    ProductWalker(const std::vector<Eigen::MatrixXd>& set, std::size_t depth)
        : set_(set), depth_(depth), stats_(depth) {}

    void run(std::size_t first) {
        sequence_.assign(1, first);
        visit(set_[first]);
    }

    const std::vector<LengthStats>& stats() const { return stats_; }

private:
    void visit(const Eigen::MatrixXd& product) {
        const std::size_t m = sequence_.size();
        LengthStats& s = stats_[m - 1];
        s.max_norm = std::max(s.max_norm, row_sum_norm(product));
        const double rho = spectral_radius(product);
        if (rho > s.max_rho) {
            s.max_rho = rho;
            s.witness = sequence_;
        }
        if (m == depth_) return;
        for (std::size_t i = 0; i < set_.size(); ++i) {
            sequence_.push_back(i);
            visit(product * set_[i]);
            sequence_.pop_back();
        }
    }

    const std::vector<Eigen::MatrixXd>& set_;
    std::size_t depth_;
    std::vector<LengthStats> stats_;
    std::vector<std::size_t> sequence_;
};

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CONSENSUS_KIT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

} // namespace

JsrBounds jsr_bounds(const std::vector<Eigen::MatrixXd>& set, const JsrOptions& options) {
    if (set.empty()) throw Error(ErrorCode::ParameterOutOfRange, "empty matrix set");
    if (options.max_length == 0) throw Error(ErrorCode::ParameterOutOfRange, "product length must be >= 1");
    const Eigen::Index dim = set.front().rows();
    for (const auto& m : set) {
        if (m.rows() != dim || m.cols() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "matrix set mixes dimensions");
        }
    }

    const std::size_t count = set.size();
    if (count > options.budget) {
        throw Error(ErrorCode::Explosion, std::to_string(count) + " single products exceed the budget of " +
                                              std::to_string(options.budget));
    }
    std::size_t depth = 1;
    for (std::size_t products = count; depth < options.max_length;) {
        if (products > options.budget / count) break;
        products *= count;
        ++depth;
    }

    // Each thread owns a strided set of first factors; merging in first
    // factor order with strict comparisons keeps the witness deterministic.
    const unsigned threads = std::min<unsigned>(resolve_threads(options.threads), static_cast<unsigned>(count));
    std::vector<ProductWalker> walkers;
    walkers.reserve(count);
    for (std::size_t i = 0; i < count; ++i) walkers.emplace_back(set, depth);
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t first = t; first < count; first += threads) walkers[first].run(first);
            });
        }
    }

    JsrBounds out;
    out.max_length = depth;
    out.truncated = depth < options.max_length;
    out.lower = 0.0;
    out.upper = std::numeric_limits<double>::infinity();
    for (std::size_t m = 1; m <= depth; ++m) {
        LengthStats merged;
        for (const auto& w : walkers) {
            const LengthStats& s = w.stats()[m - 1];
            merged.max_norm = std::max(merged.max_norm, s.max_norm);
            if (s.max_rho > merged.max_rho) {
                merged.max_rho = s.max_rho;
                merged.witness = s.witness;
            }
        }
        const double inv = 1.0 / static_cast<double>(m);
        const double upper_m = std::pow(merged.max_norm, inv);
        const double lower_m = std::pow(std::max(merged.max_rho, 0.0), inv);
        out.upper = std::min(out.upper, upper_m);
        if (out.witness.empty() || lower_m > out.lower) {
            out.lower = lower_m;
            out.witness = merged.witness;
        }
        out.lower_by_length.push_back(out.lower);
        out.upper_by_length.push_back(out.upper);
    }
    return out;
}

} // namespace consensus
