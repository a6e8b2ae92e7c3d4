#pragma once

#include "consensus/gantmacher.hpp"
#include "consensus/stochastic.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace consensus {

/// (n_k - 1) x n_k matrix with orthonormal rows spanning the complement of
/// the all-ones vector.
struct Projection {
    Eigen::MatrixXd rows;

    std::size_t block_size() const noexcept { return static_cast<std::size_t>(rows.cols()); }
};

/// Helmert basis: row j is (1, ..., 1, -j, 0, ..., 0) / sqrt(j (j + 1)) with
/// j leading ones. Throws BlockTooSmall for n_k < 2.
Projection build_projection(std::size_t n_k);

/// P A Pᵀ for a row-stochastic block. Since P 1 = 0 the similarity with
/// [1/sqrt(n) | Pᵀ] is block triangular, so the result carries the spectrum
/// of A with one eigenvalue 1 removed. A 1x1 block maps to a 0x0 matrix.
Eigen::MatrixXd transform_block(const Eigen::MatrixXd& a_k, const Projection& p);

/// The stacked projection diag(P_1, ..., P_g, I) in Gantmacher coordinates,
/// of size (n - g) x n.
Eigen::MatrixXd stacked_projection(const GantmacherForm& form);

/// Transformed window matrix assembled block by block: P_k A_k P_kᵀ on the
/// essential diagonal, A_{k,l} P_lᵀ for essential columns of inessential
/// rows, and the inessential blocks unchanged. Throws FormMismatch when `a`
/// does not have the block structure of `form`.
Eigen::MatrixXd transform_full(const StochasticMatrix& a, const GantmacherForm& form,
                               double eps_z = kDefaultZeroThreshold);

double spectral_radius(const Eigen::MatrixXd& m);

/// Dimension of ker(A - I), counting singular values below tol * ||A||.
std::size_t fixed_space_multiplicity(const StochasticMatrix& a, double tol = 1e-8);

struct JsrOptions {
    std::size_t max_length = 4;
    std::size_t budget = 1'000'000;  // products per length
    unsigned threads = 0;            // 0: CONSENSUS_KIT_THREADS, else hardware
};

struct JsrBounds {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t max_length = 0;  // longest product length evaluated
    std::vector<std::size_t> witness;  // factor indices of the lower bound
    bool truncated = false;            // budget stopped before options.max_length
    // Running bounds after lengths 1..max_length.
    std::vector<double> lower_by_length;
    std::vector<double> upper_by_length;
};

/// Three-member bounds on the joint spectral radius from all products up to
/// the given length: max rho(product)^(1/m) below, min over m of
/// max ||product||^(1/m) above, in the row-sum norm.
///
/// Lengths whose product count exceeds the budget are skipped and the result
/// is flagged as truncated; throws Explosion when even length 1 is over
/// budget.
JsrBounds jsr_bounds(const std::vector<Eigen::MatrixXd>& set, const JsrOptions& options = {});

} // namespace consensus
