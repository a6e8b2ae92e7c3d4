#pragma once

#include "consensus/stochastic.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace consensus {

// Index sets of communicating classes, 0-based original indices.
using ClassList = std::vector<std::vector<std::size_t>>;

/// Communicating classes ordered essential-first.
///
/// Classes [0, essential_count) are essential; every later class reaches at
/// least one earlier class.
struct ClassPartition {
    ClassList classes;
    std::vector<bool> essential;
    std::size_t essential_count = 0;

    std::size_t size() const noexcept { return classes.size(); }
};

struct BlockRange {
    std::size_t row_begin = 0;
    std::size_t rows = 0;
    std::size_t col_begin = 0;
    std::size_t cols = 0;
};

/// Simultaneous row/column permutation to block lower triangular form.
struct GantmacherForm {
    // permutation[pos] is the original index placed at position pos.
    std::vector<std::size_t> permutation;
    ClassPartition partition;
    // Class k occupies permuted positions [offsets[k], offsets[k + 1]).
    std::vector<std::size_t> offsets;

    std::size_t dimension() const noexcept { return permutation.size(); }
    std::size_t class_count() const noexcept { return partition.size(); }
    std::size_t essential_count() const noexcept { return partition.essential_count; }
    std::size_t class_size(std::size_t k) const { return offsets[k + 1] - offsets[k]; }

    BlockRange block(std::size_t k, std::size_t l) const;
    Eigen::MatrixXd permute(const Eigen::MatrixXd& a) const;
    ZeroPattern permute(const ZeroPattern& p) const;
};

enum class BlockSign { Positive, Zero, Mixed };

/// Strongly connected components of the pattern digraph (Tarjan).
/// Throws MissingPositiveDiagonal unless every diagonal entry is set.
ClassList communicating_classes(const ZeroPattern& p);

/// Marks classes with no edge leaving them as essential and orders the
/// partition: essential classes by smallest index, then inessential classes
/// by topological tier with ties broken by smallest index.
ClassPartition classify_essential(const ClassList& classes, const ZeroPattern& p);

GantmacherForm gantmacher_form(const ZeroPattern& p);
GantmacherForm gantmacher_form(const StochasticMatrix& a, double eps_z = kDefaultZeroThreshold);

/// The (k, l) block of the permuted matrix. Throws BlockAboveDiagonal for k < l.
Eigen::MatrixXd extract_block(const StochasticMatrix& a, const GantmacherForm& form, std::size_t k,
                              std::size_t l);

/// Sign of every block (k, l), k >= l, of the permuted pattern; blocks above
/// the diagonal are reported from the pattern as well.
std::vector<std::vector<BlockSign>> block_signs(const ZeroPattern& p, const GantmacherForm& form);

/// True when the permuted pattern has no entry above the block diagonal.
bool is_block_lower_triangular(const ZeroPattern& p, const GantmacherForm& form);

/// Eigenvalues of `a` match the union of the diagonal block spectra within
/// tol under an optimal (bottleneck) pairing.
bool spectrum_union_check(const StochasticMatrix& a, const GantmacherForm& form, double tol);

} // namespace consensus
