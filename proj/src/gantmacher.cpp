#include "consensus/gantmacher.hpp"

#include "consensus/errors.hpp"
#include "consensus/linalg.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace consensus {

namespace {

void require_positive_diagonal(const ZeroPattern& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!p(i, i)) {
            throw Error(ErrorCode::MissingPositiveDiagonal,
                        "diagonal entry " + std::to_string(i) + " is not positive");
        }
    }
}

} // namespace

// Iterative Tarjan; recursion depth would otherwise be O(n).
ClassList communicating_classes(const ZeroPattern& p) {
    require_positive_diagonal(p);
    const std::size_t n = p.size();
    constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();

    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    ClassList classes;
    std::size_t counter = 0;

    struct Frame {
        std::size_t v;
        std::size_t next;
    };
    std::vector<Frame> calls;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        calls.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;

        while (!calls.empty()) {
            Frame& f = calls.back();
            const std::size_t v = f.v;
            bool descended = false;
            while (f.next < n) {
                const std::size_t w = f.next++;
                if (w == v || !p(v, w)) continue;
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    calls.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;

            if (low[v] == index[v]) {
                std::vector<std::size_t> cls;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    cls.push_back(w);
                } while (w != v);
                std::sort(cls.begin(), cls.end());
                classes.push_back(std::move(cls));
            }
            calls.pop_back();
            if (!calls.empty()) {
                const std::size_t parent = calls.back().v;
                low[parent] = std::min(low[parent], low[v]);
            }
        }
    }
    return classes;
}

ClassPartition classify_essential(const ClassList& classes, const ZeroPattern& p) {
    const std::size_t n = p.size();
    const std::size_t count = classes.size();

    std::vector<std::size_t> owner(n, count);
    for (std::size_t c = 0; c < count; ++c)
        for (auto i : classes[c]) owner[i] = c;

    // Condensation edges between distinct classes.
    std::vector<std::vector<std::size_t>> successors(count);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (p(i, j) && owner[i] != owner[j]) successors[owner[i]].push_back(owner[j]);
        }
    }
    for (auto& s : successors) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }

    // Tier 0 for essential classes, otherwise one more than the deepest
    // class reached directly. The condensation is acyclic, so memoized DFS
    // terminates.
    constexpr std::size_t unknown = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> tier(count, unknown);
    std::vector<std::size_t> work;
    for (std::size_t c = 0; c < count; ++c) {
        if (tier[c] != unknown) continue;
        work.push_back(c);
        while (!work.empty()) {
            const std::size_t top = work.back();
            bool ready = true;
            std::size_t deepest = 0;
            for (auto s : successors[top]) {
                if (tier[s] == unknown) {
                    ready = false;
                    work.push_back(s);
                } else {
                    deepest = std::max(deepest, tier[s] + 1);
                }
            }
            if (ready) {
                tier[top] = deepest;
                work.pop_back();
            }
        }
    }

    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (tier[a] != tier[b]) return tier[a] < tier[b];
        return classes[a].front() < classes[b].front();
    });

    ClassPartition out;
    for (auto c : order) {
        out.classes.push_back(classes[c]);
        out.essential.push_back(successors[c].empty());
        if (successors[c].empty()) ++out.essential_count;
    }
    return out;
}

BlockRange GantmacherForm::block(std::size_t k, std::size_t l) const {
    return {offsets[k], class_size(k), offsets[l], class_size(l)};
}

Eigen::MatrixXd GantmacherForm::permute(const Eigen::MatrixXd& a) const {
    const auto n = static_cast<Eigen::Index>(permutation.size());
    if (a.rows() != n || a.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "matrix does not match the form");
    }
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            out(r, c) = a(static_cast<Eigen::Index>(permutation[static_cast<std::size_t>(r)]),
                          static_cast<Eigen::Index>(permutation[static_cast<std::size_t>(c)]));
    return out;
}

ZeroPattern GantmacherForm::permute(const ZeroPattern& p) const {
    const std::size_t n = permutation.size();
    if (p.size() != n) throw Error(ErrorCode::DimensionMismatch, "pattern does not match the form");
    ZeroPattern out(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            if (p(permutation[r], permutation[c])) out.set(r, c);
    return out;
}

GantmacherForm gantmacher_form(const ZeroPattern& p) {
    GantmacherForm form;
    form.partition = classify_essential(communicating_classes(p), p);
    form.offsets.push_back(0);
    for (const auto& cls : form.partition.classes) {
        form.permutation.insert(form.permutation.end(), cls.begin(), cls.end());
        form.offsets.push_back(form.permutation.size());
    }
    return form;
}

GantmacherForm gantmacher_form(const StochasticMatrix& a, double eps_z) {
    return gantmacher_form(pattern_of(a, eps_z));
}

Eigen::MatrixXd extract_block(const StochasticMatrix& a, const GantmacherForm& form, std::size_t k,
                              std::size_t l) {
    const std::size_t p = form.class_count();
    if (k >= p || l >= p) {
        throw Error(ErrorCode::ParameterOutOfRange, "block index outside 0.." + std::to_string(p - 1));
    }
    if (k < l) {
        throw Error(ErrorCode::BlockAboveDiagonal,
                    "block (" + std::to_string(k) + "," + std::to_string(l) + ") is structurally zero");
    }
    if (a.size() != form.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "matrix does not match the form");
    }
    const auto& rows = form.partition.classes[k];
    const auto& cols = form.partition.classes[l];
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a(rows[r], cols[c]);
    return out;
}

std::vector<std::vector<BlockSign>> block_signs(const ZeroPattern& p, const GantmacherForm& form) {
    const ZeroPattern q = form.permute(p);
    const std::size_t count = form.class_count();
    std::vector<std::vector<BlockSign>> signs(count, std::vector<BlockSign>(count, BlockSign::Zero));
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t l = 0; l < count; ++l) {
            const BlockRange b = form.block(k, l);
            std::size_t set = 0;
            for (std::size_t r = 0; r < b.rows; ++r)
                for (std::size_t c = 0; c < b.cols; ++c)
                    if (q(b.row_begin + r, b.col_begin + c)) ++set;
            if (set == 0)
                signs[k][l] = BlockSign::Zero;
            else if (set == b.rows * b.cols)
                signs[k][l] = BlockSign::Positive;
            else
                signs[k][l] = BlockSign::Mixed;
        }
    }
    return signs;
}

bool is_block_lower_triangular(const ZeroPattern& p, const GantmacherForm& form) {
    const ZeroPattern q = form.permute(p);
    for (std::size_t k = 0; k < form.class_count(); ++k) {
        for (std::size_t r = form.offsets[k]; r < form.offsets[k + 1]; ++r)
            for (std::size_t c = form.offsets[k + 1]; c < form.dimension(); ++c)
                if (q(r, c)) return false;
    }
    // Essential rows stay inside their own class.
    for (std::size_t k = 0; k < form.essential_count(); ++k) {
        for (std::size_t r = form.offsets[k]; r < form.offsets[k + 1]; ++r)
            for (std::size_t c = 0; c < form.offsets[k]; ++c)
                if (q(r, c)) return false;
    }
    return true;
}

bool spectrum_union_check(const StochasticMatrix& a, const GantmacherForm& form, double tol) {
    const Spectrum full = eigenvalues(a.matrix());
    Spectrum blocks;
    for (std::size_t k = 0; k < form.class_count(); ++k) {
        const Spectrum part = eigenvalues(extract_block(a, form, k, k));
        blocks.insert(blocks.end(), part.begin(), part.end());
    }
    return spectra_match(full, blocks, tol);
}

} // namespace consensus
