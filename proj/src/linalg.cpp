#include "consensus/linalg.hpp"

#include "consensus/errors.hpp"

#include <Eigen/Eigenvalues>

#include <functional>

namespace consensus {

Spectrum eigenvalues(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw Error(ErrorCode::NonSquare, "eigenvalues of a non-square matrix");
    if (m.rows() == 0) return {};
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::EigenSolverFailure,
                    "QR iteration failed on a " + std::to_string(m.rows()) + "x" + std::to_string(m.rows()) +
                        " matrix");
    }
    const auto& ev = solver.eigenvalues();
    return Spectrum(ev.data(), ev.data() + ev.size());
}

bool spectra_match(const Spectrum& a, const Spectrum& b, double tol) {
    if (a.size() != b.size()) return false;
    const std::size_t n = a.size();
    std::vector<std::size_t> match_of_b(n, n);

    // Kuhn's augmenting paths; n is small (matrix dimension).
    std::vector<bool> seen;
    std::function<bool(std::size_t)> augment = [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (seen[j] || std::abs(a[i] - b[j]) > tol) continue;
            seen[j] = true;
            if (match_of_b[j] == n || augment(match_of_b[j])) {
                match_of_b[j] = i;
                return true;
            }
        }
        return false;
    };
    for (std::size_t i = 0; i < n; ++i) {
        seen.assign(n, false);
        if (!augment(i)) return false;
    }
    return true;
}

} // namespace consensus
