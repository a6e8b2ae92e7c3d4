#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace consensus {

using Spectrum = std::vector<std::complex<double>>;

/// Eigenvalues of a dense square matrix; empty for a 0x0 input.
/// Throws Error(EigenSolverFailure) if the QR iteration does not converge.
Spectrum eigenvalues(const Eigen::MatrixXd& m);

/// True iff the two multisets can be paired so that every pair is within
/// tol. Solved as bipartite matching on the threshold graph.
bool spectra_match(const Spectrum& a, const Spectrum& b, double tol);

} // namespace consensus
