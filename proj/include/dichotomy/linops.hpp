#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dichotomy/error.hpp"

namespace dichotomy {

// Eigendecomposition of a Hermitian matrix with eigenvalue clustering.
//
// Eigenvalues are sorted descending; eigenvalues whose consecutive gap is at
// most cluster_tol * max(1, |v_1|) share a cluster. One Hermitian projector is
// stored per cluster. The basis columns are the eigenvectors in descending
// eigenvalue order; within degenerate clusters the basis is the deterministic
// output of the solver for the given input.
struct SpectralDecomp {
    Eigen::VectorXd eigenvalues;              // descending
    Eigen::MatrixXcd basis;                   // column k belongs to eigenvalues[k]
    std::vector<std::vector<int>> clusters;   // index groups into eigenvalues
    std::vector<Eigen::MatrixXcd> projectors; // one per cluster
    int support_rank = 0;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
    double cluster_value(int j) const { return eigenvalues[clusters[j][0]]; }
};

// Requires max|M - M^dag| <= 1e-12 * max(1, max|M_ij|); throws NotHermitian
// otherwise, NoConvergence if the solver fails.
SpectralDecomp hermitian_eig(const Eigen::MatrixXcd& M, double cluster_tol = 1e-9);

// Pseudo-inverse power of a PSD matrix: sum of v_j^t P_j over eigenvalues
// above 1e-12 * v_max. t = 0 gives the support projector. Throws
// NegativeEigenvalue when an eigenvalue drops below -1e-10 * v_max.
Eigen::MatrixXcd spectral_power(const Eigen::MatrixXcd& M, double t);
Eigen::MatrixXcd spectral_power(const SpectralDecomp& S, double t);

// Logarithm on the support (zero eigenvalues contribute nothing). Throws
// ZeroMatrix when the support is empty.
Eigen::MatrixXcd spectral_log(const Eigen::MatrixXcd& M);
Eigen::MatrixXcd spectral_log(const SpectralDecomp& S);

// Full Hermitian exponential (no support cutoff).
Eigen::MatrixXcd spectral_exp(const Eigen::MatrixXcd& M);

Eigen::MatrixXcd support_projector(const SpectralDecomp& S);

}  // namespace dichotomy
