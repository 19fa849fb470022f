#include "dichotomy/linops.hpp"

#include <cmath>

namespace dichotomy {

namespace {

double max_abs(const Eigen::MatrixXcd& M) {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

// Largest |eigenvalue|, used as the relative scale for support cutoffs.
double spectral_scale(const SpectralDecomp& S) {
    double s = 0.0;
    for (int k = 0; k < S.eigenvalues.size(); ++k)
        s = std::max(s, std::abs(S.eigenvalues[k]));
    return s;
}

}  // namespace

SpectralDecomp hermitian_eig(const Eigen::MatrixXcd& M, double cluster_tol) {
    if (M.rows() != M.cols() || M.rows() == 0)
        throw Error("NotHermitian", "matrix must be square and nonempty");
    const double scale = std::max(1.0, max_abs(M));
    const double dev = max_abs(M - M.adjoint());
    if (dev > 1e-12 * scale)
        throw Error("NotHermitian", "max deviation from Hermitian: " + std::to_string(dev));

    Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success)
        throw Error("NoConvergence", "eigensolver did not converge within 30 sweeps");

    const int n = static_cast<int>(H.rows());
    SpectralDecomp S;
    S.eigenvalues.resize(n);
    S.basis.resize(n, n);
    for (int k = 0; k < n; ++k) {  // solver returns ascending order
        S.eigenvalues[k] = es.eigenvalues()[n - 1 - k];
        S.basis.col(k) = es.eigenvectors().col(n - 1 - k);
        // Fix the phase: rotate so the largest-modulus entry is real
        // positive. Keeps the basis deterministic and leaves exactly
        // diagonal inputs with the standard coordinate vectors.
        int imax = 0;
        double amax = 0.0;
        for (int i = 0; i < n; ++i) {
            double a = std::abs(S.basis(i, k));
            if (a > amax) {
                amax = a;
                imax = i;
            }
        }
        if (amax > 0) S.basis.col(k) *= std::conj(S.basis(imax, k)) / amax;
    }

    const double gap_tol = cluster_tol * std::max(1.0, std::abs(S.eigenvalues[0]));
    std::vector<int> current{0};
    for (int k = 1; k < n; ++k) {
        if (S.eigenvalues[k - 1] - S.eigenvalues[k] <= gap_tol) {
            current.push_back(k);
        } else {
            S.clusters.push_back(current);
            current = {k};
        }
    }
    S.clusters.push_back(current);

    for (const auto& cl : S.clusters) {
        Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n, n);
        for (int k : cl) P += S.basis.col(k) * S.basis.col(k).adjoint();
        S.projectors.push_back(P);
    }

    const double vmax = spectral_scale(S);
    S.support_rank = 0;
    for (int k = 0; k < n; ++k)
        if (std::abs(S.eigenvalues[k]) > 1e-12 * vmax) ++S.support_rank;
    return S;
}

Eigen::MatrixXcd spectral_power(const SpectralDecomp& S, double t) {
    const int n = S.dim();
    const double vmax = S.eigenvalues.size() ? S.eigenvalues[0] : 0.0;
    const double vmin = S.eigenvalues.size() ? S.eigenvalues[n - 1] : 0.0;
    if (vmin < -1e-10 * std::max(vmax, 0.0) && vmin < -1e-300)
        throw Error("NegativeEigenvalue",
                    "matrix is not PSD: smallest eigenvalue " + std::to_string(vmin));
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(n, n);
    if (vmax <= 0) return R;  // zero matrix: empty support
    const double cutoff = 1e-12 * vmax;
    for (size_t j = 0; j < S.clusters.size(); ++j) {
        const double v = S.cluster_value(static_cast<int>(j));
        if (v <= cutoff) continue;
        R += (t == 0.0 ? 1.0 : std::pow(v, t)) * S.projectors[j];
    }
    return R;
}

Eigen::MatrixXcd spectral_power(const Eigen::MatrixXcd& M, double t) {
    return spectral_power(hermitian_eig(M), t);
}

Eigen::MatrixXcd spectral_log(const SpectralDecomp& S) {
    const int n = S.dim();
    const double vmax = S.eigenvalues.size() ? S.eigenvalues[0] : 0.0;
    if (S.support_rank == 0 || vmax <= 0)
        throw Error("ZeroMatrix", "logarithm of the zero matrix");
    const double vmin = S.eigenvalues[n - 1];
    if (vmin < -1e-10 * vmax && vmin < -1e-300)
        throw Error("NegativeEigenvalue",
                    "matrix is not PSD: smallest eigenvalue " + std::to_string(vmin));
    const double cutoff = 1e-12 * vmax;
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(n, n);
    for (size_t j = 0; j < S.clusters.size(); ++j) {
        const double v = S.cluster_value(static_cast<int>(j));
        if (v <= cutoff) continue;
        R += std::log(v) * S.projectors[j];
    }
    return R;
}

Eigen::MatrixXcd spectral_log(const Eigen::MatrixXcd& M) {
    return spectral_log(hermitian_eig(M));
}

Eigen::MatrixXcd spectral_exp(const Eigen::MatrixXcd& M) {
    SpectralDecomp S = hermitian_eig(M);
    const int n = S.dim();
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(n, n);
    for (size_t j = 0; j < S.clusters.size(); ++j)
        R += std::exp(S.cluster_value(static_cast<int>(j))) * S.projectors[j];
    return R;
}

Eigen::MatrixXcd support_projector(const SpectralDecomp& S) {
    const int n = S.dim();
    const double vmax = spectral_scale(S);
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n, n);
    if (vmax <= 0) return P;
    for (size_t j = 0; j < S.clusters.size(); ++j)
        if (std::abs(S.cluster_value(static_cast<int>(j))) > 1e-12 * vmax)
            P += S.projectors[j];
    return P;
}

}  // namespace dichotomy
