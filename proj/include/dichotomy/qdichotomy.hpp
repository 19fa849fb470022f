#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dichotomy/classical.hpp"
#include "dichotomy/linops.hpp"

namespace dichotomy {

// Validated density matrix: Hermitian within 1e-12, eigenvalues >= -1e-10,
// unit trace within 1e-10.
struct DensityMatrix {
    Eigen::MatrixXcd matrix;

    int dim() const { return static_cast<int>(matrix.rows()); }
};

DensityMatrix make_density_matrix(const Eigen::MatrixXcd& m);

// Pair of states on the same space. support_ok records whether
// supp(rho) is contained in supp(sigma) within 1e-9; operations that need
// the inclusion return +infinity or refuse when it fails.
struct QuantumDichotomy {
    DensityMatrix rho;
    DensityMatrix sigma;
    bool support_ok = true;

    int dim() const { return rho.dim(); }
};

QuantumDichotomy make_quantum_dichotomy(DensityMatrix rho, DensityMatrix sigma);

// Interconverting channel pair in Kraus form, with the four trace-norm
// residuals ||forward(rho1) - rho2||_1, ||forward(sigma1) - sigma2||_1,
// ||backward(rho2) - rho1||_1, ||backward(sigma2) - sigma1||_1.
struct ChannelPair {
    std::vector<Eigen::MatrixXcd> forward;
    std::vector<Eigen::MatrixXcd> backward;
    std::array<double, 4> residuals{};
};

Eigen::MatrixXcd apply_channel(const std::vector<Eigen::MatrixXcd>& kraus,
                               const Eigen::MatrixXcd& x);
double trace_norm(const Eigen::MatrixXcd& m);

// True iff ||rho*sigma - sigma*rho||_F <= tol * ||rho||_F * ||sigma||_F.
bool commutes(const QuantumDichotomy& d, double tol = 1e-10);

// Dimension of the joint commutant {A : [rho,A] = [sigma,A] = 0}, via the
// null space of the stacked commutator map at relative threshold 1e-9.
// 1 means the dichotomy is irreducible.
int commutant_dimension(const QuantumDichotomy& d);

// Diagonal of a commuting pair in a joint eigenbasis. Requires commutes(d).
ClassicalDichotomy commuting_reduction(const QuantumDichotomy& d);

// Classical pair (P, Q) with P_ij = p_i tr[R_i S_j], Q_ij = v_j tr[R_i S_j]
// over the spectral clusters of rho and sigma; matches the Petz divergence
// of d at every order.
ClassicalDichotomy nussbaum_szkola(const QuantumDichotomy& d);

// Classical pair built from the spectral measure of sigma^{-1/2} rho
// sigma^{-1/2} weighted by omega = rho + sigma; matches the maximal
// divergence of d at every order.
ClassicalDichotomy maximal_simulation(const QuantumDichotomy& d);

// (conj rho, sigma) where conjugation is entrywise in sigma's eigenbasis.
// *ambiguous is set when sigma has a degenerate eigenvalue cluster (the
// basis is then a deterministic but arbitrary choice).
QuantumDichotomy conjugate_in_sigma_basis(const QuantumDichotomy& d,
                                          bool* ambiguous = nullptr);

// Phases phi with diag(e^{i phi}) rho_a diag(e^{-i phi}) = rho_b within
// 1e-9, in sigma's eigenbasis, if such phases exist. sigma must be
// nondegenerate.
std::optional<Eigen::VectorXd> phase_intertwiner(const DensityMatrix& rho_a,
                                                 const DensityMatrix& rho_b,
                                                 const DensityMatrix& sigma);

// Interconverting channels between two pure-state dichotomies whose
// (overlap, eigenvalue) data agree; none when the data differ beyond 1e-8.
std::optional<ChannelPair> pure_state_channels(const QuantumDichotomy& d1,
                                               const QuantumDichotomy& d2);

// log of the largest eigenvalue of sigma^{-1/2} rho sigma^{-1/2}
// (pseudo-inverse on supp sigma); +infinity when the support condition
// fails.
double d_infinity(const QuantumDichotomy& d);

// e^{-beta H} / tr e^{-beta H}.
DensityMatrix gibbs_state(const Eigen::MatrixXcd& h, double beta);

}  // namespace dichotomy
