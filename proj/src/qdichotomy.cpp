#include "dichotomy/qdichotomy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/SVD>

#include "dichotomy/error.hpp"

namespace dichotomy {

namespace {

double max_abs(const Eigen::MatrixXcd& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m) {
    return 0.5 * (m + m.adjoint());
}

double real_trace(const Eigen::MatrixXcd& m) { return m.trace().real(); }

}  // namespace

DensityMatrix make_density_matrix(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw Error("InvalidState", "density matrix must be square and nonempty");
    const double scale = std::max(1.0, max_abs(m));
    if (max_abs(m - m.adjoint()) > 1e-12 * scale)
        throw Error("InvalidState", "density matrix is not Hermitian within 1e-12");
    if (std::abs(m.trace() - std::complex<double>(1.0, 0.0)) > 1e-10)
        throw Error("InvalidState", "trace differs from 1 by more than 1e-10");
    DensityMatrix d;
    d.matrix = hermitize(m);
    SpectralDecomp s = hermitian_eig(d.matrix);
    if (s.eigenvalues[s.dim() - 1] < -1e-10)
        throw Error("InvalidState", "eigenvalue below -1e-10: " +
                                        std::to_string(s.eigenvalues[s.dim() - 1]));
    return d;
}

QuantumDichotomy make_quantum_dichotomy(DensityMatrix rho, DensityMatrix sigma) {
    if (rho.dim() != sigma.dim())
        throw Error("DimMismatch", "rho and sigma must act on the same space");
    QuantumDichotomy d;
    d.rho = std::move(rho);
    d.sigma = std::move(sigma);
    const int n = d.dim();
    Eigen::MatrixXcd comp =
        Eigen::MatrixXcd::Identity(n, n) - support_projector(hermitian_eig(d.sigma.matrix));
    d.support_ok = (comp * d.rho.matrix * comp).norm() <= 1e-9;
    return d;
}

Eigen::MatrixXcd apply_channel(const std::vector<Eigen::MatrixXcd>& kraus,
                               const Eigen::MatrixXcd& x) {
    if (kraus.empty()) throw Error("InvalidChannel", "empty Kraus list");
    Eigen::MatrixXcd out =
        Eigen::MatrixXcd::Zero(kraus[0].rows(), kraus[0].rows());
    for (const auto& k : kraus) out += k * x * k.adjoint();
    return out;
}

double trace_norm(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues().sum();
}

bool commutes(const QuantumDichotomy& d, double tol) {
    const Eigen::MatrixXcd& r = d.rho.matrix;
    const Eigen::MatrixXcd& s = d.sigma.matrix;
    return (r * s - s * r).norm() <= tol * r.norm() * s.norm();
}

int commutant_dimension(const QuantumDichotomy& d) {
    const int n = d.dim();
    const int n2 = n * n;
    Eigen::MatrixXcd map(2 * n2, n2);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n, n);
            x(a, b) = 1.0;
            Eigen::MatrixXcd c1 = d.rho.matrix * x - x * d.rho.matrix;
            Eigen::MatrixXcd c2 = d.sigma.matrix * x - x * d.sigma.matrix;
            const int col = a + n * b;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    map(i + n * j, col) = c1(i, j);
                    map(n2 + i + n * j, col) = c2(i, j);
                }
        }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(map);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0) return n2;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-9 * sv(0)) ++rank;
    return n2 - rank;
}

ClassicalDichotomy commuting_reduction(const QuantumDichotomy& d) {
    if (!commutes(d))
        throw Error("NotCommuting", "states do not commute within tolerance");
    const int n = d.dim();
    SpectralDecomp s = hermitian_eig(d.sigma.matrix);
    Eigen::MatrixXcd basis = s.basis;
    for (const auto& cl : s.clusters) {
        if (cl.size() <= 1) continue;
        const int k = static_cast<int>(cl.size());
        Eigen::MatrixXcd sub(n, k);
        for (int j = 0; j < k; ++j) sub.col(j) = basis.col(cl[static_cast<size_t>(j)]);
        Eigen::MatrixXcd compressed = hermitize(sub.adjoint() * d.rho.matrix * sub);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ces(compressed);
        Eigen::MatrixXcd rotated = sub * ces.eigenvectors();
        for (int j = 0; j < k; ++j) basis.col(cl[static_cast<size_t>(j)]) = rotated.col(j);
    }
    Eigen::VectorXd p(n), q(n);
    for (size_t j = 0; j < s.clusters.size(); ++j) {
        const double v = std::max(s.cluster_value(static_cast<int>(j)), 0.0);
        for (int i : s.clusters[j]) {
            p[i] = std::max(
                (basis.col(i).adjoint() * d.rho.matrix * basis.col(i))(0, 0).real(), 0.0);
            q[i] = v;
        }
    }
    return make_dichotomy_from_doubles(p, q);
}

ClassicalDichotomy nussbaum_szkola(const QuantumDichotomy& d) {
    SpectralDecomp sr = hermitian_eig(d.rho.matrix);
    SpectralDecomp ss = hermitian_eig(d.sigma.matrix);
    std::vector<double> pv, qv;
    for (size_t i = 0; i < sr.clusters.size(); ++i) {
        const double p = std::max(sr.cluster_value(static_cast<int>(i)), 0.0);
        for (size_t j = 0; j < ss.clusters.size(); ++j) {
            const double v = std::max(ss.cluster_value(static_cast<int>(j)), 0.0);
            const double o = real_trace(sr.projectors[i] * ss.projectors[j]);
            if (o <= 1e-12) continue;
            pv.push_back(p * o);
            qv.push_back(v * o);
        }
    }
    Eigen::VectorXd p = Eigen::Map<Eigen::VectorXd>(pv.data(), static_cast<Eigen::Index>(pv.size()));
    Eigen::VectorXd q = Eigen::Map<Eigen::VectorXd>(qv.data(), static_cast<Eigen::Index>(qv.size()));
    return make_dichotomy_from_doubles(p, q);
}

ClassicalDichotomy maximal_simulation(const QuantumDichotomy& d) {
    Eigen::MatrixXcd omega = d.rho.matrix + d.sigma.matrix;
    Eigen::MatrixXcd wmh = spectral_power(hermitian_eig(omega), -0.5);
    SpectralDecomp st = hermitian_eig(hermitize(wmh * d.rho.matrix * wmh));
    std::vector<double> pv, qv;
    for (size_t k = 0; k < st.clusters.size(); ++k) {
        const double t =
            std::clamp(st.cluster_value(static_cast<int>(k)), 0.0, 1.0);
        const double mu = std::max(real_trace(omega * st.projectors[k]), 0.0);
        if (mu <= 1e-14) continue;
        pv.push_back(t * mu);
        qv.push_back((1.0 - t) * mu);
    }
    Eigen::VectorXd p = Eigen::Map<Eigen::VectorXd>(pv.data(), static_cast<Eigen::Index>(pv.size()));
    Eigen::VectorXd q = Eigen::Map<Eigen::VectorXd>(qv.data(), static_cast<Eigen::Index>(qv.size()));
    return make_dichotomy_from_doubles(p, q);
}

QuantumDichotomy conjugate_in_sigma_basis(const QuantumDichotomy& d, bool* ambiguous) {
    SpectralDecomp s = hermitian_eig(d.sigma.matrix);
    bool degenerate = false;
    for (const auto& cl : s.clusters)
        if (cl.size() > 1) degenerate = true;
    if (ambiguous) *ambiguous = degenerate;
    Eigen::MatrixXcd in_basis = s.basis.adjoint() * d.rho.matrix * s.basis;
    Eigen::MatrixXcd conj_back = s.basis * in_basis.conjugate() * s.basis.adjoint();
    return make_quantum_dichotomy(make_density_matrix(conj_back), d.sigma);
}

std::optional<Eigen::VectorXd> phase_intertwiner(const DensityMatrix& rho_a,
                                                 const DensityMatrix& rho_b,
                                                 const DensityMatrix& sigma) {
    SpectralDecomp s = hermitian_eig(sigma.matrix);
    for (const auto& cl : s.clusters)
        if (cl.size() > 1)
            throw Error("DegenerateSigma", "sigma must have a nondegenerate spectrum");
    if (rho_a.dim() != sigma.dim() || rho_b.dim() != sigma.dim())
        throw Error("DimMismatch", "states must act on the same space");
    const int n = sigma.dim();
    Eigen::MatrixXcd a = s.basis.adjoint() * rho_a.matrix * s.basis;
    Eigen::MatrixXcd b = s.basis.adjoint() * rho_b.matrix * s.basis;
    const double scale = std::max({1.0, max_abs(a), max_abs(b)});
    const double tol = 1e-10 * scale;

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if ((std::abs(a(i, j)) > tol) != (std::abs(b(i, j)) > tol))
                return std::nullopt;

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
    std::vector<bool> visited(static_cast<size_t>(n), false);
    for (int root = 0; root < n; ++root) {
        if (visited[static_cast<size_t>(root)]) continue;
        visited[static_cast<size_t>(root)] = true;
        std::vector<int> stack{root};
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                if (visited[static_cast<size_t>(v)] || std::abs(a(u, v)) <= tol) continue;
                phi[v] = phi[u] - std::arg(b(u, v) / a(u, v));
                visited[static_cast<size_t>(v)] = true;
                stack.push_back(v);
            }
        }
    }

    const double check_tol = 1e-9 * std::max(1.0, scale);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::complex<double> rotated =
                std::polar(1.0, phi[i] - phi[j]) * a(i, j);
            if (std::abs(rotated - b(i, j)) > check_tol) return std::nullopt;
        }
    return phi;
}

namespace {

struct PureSide {
    Eigen::VectorXcd psi;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<Eigen::VectorXcd> psi_hat;  // unit vectors, one per kept cluster
};

PureSide analyze_pure_side(const QuantumDichotomy& d) {
    SpectralDecomp sr = hermitian_eig(d.rho.matrix);
    if (sr.eigenvalues[0] < 1.0 - 1e-9)
        throw Error("NotPure", "rho has largest eigenvalue " +
                                   std::to_string(sr.eigenvalues[0]));
    PureSide side;
    side.psi = sr.basis.col(0);
    SpectralDecomp ss = hermitian_eig(d.sigma.matrix);
    for (size_t j = 0; j < ss.clusters.size(); ++j) {
        Eigen::VectorXcd proj = ss.projectors[j] * side.psi;
        const double u = proj.squaredNorm();
        if (u < 1e-10) continue;
        side.u.push_back(u);
        side.v.push_back(std::max(ss.cluster_value(static_cast<int>(j)), 0.0));
        side.psi_hat.push_back(proj / std::sqrt(u));
    }
    return side;
}

// One direction of the interconversion: a partial isometry matching the
// sigma-block components of the pure states, plus a channel dumping the
// complement onto the target's complement state.
std::vector<Eigen::MatrixXcd> build_direction(const PureSide& from, const PureSide& to,
                                              const QuantumDichotomy& d_to) {
    const int nf = static_cast<int>(from.psi.size());
    const int nt = static_cast<int>(to.psi.size());
    const size_t k = from.psi_hat.size();

    Eigen::MatrixXcd u0 = Eigen::MatrixXcd::Zero(nt, nf);
    Eigen::MatrixXcd proj_from = Eigen::MatrixXcd::Zero(nf, nf);
    Eigen::MatrixXcd proj_to = Eigen::MatrixXcd::Zero(nt, nt);
    for (size_t j = 0; j < k; ++j) {
        u0 += to.psi_hat[j] * from.psi_hat[j].adjoint();
        proj_from += from.psi_hat[j] * from.psi_hat[j].adjoint();
        proj_to += to.psi_hat[j] * to.psi_hat[j].adjoint();
    }

    std::vector<Eigen::MatrixXcd> kraus{u0};

    // Orthonormal basis of the complement of span{psi_hat} on the source.
    SpectralDecomp comp =
        hermitian_eig(Eigen::MatrixXcd::Identity(nf, nf) - proj_from);
    std::vector<Eigen::VectorXcd> f;
    for (int i = 0; i < comp.dim(); ++i)
        if (comp.eigenvalues[i] > 0.5) f.push_back(comp.basis.col(i));
    if (f.empty()) return kraus;

    // Fixed target state for the dumped complement.
    Eigen::MatrixXcd id_to = Eigen::MatrixXcd::Identity(nt, nt);
    Eigen::MatrixXcd sigma_perp =
        (id_to - proj_to) * d_to.sigma.matrix * (id_to - proj_to);
    const double mass = real_trace(sigma_perp);
    Eigen::MatrixXcd omega = mass > 1e-12
                                 ? Eigen::MatrixXcd(sigma_perp / mass)
                                 : Eigen::MatrixXcd(to.psi * to.psi.adjoint());
    SpectralDecomp so = hermitian_eig(hermitize(omega));
    std::vector<std::pair<double, Eigen::VectorXcd>> modes;
    double total = 0.0;
    for (int i = 0; i < so.dim(); ++i) {
        if (so.eigenvalues[i] <= 1e-12) continue;
        modes.emplace_back(so.eigenvalues[i], so.basis.col(i));
        total += so.eigenvalues[i];
    }
    for (const auto& mode : modes) {
        const double mu = mode.first / total;
        for (const auto& fb : f)
            kraus.push_back(std::sqrt(mu) * mode.second * fb.adjoint());
    }
    return kraus;
}

}  // namespace

std::optional<ChannelPair> pure_state_channels(const QuantumDichotomy& d1,
                                               const QuantumDichotomy& d2) {
    PureSide s1 = analyze_pure_side(d1);
    PureSide s2 = analyze_pure_side(d2);
    if (s1.u.size() != s2.u.size()) return std::nullopt;
    for (size_t j = 0; j < s1.u.size(); ++j)
        if (std::abs(s1.u[j] - s2.u[j]) > 1e-8 || std::abs(s1.v[j] - s2.v[j]) > 1e-8)
            return std::nullopt;

    ChannelPair ch;
    ch.forward = build_direction(s1, s2, d2);
    ch.backward = build_direction(s2, s1, d1);
    ch.residuals[0] = trace_norm(apply_channel(ch.forward, d1.rho.matrix) - d2.rho.matrix);
    ch.residuals[1] =
        trace_norm(apply_channel(ch.forward, d1.sigma.matrix) - d2.sigma.matrix);
    ch.residuals[2] = trace_norm(apply_channel(ch.backward, d2.rho.matrix) - d1.rho.matrix);
    ch.residuals[3] =
        trace_norm(apply_channel(ch.backward, d2.sigma.matrix) - d1.sigma.matrix);
    for (double r : ch.residuals)
        if (!(r <= 1e-8)) return std::nullopt;
    return ch;
}

double d_infinity(const QuantumDichotomy& d) {
    if (!d.support_ok) return std::numeric_limits<double>::infinity();
    Eigen::MatrixXcd smh = spectral_power(hermitian_eig(d.sigma.matrix), -0.5);
    SpectralDecomp st = hermitian_eig(hermitize(smh * d.rho.matrix * smh));
    return std::log(st.eigenvalues[0]);
}

DensityMatrix gibbs_state(const Eigen::MatrixXcd& h, double beta) {
    if (beta < 0) throw Error("InvalidBeta", "beta must be nonnegative");
    SpectralDecomp s = hermitian_eig(h);
    const double vmin = s.eigenvalues[s.dim() - 1];
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(s.dim(), s.dim());
    for (size_t j = 0; j < s.clusters.size(); ++j)
        m += std::exp(-beta * (s.cluster_value(static_cast<int>(j)) - vmin)) *
             s.projectors[j];
    return make_density_matrix(m / m.trace());
}

}  // namespace dichotomy
