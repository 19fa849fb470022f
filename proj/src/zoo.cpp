#include "dichotomy/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "dichotomy/error.hpp"

namespace dichotomy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logsumexp(const std::vector<double>& terms) {
    if (terms.empty()) return -kInf;
    double m = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

// Spectral overlap data: one entry per eigenvector pair with both
// eigenvalues on-support and nonvanishing overlap |<u_i|v_j>|^2.
struct OverlapData {
    std::vector<double> logp;
    std::vector<double> logv;
    std::vector<double> logw;  // log overlap
};

OverlapData overlap_data(const QuantumDichotomy& d) {
    SpectralDecomp sr = hermitian_eig(d.rho.matrix);
    SpectralDecomp ss = hermitian_eig(d.sigma.matrix);
    const double cutp = 1e-12 * std::max(sr.eigenvalues[0], 0.0);
    const double cutv = 1e-12 * std::max(ss.eigenvalues[0], 0.0);
    OverlapData o;
    for (int i = 0; i < sr.dim(); ++i) {
        const double p = sr.eigenvalues[i];
        if (p <= cutp) continue;
        for (int j = 0; j < ss.dim(); ++j) {
            const double v = ss.eigenvalues[j];
            if (v <= cutv) continue;
            const double w = std::norm(sr.basis.col(i).dot(ss.basis.col(j)));
            if (w <= 1e-14) continue;
            o.logp.push_back(std::log(p));
            o.logv.push_back(std::log(v));
            o.logw.push_back(std::log(w));
        }
    }
    return o;
}

// Eigenvalues t_k of sigma^{-1/2} rho sigma^{-1/2} with sigma-masses
// mu_k = <u_k| sigma |u_k>, restricted to the support of both.
struct MaximalData {
    std::vector<double> t;
    std::vector<double> mu;
};

MaximalData maximal_data(const QuantumDichotomy& d) {
    Eigen::MatrixXcd smh = spectral_power(hermitian_eig(d.sigma.matrix), -0.5);
    Eigen::MatrixXcd tmat = smh * d.rho.matrix * smh;
    SpectralDecomp st = hermitian_eig(0.5 * (tmat + tmat.adjoint()));
    const double cutt = 1e-13 * std::max(st.eigenvalues[0], 0.0);
    MaximalData m;
    for (int k = 0; k < st.dim(); ++k) {
        const double t = st.eigenvalues[k];
        if (t <= cutt) continue;
        const auto uk = st.basis.col(k);
        const double mu = std::max((uk.adjoint() * d.sigma.matrix * uk)(0, 0).real(), 0.0);
        if (mu <= 1e-14) continue;
        m.t.push_back(t);
        m.mu.push_back(mu);
    }
    return m;
}

bool is_pure(const QuantumDichotomy& d, Eigen::VectorXcd* psi = nullptr) {
    SpectralDecomp sr = hermitian_eig(d.rho.matrix);
    if (sr.eigenvalues[0] < 1.0 - 1e-9) return false;
    if (psi) *psi = sr.basis.col(0);
    return true;
}

DivergenceValue make_value(double value, double alpha, DivergenceFamily fam,
                           bool dpi) {
    DivergenceValue v;
    v.value = value;
    v.alpha = alpha;
    v.family = std::move(fam);
    v.dpi_valid = dpi;
    return v;
}

// Extended-convention Rényi divergence of two nonnegative double vectors;
// mirrors classical_renyi without exact arithmetic.
double renyi_doubles(const Eigen::VectorXd& p, const Eigen::VectorXd& q, double alpha) {
    bool abs_cont = true;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p[i] > 0.0 && q[i] <= 0.0) abs_cont = false;
    if (alpha == 1.0) {
        if (!abs_cont) return kInf;
        double kl = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i)
            if (p[i] > 0.0) kl += p[i] * std::log(p[i] / q[i]);
        return kl;
    }
    if (alpha > 1.0 && !abs_cont) return kInf;
    std::vector<double> terms;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p[i] > 0.0 && q[i] > 0.0)
            terms.push_back(alpha * std::log(p[i]) + (1.0 - alpha) * std::log(q[i]));
    const double logq = logsumexp(terms);
    if (!std::isfinite(logq)) return kInf;  // orthogonal supports
    return logq / (alpha - 1.0);
}

}  // namespace

double umegaki(const QuantumDichotomy& d) {
    if (!d.support_ok) return kInf;
    OverlapData o = overlap_data(d);
    double sum = 0.0;
    for (size_t k = 0; k < o.logp.size(); ++k)
        sum += std::exp(o.logw[k] + o.logp[k]) * (o.logp[k] - o.logv[k]);
    return sum;
}

double bs_entropy(const QuantumDichotomy& d) {
    if (!d.support_ok) return kInf;
    MaximalData m = maximal_data(d);
    double sum = 0.0;
    for (size_t k = 0; k < m.t.size(); ++k)
        sum += m.mu[k] * m.t[k] * std::log(m.t[k]);
    return sum;
}

DivergenceValue petz(const QuantumDichotomy& d, double alpha) {
    DivergenceFamily fam{FamilyTag::Petz, 1.0, 0, 0};
    if (!(alpha >= 0.0) || alpha > 2.0)
        throw Error("AlphaOutOfRange", "petz requires alpha in [0, 2]");
    if (alpha == 1.0) {
        DivergenceValue v = make_value(umegaki(d), alpha, fam, true);
        v.limit_used = "relative_entropy";
        return v;
    }
    if (alpha > 1.0 && !d.support_ok) return make_value(kInf, alpha, fam, true);
    OverlapData o = overlap_data(d);
    std::vector<double> terms(o.logp.size());
    for (size_t k = 0; k < o.logp.size(); ++k)
        terms[k] = alpha * o.logp[k] + (1.0 - alpha) * o.logv[k] + o.logw[k];
    const double logq = logsumexp(terms);
    const double value = std::isfinite(logq) ? logq / (alpha - 1.0) : kInf;
    return make_value(value, alpha, fam, true);
}

DivergenceValue sandwiched(const QuantumDichotomy& d, double alpha) {
    DivergenceFamily fam{FamilyTag::Sandwiched, 1.0, 0, 0};
    if (std::isinf(alpha) && alpha > 0) {
        DivergenceValue v = make_value(d_infinity(d), alpha, fam, true);
        v.limit_used = "max_divergence";
        return v;
    }
    if (!(alpha >= 0.5))
        throw Error("AlphaOutOfRange", "sandwiched requires alpha >= 1/2");
    if (alpha == 1.0) {
        DivergenceValue v = make_value(umegaki(d), alpha, fam, true);
        v.limit_used = "relative_entropy";
        return v;
    }
    if (alpha > 1.0 && !d.support_ok) return make_value(kInf, alpha, fam, true);

    Eigen::VectorXcd psi;
    double logq;
    if (is_pure(d, &psi)) {
        SpectralDecomp ss = hermitian_eig(d.sigma.matrix);
        const double cutv = 1e-12 * std::max(ss.eigenvalues[0], 0.0);
        std::vector<double> terms;
        for (int j = 0; j < ss.dim(); ++j) {
            const double v = ss.eigenvalues[j];
            if (v <= cutv) continue;
            const double u = std::norm(ss.basis.col(j).dot(psi));
            if (u <= 1e-14) continue;
            terms.push_back(std::log(u) + (1.0 - alpha) / alpha * std::log(v));
        }
        logq = alpha * logsumexp(terms);
    } else {
        Eigen::MatrixXcd se =
            spectral_power(hermitian_eig(d.sigma.matrix), (1.0 - alpha) / (2.0 * alpha));
        Eigen::MatrixXcd a = se * d.rho.matrix * se;
        SpectralDecomp sa = hermitian_eig(0.5 * (a + a.adjoint()));
        const double cut = 1e-13 * std::max(sa.eigenvalues[0], 0.0);
        std::vector<double> terms;
        for (int k = 0; k < sa.dim(); ++k) {
            const double lam = sa.eigenvalues[k];
            if (lam <= cut) continue;
            terms.push_back(alpha * std::log(lam));
        }
        logq = logsumexp(terms);
    }
    const double value = std::isfinite(logq) ? logq / (alpha - 1.0) : kInf;
    return make_value(value, alpha, fam, true);
}

DivergenceValue maximal(const QuantumDichotomy& d, double alpha) {
    DivergenceFamily fam{FamilyTag::Maximal, 1.0, 0, 0};
    if (!(alpha >= 0.0) || alpha > 2.0)
        throw Error("AlphaOutOfRange", "maximal requires alpha in [0, 2]");
    if (alpha == 1.0) {
        DivergenceValue v = make_value(bs_entropy(d), alpha, fam, true);
        v.limit_used = "bs_entropy";
        return v;
    }
    if (alpha > 1.0 && !d.support_ok) return make_value(kInf, alpha, fam, true);
    MaximalData m = maximal_data(d);
    std::vector<double> terms(m.t.size());
    for (size_t k = 0; k < m.t.size(); ++k)
        terms[k] = std::log(m.mu[k]) + alpha * std::log(m.t[k]);
    const double logq = logsumexp(terms);
    const double value = std::isfinite(logq) ? logq / (alpha - 1.0) : kInf;
    return make_value(value, alpha, fam, true);
}

DivergenceValue alpha_z(const QuantumDichotomy& d, double alpha, double z) {
    if (!std::isfinite(z) || z <= 0.0)
        throw Error("InvalidZ", "alpha-z requires z > 0");
    DivergenceFamily fam{FamilyTag::AlphaZ, z, 0, 0};
    if (!(alpha >= 0.0))
        throw Error("AlphaOutOfRange", "alpha-z requires alpha >= 0");

    bool dpi;
    const double eps = 1e-12;
    if (alpha == 1.0) {
        dpi = true;
    } else if (alpha < 1.0) {
        dpi = z >= std::max(alpha, 1.0 - alpha) - eps;
    } else if (alpha <= 2.0) {
        dpi = (z >= alpha / 2.0 - eps) && (z <= alpha + eps);
    } else {
        dpi = (z >= alpha - 1.0 - eps) && (z <= alpha + eps);
    }

    if (alpha == 1.0) {
        DivergenceValue v = make_value(umegaki(d), alpha, fam, dpi);
        v.limit_used = "relative_entropy";
        return v;
    }
    if (alpha > 1.0 && !d.support_ok) return make_value(kInf, alpha, fam, dpi);

    Eigen::MatrixXcd ra = spectral_power(hermitian_eig(d.rho.matrix), alpha / z);
    Eigen::MatrixXcd se =
        spectral_power(hermitian_eig(d.sigma.matrix), (1.0 - alpha) / (2.0 * z));
    Eigen::MatrixXcd a = se * ra * se;
    SpectralDecomp sa = hermitian_eig(0.5 * (a + a.adjoint()));
    const double cut = 1e-13 * std::max(sa.eigenvalues[0], 0.0);
    std::vector<double> terms;
    for (int k = 0; k < sa.dim(); ++k) {
        const double lam = sa.eigenvalues[k];
        if (lam <= cut) continue;
        terms.push_back(z * std::log(lam));
    }
    const double logq = logsumexp(terms);
    const double value = std::isfinite(logq) ? logq / (alpha - 1.0) : kInf;
    return make_value(value, alpha, fam, dpi);
}

DivergenceValue log_euclidean(const QuantumDichotomy& d, double alpha) {
    DivergenceFamily fam{FamilyTag::LogEuclidean, 1.0, 0, 0};
    if (!(alpha >= 0.0) || alpha > 2.0)
        throw Error("AlphaOutOfRange", "log-euclidean is computed on [0, 2]");
    const bool dpi = alpha <= 1.0;
    if (alpha == 1.0) {
        DivergenceValue v = make_value(umegaki(d), alpha, fam, dpi);
        v.limit_used = "relative_entropy";
        return v;
    }

    SpectralDecomp sr = hermitian_eig(d.rho.matrix);
    SpectralDecomp ss = hermitian_eig(d.sigma.matrix);
    Eigen::MatrixXcd pr = support_projector(sr);
    Eigen::MatrixXcd ps = support_projector(ss);
    Eigen::MatrixXcd mid = pr * ps * pr;
    SpectralDecomp si = hermitian_eig(0.5 * (mid + mid.adjoint()));
    std::vector<int> kept;
    for (int i = 0; i < si.dim(); ++i)
        if (si.eigenvalues[i] > 1.0 - 1e-9) kept.push_back(i);
    const int r = static_cast<int>(kept.size());

    DivergenceValue out = make_value(kInf, alpha, fam, dpi);
    const int rrho = sr.support_rank;
    const int rsig = ss.support_rank;
    if (r != rrho || r != rsig) out.flags.push_back("SupportMismatch");
    if (r == 0) return out;

    Eigen::MatrixXcd w(si.dim(), r);
    for (int c = 0; c < r; ++c) w.col(c) = si.basis.col(kept[static_cast<size_t>(c)]);
    Eigen::MatrixXcd rc = w.adjoint() * d.rho.matrix * w;
    Eigen::MatrixXcd sc = w.adjoint() * d.sigma.matrix * w;
    Eigen::MatrixXcd l = alpha * spectral_log(0.5 * (rc + rc.adjoint())) +
                         (1.0 - alpha) * spectral_log(0.5 * (sc + sc.adjoint()));
    SpectralDecomp sl = hermitian_eig(0.5 * (l + l.adjoint()));
    std::vector<double> terms(static_cast<size_t>(sl.dim()));
    for (int i = 0; i < sl.dim(); ++i) terms[static_cast<size_t>(i)] = sl.eigenvalues[i];
    out.value = logsumexp(terms) / (alpha - 1.0);
    return out;
}

namespace {

struct MeasureState {
    Eigen::MatrixXcd basis;  // columns form the measurement ONB
    Eigen::VectorXd p;
    Eigen::VectorXd q;
};

void measure_probs(const QuantumDichotomy& d, MeasureState& st) {
    const int n = d.dim();
    st.p.resize(n);
    st.q.resize(n);
    for (int k = 0; k < n; ++k) {
        const auto col = st.basis.col(k);
        st.p[k] = std::max((col.adjoint() * d.rho.matrix * col)(0, 0).real(), 0.0);
        st.q[k] = std::max((col.adjoint() * d.sigma.matrix * col)(0, 0).real(), 0.0);
    }
}

double ascend(const QuantumDichotomy& d, double alpha, MeasureState& st) {
    const int n = d.dim();
    measure_probs(d, st);
    double best = renyi_doubles(st.p, st.q, alpha);
    if (!std::isfinite(best)) return best;
    for (int sweep = 0; sweep < 60; ++sweep) {
        const double before = best;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int mode = 0; mode < 2; ++mode) {
                    const Eigen::VectorXcd ci = st.basis.col(i);
                    const Eigen::VectorXcd cj = st.basis.col(j);
                    auto objective = [&](double theta) {
                        const double c = std::cos(theta), s = std::sin(theta);
                        Eigen::VectorXcd ni, nj;
                        if (mode == 0) {
                            ni = c * ci + s * cj;
                            nj = -s * ci + c * cj;
                        } else {
                            const std::complex<double> is(0.0, s);
                            ni = c * ci + is * cj;
                            nj = is * ci + c * cj;
                        }
                        Eigen::VectorXd p = st.p, q = st.q;
                        p[i] = std::max((ni.adjoint() * d.rho.matrix * ni)(0, 0).real(), 0.0);
                        p[j] = std::max((nj.adjoint() * d.rho.matrix * nj)(0, 0).real(), 0.0);
                        q[i] = std::max((ni.adjoint() * d.sigma.matrix * ni)(0, 0).real(), 0.0);
                        q[j] = std::max((nj.adjoint() * d.sigma.matrix * nj)(0, 0).real(), 0.0);
                        return renyi_doubles(p, q, alpha);
                    };
                    double lo = -0.7853981633974483, hi = 0.7853981633974483;
                    for (int it = 0; it < 48; ++it) {
                        const double m1 = lo + (hi - lo) / 3.0;
                        const double m2 = hi - (hi - lo) / 3.0;
                        if (objective(m1) < objective(m2))
                            lo = m1;
                        else
                            hi = m2;
                    }
                    const double theta = 0.5 * (lo + hi);
                    const double val = objective(theta);
                    if (val > best) {
                        best = val;
                        const double c = std::cos(theta), s = std::sin(theta);
                        if (mode == 0) {
                            st.basis.col(i) = c * ci + s * cj;
                            st.basis.col(j) = -s * ci + c * cj;
                        } else {
                            const std::complex<double> is(0.0, s);
                            st.basis.col(i) = c * ci + is * cj;
                            st.basis.col(j) = is * ci + c * cj;
                        }
                        measure_probs(d, st);
                        if (!std::isfinite(best)) return best;
                    }
                }
        if (best - before < 1e-9) break;
    }
    return best;
}

}  // namespace

DivergenceValue measured(const QuantumDichotomy& d, double alpha,
                         const DivergenceFamily& cfg) {
    DivergenceFamily fam = cfg;
    fam.tag = FamilyTag::Measured;
    if (!(alpha > 0.0))
        throw Error("AlphaOutOfRange", "measured requires alpha > 0");
    if (d.dim() > 4)
        throw Error("DimTooLarge", "measured supports dimension <= 4");
    if (fam.restarts < 1)
        throw Error("InvalidConfig", "measured requires restarts >= 1");

    DivergenceValue out = make_value(-kInf, alpha, fam, true);
    out.flags.push_back("lower_bound");
    if (alpha > 1.0 && !d.support_ok) {
        out.value = kInf;
        return out;
    }

    const int n = d.dim();
    std::vector<Eigen::MatrixXcd> starts;
    starts.push_back(hermitian_eig(d.sigma.matrix).basis);
    starts.push_back(hermitian_eig(d.rho.matrix).basis);
    starts.push_back(hermitian_eig(d.rho.matrix + d.sigma.matrix).basis);
    // Joint eigenbases of generic combinations; for commuting pairs one of
    // these diagonalizes both states, making the pinching start exact.
    starts.push_back(
        hermitian_eig(d.sigma.matrix + 0.6180339887498949 * d.rho.matrix).basis);
    starts.push_back(
        hermitian_eig(d.sigma.matrix + 0.3141592653589793 * d.rho.matrix).basis);

    std::mt19937_64 rng(fam.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < fam.restarts; ++r) {
        Eigen::MatrixXcd g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
        starts.push_back(qr.householderQ() * Eigen::MatrixXcd::Identity(n, n));
    }

    for (const auto& b : starts) {
        MeasureState st;
        st.basis = b;
        const double val = ascend(d, alpha, st);
        if (val > out.value) out.value = val;
        if (std::isinf(out.value) && out.value > 0) break;
    }
    return out;
}

DivergenceValue divergence(const QuantumDichotomy& d, const DivergenceFamily& family,
                           double alpha) {
    switch (family.tag) {
        case FamilyTag::ClassicalEmbedded: {
            ClassicalDichotomy c = commuting_reduction(d);
            DivergenceValue v = make_value(classical_renyi(c, alpha), alpha, family, true);
            if (alpha == 1.0) v.limit_used = "relative_entropy";
            return v;
        }
        case FamilyTag::Petz:
            return petz(d, alpha);
        case FamilyTag::Sandwiched:
            return sandwiched(d, alpha);
        case FamilyTag::Maximal:
            return maximal(d, alpha);
        case FamilyTag::AlphaZ:
            return alpha_z(d, alpha, family.z);
        case FamilyTag::LogEuclidean:
            return log_euclidean(d, alpha);
        case FamilyTag::Measured: {
            DivergenceValue v = measured(d, alpha, family);
            if (alpha == 1.0) v.limit_used = "measured_relative_entropy";
            return v;
        }
    }
    throw Error("UnknownFamily", "unhandled family tag");
}

DivergenceFamily parse_family(const std::string& selector) {
    DivergenceFamily f;
    if (selector == "classical") {
        f.tag = FamilyTag::ClassicalEmbedded;
        return f;
    }
    if (selector == "petz") {
        f.tag = FamilyTag::Petz;
        return f;
    }
    if (selector == "sandwiched") {
        f.tag = FamilyTag::Sandwiched;
        return f;
    }
    if (selector == "maximal") {
        f.tag = FamilyTag::Maximal;
        return f;
    }
    if (selector == "log-euclidean") {
        f.tag = FamilyTag::LogEuclidean;
        return f;
    }
    if (selector.rfind("alpha-z:", 0) == 0) {
        f.tag = FamilyTag::AlphaZ;
        try {
            f.z = std::stod(selector.substr(8));
        } catch (const std::exception&) {
            throw Error("InvalidZ", "cannot parse z in '" + selector + "'");
        }
        if (!std::isfinite(f.z) || f.z <= 0.0)
            throw Error("InvalidZ", "alpha-z requires z > 0");
        return f;
    }
    if (selector == "measured" || selector.rfind("measured:", 0) == 0) {
        f.tag = FamilyTag::Measured;
        if (selector.size() > 9) {
            std::istringstream in(selector.substr(9));
            std::string part;
            try {
                if (std::getline(in, part, ':')) f.restarts = std::stoi(part);
                if (std::getline(in, part, ':')) f.seed = std::stoull(part);
            } catch (const std::exception&) {
                throw Error("InvalidConfig",
                            "cannot parse measured selector '" + selector + "'");
            }
        }
        if (f.restarts < 1)
            throw Error("InvalidConfig", "measured requires restarts >= 1");
        return f;
    }
    throw Error("UnknownFamily", "unknown family selector '" + selector + "'");
}

std::string family_name(const DivergenceFamily& family) {
    switch (family.tag) {
        case FamilyTag::ClassicalEmbedded:
            return "classical";
        case FamilyTag::Petz:
            return "petz";
        case FamilyTag::Sandwiched:
            return "sandwiched";
        case FamilyTag::Maximal:
            return "maximal";
        case FamilyTag::AlphaZ: {
            std::ostringstream out;
            out << "alpha-z:" << family.z;
            return out.str();
        }
        case FamilyTag::LogEuclidean:
            return "log-euclidean";
        case FamilyTag::Measured: {
            std::ostringstream out;
            out << "measured:" << family.restarts << ":" << family.seed;
            return out.str();
        }
    }
    return "unknown";
}

}  // namespace dichotomy
