#include "dichotomy/cm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
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

// A nonnegative exponential sum g(alpha) = sum_j c_j e^{-alpha tau_j} with
// all tau_j >= 0, obtained by shifting a classical power sum by its top
// log-ratio. shift = +inf marks a support violation (g degenerates to 0).
struct ExpSum {
    std::vector<double> c;
    std::vector<double> tau;
    double shift = 0.0;

    double eval(double alpha) const {
        double s = 0.0;
        for (size_t j = 0; j < c.size(); ++j) s += c[j] * std::exp(-alpha * tau[j]);
        return s;
    }
    double derivative(double alpha, int n) const {
        double s = 0.0;
        for (size_t j = 0; j < c.size(); ++j)
            s += c[j] * std::pow(-tau[j], n) * std::exp(-alpha * tau[j]);
        return s;
    }
};

ExpSum exp_sum_from_classical(const ClassicalDichotomy& cd) {
    ExpSum e;
    std::vector<double> logratio(cd.size());
    e.shift = -kInf;
    for (int i = 0; i < cd.size(); ++i) {
        const double p = cd.p[i].to_double();
        const double q = cd.q[i].to_double();
        if (p <= 0.0) {
            logratio[i] = -kInf;
            continue;
        }
        if (q <= 0.0) {
            e.shift = kInf;
            return e;
        }
        logratio[i] = std::log(p) - std::log(q);
        e.shift = std::max(e.shift, logratio[i]);
    }
    if (!std::isfinite(e.shift)) {
        // p vanishes everywhere it can; treat as the zero sum
        e.shift = 0.0;
        return e;
    }
    for (int i = 0; i < cd.size(); ++i) {
        if (!std::isfinite(logratio[i])) continue;
        e.c.push_back(cd.q[i].to_double());
        e.tau.push_back(std::max(e.shift - logratio[i], 0.0));
    }
    return e;
}

ExpSum petz_exp_sum(const QuantumDichotomy& d) {
    return exp_sum_from_classical(nussbaum_szkola(d));
}

int binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    int r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - i + 1) / i;
    return r;
}

double central_difference(const std::function<double(double)>& f, double alpha,
                          int n, double h, double* scale = nullptr) {
    if (n == 0) return f(alpha);
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double w = (k % 2 == 0 ? 1.0 : -1.0) * binom(n, k);
        const double v = f(alpha + (0.5 * n - k) * h);
        if (scale) *scale = std::max(*scale, std::abs(v));
        s += w * v;
    }
    return s / std::pow(h, n);
}

}  // namespace

double g_shift(const QuantumDichotomy& d, const DivergenceFamily& family) {
    switch (family.tag) {
        case FamilyTag::Petz:
            return petz_exp_sum(d).shift;
        case FamilyTag::ClassicalEmbedded:
            return exp_sum_from_classical(commuting_reduction(d)).shift;
        default:
            return d_infinity(d);
    }
}

std::function<double(double)> g_evaluator(const QuantumDichotomy& d,
                                          const DivergenceFamily& family) {
    switch (family.tag) {
        case FamilyTag::Petz:
        case FamilyTag::ClassicalEmbedded:
        case FamilyTag::Maximal: {
            ExpSum es;
            if (family.tag == FamilyTag::Petz)
                es = petz_exp_sum(d);
            else if (family.tag == FamilyTag::ClassicalEmbedded)
                es = exp_sum_from_classical(commuting_reduction(d));
            else
                es = exp_sum_from_classical(maximal_simulation(d));
            if (!std::isfinite(es.shift)) return [](double) { return 0.0; };
            return [es](double alpha) { return es.eval(alpha); };
        }
        case FamilyTag::Sandwiched: {
            const double shift = d_infinity(d);
            if (!std::isfinite(shift)) return [](double) { return 0.0; };
            SpectralDecomp sr = hermitian_eig(d.rho.matrix);
            SpectralDecomp ss = hermitian_eig(d.sigma.matrix);
            if (sr.eigenvalues[0] >= 1.0 - 1e-9) {
                // pure rho: Q = (sum_i u_i v_i^{(1-alpha)/alpha})^alpha
                Eigen::VectorXcd psi = sr.basis.col(0);
                std::vector<double> logu, logv;
                const double cutv = 1e-12 * std::max(ss.eigenvalues[0], 0.0);
                for (int j = 0; j < ss.dim(); ++j) {
                    const double v = ss.eigenvalues[j];
                    if (v <= cutv) continue;
                    const double u = std::norm(ss.basis.col(j).dot(psi));
                    if (u <= 1e-14) continue;
                    logu.push_back(std::log(u));
                    logv.push_back(std::log(v));
                }
                return [logu, logv, shift](double alpha) {
                    std::vector<double> terms(logu.size());
                    for (size_t i = 0; i < logu.size(); ++i)
                        terms[i] = logu[i] + (1.0 - alpha) / alpha * logv[i];
                    return std::exp(alpha * logsumexp(terms) - alpha * shift);
                };
            }
            Eigen::MatrixXcd rho = d.rho.matrix;
            return [ss, rho, shift](double alpha) {
                Eigen::MatrixXcd se =
                    spectral_power(ss, (1.0 - alpha) / (2.0 * alpha));
                Eigen::MatrixXcd a = se * rho * se;
                SpectralDecomp sa = hermitian_eig(0.5 * (a + a.adjoint()));
                const double cut = 1e-13 * std::max(sa.eigenvalues[0], 0.0);
                std::vector<double> terms;
                for (int k = 0; k < sa.dim(); ++k)
                    if (sa.eigenvalues[k] > cut)
                        terms.push_back(alpha * std::log(sa.eigenvalues[k]));
                return std::exp(logsumexp(terms) - alpha * shift);
            };
        }
        case FamilyTag::AlphaZ: {
            const double shift = d_infinity(d);
            if (!std::isfinite(shift)) return [](double) { return 0.0; };
            SpectralDecomp sr = hermitian_eig(d.rho.matrix);
            SpectralDecomp ss = hermitian_eig(d.sigma.matrix);
            const double z = family.z;
            return [sr, ss, z, shift](double alpha) {
                Eigen::MatrixXcd ra = spectral_power(sr, alpha / z);
                Eigen::MatrixXcd se = spectral_power(ss, (1.0 - alpha) / (2.0 * z));
                Eigen::MatrixXcd a = se * ra * se;
                SpectralDecomp sa = hermitian_eig(0.5 * (a + a.adjoint()));
                const double cut = 1e-13 * std::max(sa.eigenvalues[0], 0.0);
                std::vector<double> terms;
                for (int k = 0; k < sa.dim(); ++k)
                    if (sa.eigenvalues[k] > cut)
                        terms.push_back(z * std::log(sa.eigenvalues[k]));
                return std::exp(logsumexp(terms) - alpha * shift);
            };
        }
        case FamilyTag::LogEuclidean: {
            const double shift = d_infinity(d);
            if (!std::isfinite(shift)) return [](double) { return 0.0; };
            SpectralDecomp sr = hermitian_eig(d.rho.matrix);
            SpectralDecomp ss = hermitian_eig(d.sigma.matrix);
            Eigen::MatrixXcd pr = support_projector(sr);
            Eigen::MatrixXcd ps = support_projector(ss);
            Eigen::MatrixXcd mid = pr * ps * pr;
            SpectralDecomp si = hermitian_eig(0.5 * (mid + mid.adjoint()));
            std::vector<int> kept;
            for (int i = 0; i < si.dim(); ++i)
                if (si.eigenvalues[i] > 1.0 - 1e-9) kept.push_back(i);
            if (kept.empty()) return [](double) { return 0.0; };
            Eigen::MatrixXcd w(si.dim(), static_cast<int>(kept.size()));
            for (size_t c = 0; c < kept.size(); ++c)
                w.col(static_cast<int>(c)) = si.basis.col(kept[c]);
            Eigen::MatrixXcd rc = w.adjoint() * d.rho.matrix * w;
            Eigen::MatrixXcd sc = w.adjoint() * d.sigma.matrix * w;
            Eigen::MatrixXcd lr = spectral_log(0.5 * (rc + rc.adjoint()));
            Eigen::MatrixXcd ls = spectral_log(0.5 * (sc + sc.adjoint()));
            return [lr, ls, shift](double alpha) {
                Eigen::MatrixXcd l = alpha * lr + (1.0 - alpha) * ls;
                SpectralDecomp sl = hermitian_eig(0.5 * (l + l.adjoint()));
                std::vector<double> terms(static_cast<size_t>(sl.dim()));
                for (int i = 0; i < sl.dim(); ++i)
                    terms[static_cast<size_t>(i)] = sl.eigenvalues[i];
                return std::exp(logsumexp(terms) - alpha * shift);
            };
        }
        case FamilyTag::Measured: {
            const double shift = d_infinity(d);
            if (!std::isfinite(shift)) return [](double) { return 0.0; };
            QuantumDichotomy dc = d;
            DivergenceFamily cfg = family;
            return [dc, cfg, shift](double alpha) {
                const double dv = measured(dc, alpha, cfg).value;
                return std::exp((alpha - 1.0) * dv - alpha * shift);
            };
        }
    }
    throw Error("UnknownFamily", "unhandled family tag");
}

double g_function(const QuantumDichotomy& d, const DivergenceFamily& family,
                  double alpha) {
    return g_evaluator(d, family)(alpha);
}

DerivativeEstimate nth_derivative(const std::function<double(double)>& f,
                                  double alpha, int n, double h) {
    if (n < 0 || n > 6)
        throw Error("OrderTooLarge", "derivative order must be in [0, 6]");
    DerivativeEstimate est;
    est.order = n;
    est.alpha = alpha;
    if (n == 0) {
        est.value = f(alpha);
        est.step = h > 0.0 ? h : 1e-2 * std::max(1.0, alpha);
        est.error_estimate = 0.0;
        return est;
    }
    if (h <= 0.0) h = 1e-2 * std::max(1.0, alpha);
    while (alpha - 0.5 * n * h <= 0.0) {
        h *= 0.9;
        if (h < 1e-7)
            throw Error("StepUnderflow",
                        "cannot keep the difference stencil inside alpha > 0");
    }
    double scale = 0.0;
    const double coarse = central_difference(f, alpha, n, h, &scale);
    const double fine = central_difference(f, alpha, n, 0.5 * h, &scale);
    const double richardson = (4.0 * fine - coarse) / 3.0;
    est.value = richardson;
    est.step = h;
    // |R - fine| misses correlated rounding noise, which the stencil
    // amplifies by 2^n / h^n; never report an error below that floor.
    const double rounding = 2.0 * std::pow(2.0, n) *
                            std::numeric_limits<double>::epsilon() * scale /
                            std::pow(0.5 * h, n);
    est.error_estimate = std::max(std::abs(richardson - fine), rounding);
    return est;
}

CMReport cm_check(const QuantumDichotomy& d, const DivergenceFamily& family,
                  const std::vector<double>& alpha_grid, int max_order) {
    if (max_order < 0 || max_order > 6)
        throw Error("OrderTooLarge", "max_order must be in [0, 6]");
    if (alpha_grid.empty()) throw Error("InvalidGrid", "alpha grid is empty");
    for (double a : alpha_grid)
        if (!(a > 0.0))
            throw Error("InvalidGrid", "alpha grid must lie in (0, inf)");

    CMReport rep;
    rep.family = family;
    rep.alpha_grid = alpha_grid;
    rep.max_order = max_order;
    auto f = g_evaluator(d, family);

    const size_t g = alpha_grid.size();
    rep.verdicts.assign(static_cast<size_t>(max_order) + 1,
                        std::vector<Verdict>(g, Verdict::Inconclusive));
    rep.margins.assign(static_cast<size_t>(max_order) + 1,
                       std::vector<double>(g, 0.0));
    rep.errors.assign(static_cast<size_t>(max_order) + 1,
                      std::vector<double>(g, 0.0));

    for (int n = 0; n <= max_order; ++n) {
        for (size_t i = 0; i < g; ++i) {
            DerivativeEstimate est = nth_derivative(f, alpha_grid[i], n);
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            const double margin = sign * est.value;
            rep.margins[static_cast<size_t>(n)][i] = margin;
            rep.errors[static_cast<size_t>(n)][i] = est.error_estimate;
            Verdict v;
            if (!std::isfinite(margin) || !std::isfinite(est.error_estimate))
                v = Verdict::Inconclusive;
            else if (margin < -10.0 * est.error_estimate)
                v = Verdict::Fail;
            else
                v = Verdict::Pass;
            rep.verdicts[static_cast<size_t>(n)][i] = v;
            if (v == Verdict::Fail && !rep.first_violation)
                rep.first_violation = std::make_tuple(n, alpha_grid[i], margin);
        }
    }
    return rep;
}

double petz_cm_analytic(const QuantumDichotomy& d, double alpha, int n) {
    ExpSum es = petz_exp_sum(d);
    if (!std::isfinite(es.shift)) return 0.0;
    return es.derivative(alpha, n);
}

bool schur_product_check(const std::function<double(double)>& f, double x,
                         const std::vector<int>& n_vec,
                         const std::vector<int>& m_vec) {
    if (n_vec.size() != m_vec.size() || n_vec.empty())
        throw Error("NotMajorized", "order vectors must have equal nonzero length");
    for (int e : n_vec)
        if (e < 0 || e > 4) throw Error("OrderTooLarge", "orders must be in [0, 4]");
    for (int e : m_vec)
        if (e < 0 || e > 4) throw Error("OrderTooLarge", "orders must be in [0, 4]");

    std::vector<int> ns = n_vec, ms = m_vec;
    std::sort(ns.rbegin(), ns.rend());
    std::sort(ms.rbegin(), ms.rend());
    long total_n = 0, total_m = 0, run_n = 0, run_m = 0;
    for (size_t k = 0; k < ns.size(); ++k) {
        total_n += ns[k];
        total_m += ms[k];
        run_n += ns[k];
        run_m += ms[k];
        if (run_n < run_m)
            throw Error("NotMajorized", "partial sums of n must dominate those of m");
    }
    if (total_n != total_m)
        throw Error("NotMajorized", "order vectors must have equal totals");

    auto product = [&](const std::vector<int>& orders, double& noise) {
        std::vector<double> vals(orders.size()), errs(orders.size());
        for (size_t j = 0; j < orders.size(); ++j) {
            DerivativeEstimate est = nth_derivative(f, x, orders[j]);
            const double sign = (orders[j] % 2 == 0) ? 1.0 : -1.0;
            vals[j] = sign * est.value;
            errs[j] = est.error_estimate;
        }
        double prod = 1.0;
        for (double v : vals) prod *= v;
        noise = 0.0;
        for (size_t j = 0; j < orders.size(); ++j) {
            double rest = 1.0;
            for (size_t k = 0; k < orders.size(); ++k)
                if (k != j) rest *= std::abs(vals[k]);
            noise += errs[j] * rest;
        }
        return prod;
    };

    double noise_l = 0.0, noise_r = 0.0;
    const double lhs = product(n_vec, noise_l);
    const double rhs = product(m_vec, noise_r);
    return lhs >= rhs - (noise_l + noise_r);
}

}  // namespace dichotomy
