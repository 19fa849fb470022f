#include "dichotomy/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "dichotomy/error.hpp"

namespace dichotomy {

namespace {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

long double check_equispaced(const std::vector<double>& alphas) {
    const size_t k = alphas.size();
    if (k < 2) throw Error("InvalidSamples", "need at least two sample points");
    long double delta = static_cast<long double>(alphas[1]) - alphas[0];
    if (!(delta > 0)) throw Error("InvalidSamples", "alphas must be strictly increasing");
    for (size_t i = 1; i + 1 < k; ++i) {
        long double step = static_cast<long double>(alphas[i + 1]) - alphas[i];
        if (std::abs(static_cast<double>(step - delta)) >
            1e-9 * std::max(1.0, static_cast<double>(delta)))
            throw Error("InvalidSamples", "alphas must be equispaced");
    }
    return delta;
}

VectorXld fit_weights(const std::vector<double>& alphas,
                      const std::vector<double>& values,
                      const std::vector<long double>& log_nodes) {
    const int k = static_cast<int>(alphas.size());
    const int r = static_cast<int>(log_nodes.size());
    MatrixXld a(k, r);
    VectorXld rhs(k);
    for (int i = 0; i < k; ++i) {
        rhs(i) = static_cast<long double>(values[static_cast<size_t>(i)]);
        for (int j = 0; j < r; ++j)
            a(i, j) = std::exp(static_cast<long double>(alphas[static_cast<size_t>(i)]) *
                               log_nodes[static_cast<size_t>(j)]);
    }
    return a.colPivHouseholderQr().solve(rhs);
}

long double residual_sq(const std::vector<double>& alphas,
                        const std::vector<double>& values,
                        const std::vector<long double>& log_nodes,
                        const std::vector<long double>& log_weights) {
    long double acc = 0;
    for (size_t i = 0; i < alphas.size(); ++i) {
        long double model = 0;
        for (size_t j = 0; j < log_nodes.size(); ++j)
            model += std::exp(log_weights[j] +
                              static_cast<long double>(alphas[i]) * log_nodes[j]);
        long double d = model - static_cast<long double>(values[i]);
        acc += d * d;
    }
    return acc;
}

// Damped Gauss-Newton refinement in (log x_j, log c_j); steps are accepted
// only when the residual decreases, so the Prony estimate can never get
// worse.
void polish(const std::vector<double>& alphas, const std::vector<double>& values,
            std::vector<long double>& log_nodes, std::vector<long double>& log_weights) {
    const int k = static_cast<int>(alphas.size());
    const int r = static_cast<int>(log_nodes.size());
    if (r == 0) return;
    long double lambda = 1e-3L;
    long double best = residual_sq(alphas, values, log_nodes, log_weights);
    for (int iter = 0; iter < 40; ++iter) {
        MatrixXld jac(k, 2 * r);
        VectorXld res(k);
        for (int i = 0; i < k; ++i) {
            long double ai = static_cast<long double>(alphas[static_cast<size_t>(i)]);
            long double model = 0;
            for (int j = 0; j < r; ++j) {
                long double term = std::exp(log_weights[static_cast<size_t>(j)] +
                                            ai * log_nodes[static_cast<size_t>(j)]);
                model += term;
                jac(i, j) = term * ai;     // d/d log x_j
                jac(i, r + j) = term;      // d/d log c_j
            }
            res(i) = model - static_cast<long double>(values[static_cast<size_t>(i)]);
        }
        MatrixXld normal = jac.transpose() * jac;
        for (int j = 0; j < 2 * r; ++j) normal(j, j) += lambda * (normal(j, j) + 1e-30L);
        VectorXld step = normal.ldlt().solve(-(jac.transpose() * res));
        std::vector<long double> ln(log_nodes), lw(log_weights);
        for (int j = 0; j < r; ++j) {
            ln[static_cast<size_t>(j)] += step(j);
            lw[static_cast<size_t>(j)] += step(r + j);
        }
        long double trial = residual_sq(alphas, values, ln, lw);
        if (trial < best) {
            log_nodes = ln;
            log_weights = lw;
            if (best - trial < 1e-38L) return;
            best = trial;
            lambda = std::max(lambda * 0.3L, 1e-12L);
        } else {
            lambda *= 10.0L;
            if (lambda > 1e8L) return;
        }
    }
}

// Curve domination with slack: recovered masses that did not snap to small
// rationals carry O(1e-9) noise, so an exact comparison would decide ties
// (curves touching at a breakpoint) by that noise. The margin sits well
// above the recovery error and well below any genuine curve gap.
bool dominates_within(const ClassicalDichotomy& a, const ClassicalDichotomy& b, double tol) {
    const LorenzCurve ca = lorenz_curve(a);
    const LorenzCurve cb = lorenz_curve(b);
    auto dominated_at = [&](const Rational& x) {
        return lorenz_value(ca, x).to_double() + tol >= lorenz_value(cb, x).to_double();
    };
    for (const auto& pt : ca.points)
        if (!dominated_at(pt.first)) return false;
    for (const auto& pt : cb.points)
        if (!dominated_at(pt.first)) return false;
    return true;
}

}  // namespace

double laplace_transform(const DiscreteMeasure& m, double alpha, bool* overflow) {
    if (overflow) *overflow = false;
    double sum = 0.0;
    if (m.weight_at_infinity > 0.0) {
        if (alpha == 0.0)
            sum += m.weight_at_infinity;
        else if (alpha < 0.0)
            return std::numeric_limits<double>::infinity();
    }
    for (size_t j = 0; j < m.points.size(); ++j) {
        double term = m.weights[j] * std::exp(-alpha * m.points[j]);
        if (!std::isfinite(term) && overflow) *overflow = true;
        sum += term;
    }
    if (!std::isfinite(sum) && overflow) *overflow = true;
    return sum;
}

DiscreteMeasure tilde_measure(const MinimalForm& mf) {
    DiscreteMeasure m;
    for (int j = 0; j < mf.block_count(); ++j) {
        const Ratio& r = mf.ratios[static_cast<size_t>(j)];
        if (r.infinite) continue;  // no q mass there
        if (r.value.is_zero()) {
            m.weight_at_infinity += mf.q_tilde[j].to_double();
            continue;
        }
        m.points.push_back(-std::log(r.value.to_double()));
        m.weights.push_back(mf.q_tilde[j].to_double());
    }
    return m;
}

DiscreteMeasure tilde_measure(const ClassicalDichotomy& d) {
    return tilde_measure(minimal_form(d));
}

DivergenceSamples sample_divergences(const ClassicalDichotomy& d, double a, double b,
                                     int dim_bound) {
    if (!(0.0 <= a && a < b && b <= 1.0))
        throw Error("InvalidSamples", "interval must satisfy 0 <= a < b <= 1");
    if (dim_bound < 1) throw Error("InvalidSamples", "dimension bound must be positive");
    const int k = 2 * dim_bound + 4;
    const double delta = (b - a) / (k + 1);
    DivergenceSamples s;
    s.a = a;
    s.b = b;
    s.alphas.resize(static_cast<size_t>(k));
    s.values.resize(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
        double alpha = a + (i + 1) * delta;
        double v = classical_renyi(d, alpha);
        if (!std::isfinite(v))
            throw Error("InvalidSamples",
                        "divergence is infinite on the sampling interval");
        s.alphas[static_cast<size_t>(i)] = alpha;
        s.values[static_cast<size_t>(i)] = v;
    }
    return s;
}

DiscreteMeasure recover_exponential_sum(const std::vector<double>& alphas,
                                        const std::vector<double>& q_values,
                                        int max_atoms, double rank_tol) {
    if (alphas.size() != q_values.size())
        throw Error("InvalidSamples", "alphas and values must have the same length");
    if (max_atoms < 1) throw Error("InvalidSamples", "max_atoms must be positive");
    const int k = static_cast<int>(alphas.size());
    if (k < 2 * max_atoms)
        throw Error("InvalidSamples", "need at least 2*max_atoms samples");
    const long double delta = check_equispaced(alphas);

    double smax = 0.0;
    for (double v : q_values) {
        if (!std::isfinite(v)) throw Error("InvalidSamples", "non-finite sample value");
        smax = std::max(smax, std::abs(v));
    }
    DiscreteMeasure out;
    if (smax == 0.0) return out;

    const int l = k / 2;
    MatrixXld h0(l, l), h1(l, l);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
            h0(i, j) = static_cast<long double>(q_values[static_cast<size_t>(i + j)]);
            h1(i, j) = static_cast<long double>(q_values[static_cast<size_t>(i + j + 1)]);
        }

    Eigen::JacobiSVD<MatrixXld> svd(h0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXld sv = svd.singularValues();
    const long double s0 = sv(0);
    int rank = 0;
    while (rank < l && sv(rank) > rank_tol * s0 && rank < max_atoms) ++rank;
    if (rank == 0) return out;
    if (rank < l && sv(rank - 1) - sv(rank) <
                        10.0L * static_cast<long double>(rank_tol) * s0)
        throw Error("RankAmbiguous",
                    "singular-value gap too small to fix the atom count");

    MatrixXld ur = svd.matrixU().leftCols(rank);
    MatrixXld vr = svd.matrixV().leftCols(rank);
    VectorXld si = sv.head(rank).array().rsqrt();
    MatrixXld pencil =
        si.asDiagonal() * (ur.transpose() * h1 * vr) * si.asDiagonal();

    Eigen::EigenSolver<MatrixXld> es(pencil);
    if (es.info() != Eigen::Success)
        throw Error("ResidualTooLarge", "pencil eigensolver failed to converge");

    std::vector<long double> log_nodes;
    for (int j = 0; j < rank; ++j) {
        std::complex<long double> z = es.eigenvalues()(j);
        if (!(z.real() > 0)) continue;
        if (std::abs(z.imag()) > 1e-8L * std::max<long double>(1.0L, std::abs(z)))
            continue;
        log_nodes.push_back(std::log(z.real()) / delta);
    }

    auto refit = [&]() { return fit_weights(alphas, q_values, log_nodes); };
    VectorXld c = refit();
    for (;;) {
        long double cmin = 0;
        for (int j = 0; j < c.size(); ++j) cmin = std::min(cmin, c(j));
        if (cmin < -1e-8L)
            throw Error("NegativeWeight", "recovered weight below -1e-8");
        std::vector<long double> kept;
        for (int j = 0; j < c.size(); ++j)
            if (c(j) > 1e-12L * static_cast<long double>(smax))
                kept.push_back(log_nodes[static_cast<size_t>(j)]);
        if (kept.size() == log_nodes.size()) break;
        log_nodes = std::move(kept);
        if (log_nodes.empty()) break;
        c = refit();
    }

    std::vector<long double> log_weights;
    for (int j = 0; j < c.size(); ++j)
        log_weights.push_back(std::log(c(j)));
    polish(alphas, q_values, log_nodes, log_weights);

    long double maxdev = 0;
    for (size_t i = 0; i < alphas.size(); ++i) {
        long double model = 0;
        for (size_t j = 0; j < log_nodes.size(); ++j)
            model += std::exp(log_weights[j] +
                              static_cast<long double>(alphas[i]) * log_nodes[j]);
        maxdev = std::max(maxdev,
                          std::abs(model - static_cast<long double>(q_values[i])));
    }
    if (maxdev > 1e-8L * static_cast<long double>(smax))
        throw Error("ResidualTooLarge", "recovered model does not reproduce samples");

    std::vector<std::pair<double, double>> atoms;
    for (size_t j = 0; j < log_nodes.size(); ++j)
        atoms.emplace_back(static_cast<double>(-log_nodes[j]),
                           static_cast<double>(std::exp(log_weights[j])));
    std::sort(atoms.begin(), atoms.end());
    for (const auto& a : atoms) {
        out.points.push_back(a.first);
        out.weights.push_back(a.second);
    }
    return out;
}

ReconstructedForm reconstruct_minimal_form(const DivergenceSamples& s) {
    const size_t k = s.alphas.size();
    if (k == 0 || s.values.size() != k)
        throw Error("InvalidSamples", "empty or mismatched sample set");
    if (!(0.0 <= s.a && s.a < s.b && s.b <= 1.0))
        throw Error("InvalidSamples", "interval must satisfy 0 <= a < b <= 1");
    for (size_t i = 0; i < k; ++i) {
        if (!std::isfinite(s.values[i]))
            throw Error("InvalidSamples", "non-finite divergence value");
        if (!(s.alphas[i] > s.a && s.alphas[i] < s.b))
            throw Error("InvalidSamples", "alpha outside the declared interval");
    }

    std::vector<double> q(k);
    for (size_t i = 0; i < k; ++i)
        q[i] = std::exp((s.alphas[i] - 1.0) * s.values[i]);

    const int max_atoms = std::max(1, (static_cast<int>(k) - 4) / 2);
    DiscreteMeasure rec = recover_exponential_sum(s.alphas, q, max_atoms);

    double lambda = 0.0;
    double qsum = 0.0;
    std::vector<double> pfin(rec.points.size()), qfin(rec.points.size());
    for (size_t j = 0; j < rec.points.size(); ++j) {
        double x = std::exp(-rec.points[j]);
        pfin[j] = x * rec.weights[j];
        qfin[j] = rec.weights[j];
        lambda += pfin[j];
        qsum += qfin[j];
    }
    const double p_inf = 1.0 - lambda;
    const double q_def = 1.0 - qsum;
    if (p_inf < -1e-8 || q_def < -1e-8)
        throw Error("NegativeMass", "reconstructed block mass below -1e-8");
    const bool has_inf = p_inf > 1e-9;
    const bool has_zero = q_def > 1e-9;

    std::vector<double> pd, qd;
    if (has_inf) {
        pd.push_back(p_inf);
        qd.push_back(0.0);
    }
    for (size_t j = 0; j < pfin.size(); ++j) {  // points ascending = ratio descending
        pd.push_back(pfin[j]);
        qd.push_back(qfin[j]);
    }
    if (has_zero) {
        pd.push_back(0.0);
        qd.push_back(q_def);
    }

    // Prefer small exact rationals; fall back to exact float embeddings
    // normalized to unit sum.
    const size_t m = pd.size();
    std::vector<Rational> pr(m), qr(m);
    bool exact = true;
    Rational sp(0), sq(0);
    for (size_t j = 0; j < m && exact; ++j) {
        auto a = Rational::approximate(pd[j], 1000000L, 1e-9);
        auto b = Rational::approximate(qd[j], 1000000L, 1e-9);
        if (!a || !b) {
            exact = false;
            break;
        }
        pr[j] = *a;
        qr[j] = *b;
        sp += pr[j];
        sq += qr[j];
    }
    if (!exact || sp != Rational(1) || sq != Rational(1)) {
        exact = false;
        sp = Rational(0);
        sq = Rational(0);
        for (size_t j = 0; j < m; ++j) {
            pr[j] = Rational::from_double(pd[j]);
            qr[j] = Rational::from_double(qd[j]);
            sp += pr[j];
            sq += qr[j];
        }
        for (size_t j = 0; j < m; ++j) {
            pr[j] = pr[j] / sp;
            qr[j] = qr[j] / sq;
        }
    }

    ReconstructedForm result;
    result.exact = exact;
    result.lambda = lambda;
    result.measure = rec;
    if (has_zero) result.measure.weight_at_infinity = q_def;
    MinimalForm& mf = result.form;
    mf.p_tilde.resize(static_cast<Eigen::Index>(m));
    mf.q_tilde.resize(static_cast<Eigen::Index>(m));
    for (size_t j = 0; j < m; ++j) {
        mf.p_tilde[static_cast<Eigen::Index>(j)] = pr[j];
        mf.q_tilde[static_cast<Eigen::Index>(j)] = qr[j];
        mf.blocks.push_back({static_cast<int>(j)});
        mf.permutation.push_back(static_cast<int>(j));
        Ratio r;
        if (qr[j].is_zero()) {
            r.infinite = true;
        } else {
            r.infinite = false;
            r.value = pr[j] / qr[j];
        }
        mf.ratios.push_back(r);
    }
    return result;
}

ConversionDecision decide_conversion_from_divergences(const DivergenceSamples& s1,
                                                      const DivergenceSamples& s2) {
    ReconstructedForm r1 = reconstruct_minimal_form(s1);
    ReconstructedForm r2 = reconstruct_minimal_form(s2);
    ClassicalDichotomy d1 = make_dichotomy(r1.form.p_tilde, r1.form.q_tilde);
    ClassicalDichotomy d2 = make_dichotomy(r2.form.p_tilde, r2.form.q_tilde);
    ConversionDecision dec;
    if (r1.exact && r2.exact) {
        dec.convertible_1_to_2 = relative_majorizes(d1, d2);
        dec.convertible_2_to_1 = relative_majorizes(d2, d1);
    } else {
        constexpr double kNoiseTol = 1e-7;
        dec.convertible_1_to_2 = dominates_within(d1, d2, kNoiseTol);
        dec.convertible_2_to_1 = dominates_within(d2, d1, kNoiseTol);
    }
    dec.interconvertible = dec.convertible_1_to_2 && dec.convertible_2_to_1;
    return dec;
}

}  // namespace dichotomy
