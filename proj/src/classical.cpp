#include "dichotomy/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dichotomy/error.hpp"

namespace dichotomy {

namespace {

Ratio ratio_at(const ClassicalDichotomy& d, int i) {
    if (d.q[i].is_zero()) return Ratio{true, Rational(0)};
    return Ratio{false, d.p[i] / d.q[i]};
}

// Descending order with +infinity first; exact comparison.
bool ratio_greater(const Ratio& a, const Ratio& b) {
    if (a.infinite) return !b.infinite;
    if (b.infinite) return false;
    return a.value > b.value;
}

}  // namespace

ClassicalDichotomy make_dichotomy(RationalVector p, RationalVector q) {
    if (p.size() != q.size())
        throw Error("InvalidDichotomy", "p and q must have the same length");
    if (p.size() == 0) throw Error("InvalidDichotomy", "empty dichotomy");
    Rational sp(0), sq(0);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i].sign() < 0 || q[i].sign() < 0)
            throw Error("InvalidDichotomy", "negative entry");
        sp += p[i];
        sq += q[i];
    }
    if (sp != Rational(1) || sq != Rational(1))
        throw Error("InvalidDichotomy", "p and q must each sum to exactly 1");

    std::vector<Rational> kp, kq;
    kp.reserve(static_cast<size_t>(p.size()));
    kq.reserve(static_cast<size_t>(q.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i].is_zero() && q[i].is_zero()) continue;
        kp.push_back(p[i]);
        kq.push_back(q[i]);
    }
    ClassicalDichotomy d;
    d.p.resize(static_cast<Eigen::Index>(kp.size()));
    d.q.resize(static_cast<Eigen::Index>(kq.size()));
    for (size_t i = 0; i < kp.size(); ++i) {
        d.p[static_cast<Eigen::Index>(i)] = kp[i];
        d.q[static_cast<Eigen::Index>(i)] = kq[i];
    }
    return d;
}

ClassicalDichotomy make_dichotomy_from_doubles(const Eigen::VectorXd& p,
                                               const Eigen::VectorXd& q) {
    if (p.size() != q.size())
        throw Error("InvalidDichotomy", "p and q must have the same length");
    auto convert = [](const Eigen::VectorXd& v) {
        RationalVector r(v.size());
        Rational sum(0);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            double x = v[i];
            if (!std::isfinite(x))
                throw Error("InvalidDichotomy", "non-finite entry");
            if (x < -1e-9)
                throw Error("InvalidDichotomy", "negative entry beyond tolerance");
            if (x < 0) x = 0.0;
            r[i] = Rational::from_double(x);
            sum += r[i];
        }
        if (sum.is_zero()) throw Error("InvalidDichotomy", "zero vector");
        for (Eigen::Index i = 0; i < v.size(); ++i) r[i] = r[i] / sum;
        return r;
    };
    return make_dichotomy(convert(p), convert(q));
}

MinimalForm minimal_form(const ClassicalDichotomy& d) {
    const int n = d.size();
    std::vector<Ratio> ratios(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) ratios[static_cast<size_t>(i)] = ratio_at(d, i);

    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return ratio_greater(ratios[static_cast<size_t>(a)], ratios[static_cast<size_t>(b)]);
    });

    MinimalForm mf;
    mf.permutation = order;
    std::vector<Rational> pt, qt;
    for (int k = 0; k < n; ++k) {
        int i = order[static_cast<size_t>(k)];
        const Ratio& r = ratios[static_cast<size_t>(i)];
        if (mf.blocks.empty() || !(mf.ratios.back() == r)) {
            mf.blocks.emplace_back();
            mf.ratios.push_back(r);
            pt.push_back(Rational(0));
            qt.push_back(Rational(0));
        }
        mf.blocks.back().push_back(i);
        pt.back() += d.p[i];
        qt.back() += d.q[i];
    }
    mf.p_tilde.resize(static_cast<Eigen::Index>(pt.size()));
    mf.q_tilde.resize(static_cast<Eigen::Index>(qt.size()));
    for (size_t j = 0; j < pt.size(); ++j) {
        mf.p_tilde[static_cast<Eigen::Index>(j)] = pt[j];
        mf.q_tilde[static_cast<Eigen::Index>(j)] = qt[j];
    }
    return mf;
}

RationalVector apply(const StochasticMatrix& M, const RationalVector& v) {
    if (M.entries.cols() != v.size())
        throw Error("SizeMismatch", "matrix-vector size mismatch");
    RationalVector out(M.entries.rows());
    for (Eigen::Index r = 0; r < M.entries.rows(); ++r) {
        Rational acc(0);
        for (Eigen::Index c = 0; c < M.entries.cols(); ++c)
            acc += M.entries(r, c) * v[c];
        out[r] = acc;
    }
    return out;
}

ChannelPairClassical build_channels(const ClassicalDichotomy& d) {
    MinimalForm mf = minimal_form(d);
    const int n = d.size();
    const int m = mf.block_count();

    StochasticMatrix T, R;
    T.entries = RationalMatrix::Constant(m, n, Rational(0));
    R.entries = RationalMatrix::Constant(n, m, Rational(0));
    for (int j = 0; j < m; ++j) {
        const Rational& pj = mf.p_tilde[j];
        const Rational& qj = mf.q_tilde[j];
        for (int i : mf.blocks[static_cast<size_t>(j)]) {
            T.entries(j, i) = Rational(1);
            // Reconstruction weights: the conditional of q given the block,
            // or of p when the block carries no q mass.
            R.entries(i, j) = qj.is_zero() ? d.p[i] / pj : d.q[i] / qj;
        }
    }
    return ChannelPairClassical{std::move(T), std::move(R)};
}

LorenzCurve lorenz_curve(const ClassicalDichotomy& d) {
    const int n = d.size();
    std::vector<Ratio> ratios(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) ratios[static_cast<size_t>(i)] = ratio_at(d, i);
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return ratio_greater(ratios[static_cast<size_t>(a)], ratios[static_cast<size_t>(b)]);
    });

    LorenzCurve curve;
    curve.points.reserve(static_cast<size_t>(n) + 1);
    curve.points.emplace_back(Rational(0), Rational(0));
    Rational cq(0), cp(0);
    for (int k = 0; k < n; ++k) {
        int i = order[static_cast<size_t>(k)];
        cq += d.q[i];
        cp += d.p[i];
        curve.points.emplace_back(cq, cp);
    }
    return curve;
}

LorenzCurve simplified(const LorenzCurve& curve) {
    const auto& pts = curve.points;
    if (pts.size() <= 2) return curve;
    LorenzCurve out;
    out.points.push_back(pts.front());
    for (size_t k = 1; k + 1 < pts.size(); ++k) {
        const auto& a = out.points.back();
        const auto& b = pts[k];
        const auto& c = pts[k + 1];
        Rational cross = (b.first - a.first) * (c.second - a.second) -
                         (b.second - a.second) * (c.first - a.first);
        if (!cross.is_zero()) out.points.push_back(b);
    }
    out.points.push_back(pts.back());
    return out;
}

Rational lorenz_value(const LorenzCurve& curve, const Rational& x) {
    const auto& pts = curve.points;
    if (pts.empty()) throw Error("InvalidCurve", "empty curve");
    if (x.sign() < 0 || x > pts.back().first)
        throw Error("InvalidArgument", "abscissa outside curve domain");
    if (x.is_zero()) {
        // Upper value of the vertical segment at 0, if any.
        Rational y = pts.front().second;
        for (const auto& pt : pts) {
            if (!pt.first.is_zero()) break;
            y = pt.second;
        }
        return y;
    }
    for (size_t k = 1; k < pts.size(); ++k) {
        if (x <= pts[k].first) {
            const auto& a = pts[k - 1];
            const auto& b = pts[k];
            if (a.first == b.first) continue;  // vertical piece, keep scanning
            return a.second +
                   (b.second - a.second) * (x - a.first) / (b.first - a.first);
        }
    }
    return pts.back().second;
}

bool relative_majorizes(const ClassicalDichotomy& d1, const ClassicalDichotomy& d2) {
    LorenzCurve c1 = lorenz_curve(d1);
    LorenzCurve c2 = lorenz_curve(d2);
    std::vector<Rational> xs;
    xs.reserve(c1.points.size() + c2.points.size());
    for (const auto& pt : c1.points) xs.push_back(pt.first);
    for (const auto& pt : c2.points) xs.push_back(pt.first);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (const auto& x : xs)
        if (lorenz_value(c1, x) < lorenz_value(c2, x)) return false;
    return true;
}

InterconvertResult interconvertible_classical(const ClassicalDichotomy& d1,
                                              const ClassicalDichotomy& d2) {
    MinimalForm m1 = minimal_form(d1);
    MinimalForm m2 = minimal_form(d2);
    InterconvertResult res;
    if (m1.block_count() != m2.block_count()) return res;
    for (int j = 0; j < m1.block_count(); ++j) {
        if (m1.p_tilde[j] != m2.p_tilde[j]) return res;
        if (m1.q_tilde[j] != m2.q_tilde[j]) return res;
    }
    ChannelPairClassical ch1 = build_channels(d1);
    ChannelPairClassical ch2 = build_channels(d2);

    auto compose = [](const StochasticMatrix& R, const StochasticMatrix& T) {
        StochasticMatrix M;
        M.entries = RationalMatrix::Constant(R.rows(), T.cols(), Rational(0));
        for (int r = 0; r < R.rows(); ++r)
            for (int c = 0; c < T.cols(); ++c) {
                Rational acc(0);
                for (int k = 0; k < R.cols(); ++k)
                    acc += R.entries(r, k) * T.entries(k, c);
                M.entries(r, c) = acc;
            }
        return M;
    };
    StochasticMatrix fwd = compose(ch2.R, ch1.T);
    StochasticMatrix bwd = compose(ch1.R, ch2.T);

    auto maps_exactly = [](const StochasticMatrix& M, const RationalVector& from,
                           const RationalVector& to) {
        RationalVector got = apply(M, from);
        if (got.size() != to.size()) return false;
        for (Eigen::Index i = 0; i < to.size(); ++i)
            if (got[i] != to[i]) return false;
        return true;
    };
    if (!maps_exactly(fwd, d1.p, d2.p) || !maps_exactly(fwd, d1.q, d2.q) ||
        !maps_exactly(bwd, d2.p, d1.p) || !maps_exactly(bwd, d2.q, d1.q))
        throw Error("InternalError", "channel verification failed");

    res.interconvertible = true;
    res.d1_to_d2 = std::move(fwd);
    res.d2_to_d1 = std::move(bwd);
    return res;
}

double q_alpha_pseudo(const ClassicalDichotomy& d, double alpha) {
    double sum = 0.0;
    for (int i = 0; i < d.size(); ++i) {
        if (d.p[i].is_zero() || d.q[i].is_zero()) continue;
        sum += std::pow(d.p[i].to_double(), alpha) *
               std::pow(d.q[i].to_double(), 1.0 - alpha);
    }
    return sum;
}

double classical_renyi(const ClassicalDichotomy& d, double alpha, RenyiFlags* flags) {
    if (!std::isfinite(alpha) || alpha < 0.0)
        throw Error("InvalidAlpha", "alpha must be a finite nonnegative real");
    const double inf = std::numeric_limits<double>::infinity();

    bool orthogonal = true;
    bool abs_cont = true;  // p << q
    for (int i = 0; i < d.size(); ++i) {
        bool pp = !d.p[i].is_zero();
        bool qq = !d.q[i].is_zero();
        if (pp && qq) orthogonal = false;
        if (pp && !qq) abs_cont = false;
    }
    if (flags) flags->orthogonal = orthogonal;

    bool equal = d.p.size() == d.q.size();
    for (int i = 0; equal && i < d.size(); ++i)
        if (d.p[i] != d.q[i]) equal = false;
    if (equal) return 0.0;

    if (alpha == 1.0) {
        if (!abs_cont) return inf;
        double kl = 0.0;
        for (int i = 0; i < d.size(); ++i) {
            if (d.p[i].is_zero()) continue;
            kl += d.p[i].to_double() * std::log((d.p[i] / d.q[i]).to_double());
        }
        return kl;
    }
    if (alpha > 1.0 && !abs_cont) return inf;

    double q = q_alpha_pseudo(d, alpha);
    if (q <= 0.0) return inf;  // disjoint supports, alpha < 1
    return std::log(q) / (alpha - 1.0);
}

ClassicalDichotomy tensor_product(const ClassicalDichotomy& a, const ClassicalDichotomy& b) {
    const int na = a.size(), nb = b.size();
    RationalVector p(static_cast<Eigen::Index>(na) * nb), q(static_cast<Eigen::Index>(na) * nb);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) {
            p[static_cast<Eigen::Index>(i) * nb + j] = a.p[i] * b.p[j];
            q[static_cast<Eigen::Index>(i) * nb + j] = a.q[i] * b.q[j];
        }
    return make_dichotomy(std::move(p), std::move(q));
}

}  // namespace dichotomy
