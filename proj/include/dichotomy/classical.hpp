#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dichotomy/rational.hpp"

namespace dichotomy {

// Pair of exact-rational probability vectors of equal length. Entries are
// nonnegative, both sum to exactly 1, and no index carries p_i = q_i = 0
// (such indices are dropped on construction).
struct ClassicalDichotomy {
    RationalVector p;
    RationalVector q;

    int size() const { return static_cast<int>(p.size()); }
};

ClassicalDichotomy make_dichotomy(RationalVector p, RationalVector q);

// Exact embedding of floating-point weight vectors: entries are converted to
// dyadic rationals (tiny negatives within -1e-9 are clamped to zero) and each
// vector is divided by its exact sum so the result sums to exactly 1.
ClassicalDichotomy make_dichotomy_from_doubles(const Eigen::VectorXd& p,
                                               const Eigen::VectorXd& q);

// Likelihood ratio p_i/q_i as an element of Q united with +infinity.
struct Ratio {
    bool infinite = false;
    Rational value;  // meaningful when finite

    friend bool operator==(const Ratio& a, const Ratio& b) {
        if (a.infinite != b.infinite) return false;
        return a.infinite || a.value == b.value;
    }
};

// Smallest dichotomy obtained by merging equal-ratio blocks, together with
// the block partition that produced it. Ratios are strictly decreasing; the
// permutation lists original indices in ratio-descending order (stable).
struct MinimalForm {
    RationalVector p_tilde;
    RationalVector q_tilde;
    std::vector<std::vector<int>> blocks;  // original indices, one set per block
    std::vector<Ratio> ratios;
    std::vector<int> permutation;

    int block_count() const { return static_cast<int>(blocks.size()); }
};

MinimalForm minimal_form(const ClassicalDichotomy& d);

// Column-stochastic rational matrix: entries >= 0, every column sums to 1;
// acts on probability column vectors.
struct StochasticMatrix {
    RationalMatrix entries;

    int rows() const { return static_cast<int>(entries.rows()); }
    int cols() const { return static_cast<int>(entries.cols()); }
};

RationalVector apply(const StochasticMatrix& M, const RationalVector& v);

// The compressing map T (m x n, block rows of ones) and its right inverse R
// (n x m, block-diagonal columns), with T p = p~, T q = q~, R p~ = p and
// R q~ = q all exact.
struct ChannelPairClassical {
    StochasticMatrix T;
    StochasticMatrix R;
};

ChannelPairClassical build_channels(const ClassicalDichotomy& d);

// Piecewise-linear concave curve through the cumulative (q, p) breakpoints
// after ratio-descending sort, with (0,0) prepended. x is non-decreasing;
// duplicated abscissas occur only at x = 0 (a vertical segment produced by
// the infinite-ratio block), where the curve takes the upper value.
struct LorenzCurve {
    std::vector<std::pair<Rational, Rational>> points;
};

LorenzCurve lorenz_curve(const ClassicalDichotomy& d);

// Removes breakpoints interior to straight segments.
LorenzCurve simplified(const LorenzCurve& curve);

// Exact curve value at x in [0, 1] (upper value at x = 0).
Rational lorenz_value(const LorenzCurve& curve, const Rational& x);

// True iff the first curve dominates the second everywhere: checked exactly
// at the union of breakpoint abscissas, which suffices by piecewise
// linearity.
bool relative_majorizes(const ClassicalDichotomy& d1, const ClassicalDichotomy& d2);

struct InterconvertResult {
    bool interconvertible = false;
    std::optional<StochasticMatrix> d1_to_d2;
    std::optional<StochasticMatrix> d2_to_d1;
};

// Equality of minimal forms decides interconvertibility; on success the
// composed channels R2 T1 and R1 T2 are returned, verified exactly.
InterconvertResult interconvertible_classical(const ClassicalDichotomy& d1,
                                              const ClassicalDichotomy& d2);

// Optional diagnostic flags for classical_renyi.
struct RenyiFlags {
    bool orthogonal = false;  // p and q have disjoint support
};

// Renyi divergence D_alpha of an exact dichotomy, evaluated in floating
// point. Conventions: alpha = 1 is the KL limit; for alpha in [0,1) the
// divergence is finite whenever p has mass on supp q (the extension without
// absolute continuity); for alpha > 1 the value is +infinity unless p << q.
// alpha < 0 is refused.
double classical_renyi(const ClassicalDichotomy& d, double alpha,
                       RenyiFlags* flags = nullptr);

// Power sum Q_alpha = sum p_i^alpha q_i^{1-alpha} over the joint support,
// under the pseudo-inverse convention (zero bases contribute nothing for any
// exponent). Valid for every real alpha; internal building block.
double q_alpha_pseudo(const ClassicalDichotomy& d, double alpha);

// Tensor product of dichotomies (row-major index pairing).
ClassicalDichotomy tensor_product(const ClassicalDichotomy& a, const ClassicalDichotomy& b);

}  // namespace dichotomy
