#pragma once

#include <vector>

#include "dichotomy/classical.hpp"

namespace dichotomy {

// Weighted point masses on R united with {+infinity}. Finite atoms are kept
// sorted by location ascending; weights are positive and locations pairwise
// distinct.
struct DiscreteMeasure {
    std::vector<double> points;
    std::vector<double> weights;
    double weight_at_infinity = 0.0;

    double total_mass() const {
        double m = weight_at_infinity;
        for (double w : weights) m += w;
        return m;
    }
    int atom_count() const { return static_cast<int>(points.size()); }
};

// sum_j w_j e^{-alpha t_j}; the atom at +infinity contributes its weight at
// alpha = 0, nothing for alpha > 0, and makes the result +infinity for
// alpha < 0. Sets *overflow when a term leaves double range.
double laplace_transform(const DiscreteMeasure& m, double alpha,
                         bool* overflow = nullptr);

// Measure with atoms at t_j = -log(p~_j/q~_j) weighted by q~_j over the
// blocks with finite nonzero ratio, plus an atom at +infinity carrying the
// q-mass of the zero-ratio block. Total mass 1; its transform at alpha
// reproduces Q_alpha(p, q) for alpha in (0, 1).
DiscreteMeasure tilde_measure(const ClassicalDichotomy& d);
DiscreteMeasure tilde_measure(const MinimalForm& mf);

// Rényi divergence samples on an equispaced grid interior to (a, b).
struct DivergenceSamples {
    double a = 0.0;
    double b = 1.0;
    std::vector<double> alphas;
    std::vector<double> values;
};

// Equispaced grid alpha_k = a + (k+1)*delta, delta = (b-a)/(K+1), with
// K = 2*dim_bound + 4 points; values are D_alpha of d.
DivergenceSamples sample_divergences(const ClassicalDichotomy& d, double a,
                                     double b, int dim_bound);

// Prony recovery: given Q_k = sum_j c_j x_j^{alpha_k} on an equispaced alpha
// grid with K >= 2*max_atoms points, returns the measure with atoms
// (t_j = -log x_j, c_j). Atom count is the numerical rank of the K/2 x K/2
// Hankel matrix of the samples at rank_tol (relative to the largest singular
// value). Supported regime: <= 5 atoms with node separation factor >= 1.2.
DiscreteMeasure recover_exponential_sum(const std::vector<double>& alphas,
                                        const std::vector<double>& q_values,
                                        int max_atoms,
                                        double rank_tol = 5e-16);

// Minimal form rebuilt from divergence samples alone, plus recovery
// diagnostics. `exact` records whether every mass snapped to a small
// rational (denominator <= 1e6 within 1e-9); otherwise entries are exact
// embeddings of the recovered floats, normalized. `lambda` is the total
// p-mass of the finite nonzero-ratio blocks.
struct ReconstructedForm {
    MinimalForm form;
    bool exact = false;
    double lambda = 1.0;
    DiscreteMeasure measure;
};

ReconstructedForm reconstruct_minimal_form(const DivergenceSamples& s);

struct ConversionDecision {
    bool convertible_1_to_2 = false;
    bool convertible_2_to_1 = false;
    bool interconvertible = false;
};

// Reconstructs both minimal forms from samples and compares Lorenz curves in
// both directions: exactly when both recoveries snapped to rationals, and
// with a small noise margin otherwise so recovery error cannot flip ties.
ConversionDecision decide_conversion_from_divergences(const DivergenceSamples& s1,
                                                      const DivergenceSamples& s2);

}  // namespace dichotomy
