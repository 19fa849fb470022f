#pragma once

#include <functional>
#include <optional>
#include <tuple>
#include <vector>

#include "dichotomy/zoo.hpp"

namespace dichotomy {

struct DerivativeEstimate {
    int order = 0;
    double alpha = 0.0;
    double value = 0.0;
    double step = 0.0;
    double error_estimate = 0.0;
};

enum class Verdict { Pass, Fail, Inconclusive };

struct CMReport {
    DivergenceFamily family;
    std::vector<double> alpha_grid;
    int max_order = 0;
    // Indexed [order][grid index], orders 0..max_order. margin is
    // (-1)^n d^n g / d alpha^n; fail requires margin < -10 * error.
    std::vector<std::vector<Verdict>> verdicts;
    std::vector<std::vector<double>> margins;
    std::vector<std::vector<double>> errors;
    std::optional<std::tuple<int, double, double>> first_violation;
};

// The exponential shift that normalizes the family's power sum: the
// family's own alpha -> infinity divergence rate. For the sandwiched,
// maximal, and alpha-z families this is d_infinity; for the Petz family it
// is the top log-ratio of the Nussbaum-Szkola data (the Petz power sum is
// an exponential sum in those ratios, and only its own top rate makes the
// shifted sum bounded).
double g_shift(const QuantumDichotomy& d, const DivergenceFamily& family);

// g(alpha) = e^{-alpha * shift} * Q_alpha(family), as a plain function of
// alpha > 0. For the sandwiched, Petz, maximal, and classical families the
// trace formula is evaluated on all alpha > 0, past the ranges where the
// zoo refuses (g is tested as a function; no divergence interpretation is
// implied out of range).
std::function<double(double)> g_evaluator(const QuantumDichotomy& d,
                                          const DivergenceFamily& family);
double g_function(const QuantumDichotomy& d, const DivergenceFamily& family,
                  double alpha);

// Central finite differences of order n with one Richardson step (levels h
// and h/2); error_estimate is the distance between the extrapolated and the
// fine-step values. h = 0 picks 1e-2 * max(1, alpha), shrunk to keep the
// stencil inside alpha > 0.
DerivativeEstimate nth_derivative(const std::function<double(double)>& f,
                                  double alpha, int n, double h = 0.0);

// Tests (-1)^n g^(n)(alpha) >= 0 for n = 0..max_order over the grid.
// A fail requires the margin to be below -10x the noise estimate;
// non-finite estimates are Inconclusive.
CMReport cm_check(const QuantumDichotomy& d, const DivergenceFamily& family,
                  const std::vector<double>& alpha_grid, int max_order);

// Exact n-th derivative of the shifted Petz power sum
// sum_ij w_ij e^{-alpha tau_ij} via the Nussbaum-Szkola data; oracle for
// nth_derivative.
double petz_cm_analytic(const QuantumDichotomy& d, double alpha, int n);

// Checks prod_j (-1)^{n_j} f^(n_j)(x) >= prod_j (-1)^{m_j} f^(m_j)(x)
// minus the propagated noise margin. n_vec must majorize m_vec (equal sums,
// dominating partial sums); entries <= 4.
bool schur_product_check(const std::function<double(double)>& f, double x,
                         const std::vector<int>& n_vec,
                         const std::vector<int>& m_vec);

}  // namespace dichotomy
