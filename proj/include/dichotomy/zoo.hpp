#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dichotomy/qdichotomy.hpp"

namespace dichotomy {

enum class FamilyTag {
    ClassicalEmbedded,
    Petz,
    Sandwiched,
    Maximal,
    AlphaZ,
    LogEuclidean,
    Measured,
};

struct DivergenceFamily {
    FamilyTag tag = FamilyTag::Sandwiched;
    double z = 1.0;                  // AlphaZ only
    int restarts = 8;                // Measured only
    unsigned long long seed = 0;     // Measured only
};

// Parses "classical", "petz", "sandwiched", "maximal", "alpha-z:<z>",
// "log-euclidean", "measured[:<restarts>[:<seed>]]".
DivergenceFamily parse_family(const std::string& selector);
std::string family_name(const DivergenceFamily& family);

struct DivergenceValue {
    double value = 0.0;
    double alpha = 0.0;
    DivergenceFamily family;
    bool dpi_valid = true;           // alpha inside the family's cp-DPI range
    std::optional<std::string> limit_used;
    std::vector<std::string> flags;
};

// (alpha-1)^{-1} log tr[rho^alpha sigma^{1-alpha}], alpha in [0,2];
// alpha = 1 gives the relative entropy.
DivergenceValue petz(const QuantumDichotomy& d, double alpha);

// (alpha-1)^{-1} log tr[(sigma^{(1-alpha)/2alpha} rho
// sigma^{(1-alpha)/2alpha})^alpha], alpha >= 1/2; alpha = 1 gives the
// relative entropy; alpha = +infinity gives d_infinity.
DivergenceValue sandwiched(const QuantumDichotomy& d, double alpha);

// (alpha-1)^{-1} log tr[sigma (sigma^{-1/2} rho sigma^{-1/2})^alpha],
// alpha in [0,2]; alpha = 1 gives the Belavkin-Staszewski entropy.
DivergenceValue maximal(const QuantumDichotomy& d, double alpha);

// (alpha-1)^{-1} log tr[(sigma^{(1-alpha)/2z} rho^{alpha/z}
// sigma^{(1-alpha)/2z})^z], z > 0. z = 1 is petz, z = alpha is sandwiched.
DivergenceValue alpha_z(const QuantumDichotomy& d, double alpha, double z);

// (alpha-1)^{-1} log tr e^{alpha log rho + (1-alpha) log sigma} on the
// common support; DPI holds only on [0,1], values on (1,2] carry
// dpi_valid = false.
DivergenceValue log_euclidean(const QuantumDichotomy& d, double alpha);

// Best classical divergence over rank-1 projective measurements, found by
// seeded coordinate ascent; a certified lower bound (flag "lower_bound").
// Exact for commuting pairs. dim <= 4.
DivergenceValue measured(const QuantumDichotomy& d, double alpha,
                         const DivergenceFamily& cfg);

// tr[rho (log rho - log sigma)].
double umegaki(const QuantumDichotomy& d);
// tr[sigma T log T] with T = sigma^{-1/2} rho sigma^{-1/2}.
double bs_entropy(const QuantumDichotomy& d);

// Dispatch with the alpha = 1 limit column: relative entropy for
// petz/sandwiched/alpha-z/log-euclidean, Belavkin-Staszewski for maximal,
// measured relative entropy for measured.
DivergenceValue divergence(const QuantumDichotomy& d,
                           const DivergenceFamily& family, double alpha);

}  // namespace dichotomy
