#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dichotomy/classical.hpp"
#include "dichotomy/cm.hpp"
#include "dichotomy/laplace.hpp"
#include "dichotomy/qdichotomy.hpp"
#include "dichotomy/zoo.hpp"

namespace dichotomy {

// Round-trip-safe float formatting (17 significant digits).
std::string format_double(double v);

// Rationals travel as "num/den" strings; integers and floats are accepted
// on input (floats embed exactly).
nlohmann::json rational_to_json(const Rational& r);
Rational rational_from_json(const nlohmann::json& j);

// {"p": [...], "q": [...]}. All-rational entries are taken exactly and must
// sum to 1; if any entry is a float the vectors are normalized by their
// exact sums instead.
nlohmann::json dichotomy_to_json(const ClassicalDichotomy& d);
ClassicalDichotomy dichotomy_from_json(const nlohmann::json& j);

nlohmann::json minimal_form_to_json(const MinimalForm& mf);
nlohmann::json stochastic_to_json(const StochasticMatrix& m);
nlohmann::json channels_to_json(const ChannelPairClassical& ch);
nlohmann::json lorenz_to_json(const LorenzCurve& c);
std::string lorenz_to_csv(const LorenzCurve& c);

nlohmann::json measure_to_json(const DiscreteMeasure& m);
nlohmann::json samples_to_json(const DivergenceSamples& s);
// {"interval": [a, b], "alphas": [...], "values": [...]}
DivergenceSamples samples_from_json(const nlohmann::json& j);
nlohmann::json reconstruction_to_json(const ReconstructedForm& r);
nlohmann::json decision_to_json(const ConversionDecision& d);

// {"dim": n, "re": [[...]], "im": [[...]]} with "im" optional.
nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j);
DensityMatrix density_from_json(const nlohmann::json& j);
// {"rho": <matrix>, "sigma": <matrix>}
QuantumDichotomy quantum_pair_from_json(const nlohmann::json& j);

nlohmann::json divergence_value_to_json(const DivergenceValue& v);
std::string divergence_values_to_csv(const std::vector<DivergenceValue>& vs);
nlohmann::json kraus_channels_to_json(const ChannelPair& ch);
nlohmann::json cm_report_to_json(const CMReport& r);
// Columns: alpha, order_0 .. order_n (the signed margins (-1)^n g^(n)).
std::string cm_report_to_csv(const CMReport& r);

}  // namespace dichotomy
