#include "dichotomy/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dichotomy/error.hpp"

namespace dichotomy {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

// Extended reals: finite values travel as numbers, infinities and nan as
// strings (JSON has no literal for them).
json extended_to_json(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

json rational_vector_to_json(const RationalVector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i].str());
    return a;
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out.push_back(sep);
        out += parts[i];
    }
    return out;
}

}  // namespace

json rational_to_json(const Rational& r) { return r.str(); }

Rational rational_from_json(const json& j) {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_number_float()) return Rational::from_double(j.get<double>());
    throw Error("ParseError", "expected a rational (string, integer, or float)");
}

json dichotomy_to_json(const ClassicalDichotomy& d) {
    return json{{"p", rational_vector_to_json(d.p)},
                {"q", rational_vector_to_json(d.q)}};
}

ClassicalDichotomy dichotomy_from_json(const json& j) {
    if (!j.is_object() || !j.contains("p") || !j.contains("q"))
        throw Error("ParseError", "dichotomy JSON needs \"p\" and \"q\" arrays");
    const json& jp = j.at("p");
    const json& jq = j.at("q");
    if (!jp.is_array() || !jq.is_array() || jp.size() != jq.size() || jp.empty())
        throw Error("ParseError", "\"p\" and \"q\" must be equal-length arrays");
    bool any_float = false;
    for (const auto& e : jp) any_float = any_float || e.is_number_float();
    for (const auto& e : jq) any_float = any_float || e.is_number_float();

    const auto n = static_cast<Eigen::Index>(jp.size());
    RationalVector p(n), q(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p[i] = rational_from_json(jp[static_cast<size_t>(i)]);
        q[i] = rational_from_json(jq[static_cast<size_t>(i)]);
    }
    if (any_float) {
        // floats embed exactly, then each vector is normalized; tiny
        // negative roundoff is clamped to zero
        const Rational tol = Rational::from_double(1e-9);
        Rational sp(0), sq(0);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (p[i].sign() < 0) {
                if (-p[i] > tol) throw Error("InvalidDichotomy", "negative entry in p");
                p[i] = Rational(0);
            }
            if (q[i].sign() < 0) {
                if (-q[i] > tol) throw Error("InvalidDichotomy", "negative entry in q");
                q[i] = Rational(0);
            }
            sp = sp + p[i];
            sq = sq + q[i];
        }
        if (sp.is_zero() || sq.is_zero())
            throw Error("InvalidDichotomy", "p and q must have positive total mass");
        for (Eigen::Index i = 0; i < n; ++i) {
            p[i] = p[i] / sp;
            q[i] = q[i] / sq;
        }
    }
    return make_dichotomy(p, q);
}

json minimal_form_to_json(const MinimalForm& mf) {
    json ratios = json::array();
    for (const Ratio& r : mf.ratios)
        ratios.push_back(r.infinite ? std::string("inf") : r.value.str());
    return json{{"p_tilde", rational_vector_to_json(mf.p_tilde)},
                {"q_tilde", rational_vector_to_json(mf.q_tilde)},
                {"ratios", ratios},
                {"blocks", mf.blocks},
                {"permutation", mf.permutation},
                {"block_count", mf.block_count()}};
}

json stochastic_to_json(const StochasticMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m.entries(i, c).str());
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", rows}};
}

json channels_to_json(const ChannelPairClassical& ch) {
    return json{{"T", stochastic_to_json(ch.T)}, {"R", stochastic_to_json(ch.R)}};
}

json lorenz_to_json(const LorenzCurve& c) {
    json pts = json::array();
    for (const auto& pt : c.points)
        pts.push_back(json::array({pt.first.str(), pt.second.str()}));
    return json{{"points", pts}};
}

std::string lorenz_to_csv(const LorenzCurve& c) {
    std::string out = "x,y\n";
    for (const auto& pt : c.points) {
        out += format_double(pt.first.to_double());
        out.push_back(',');
        out += format_double(pt.second.to_double());
        out.push_back('\n');
    }
    return out;
}

json measure_to_json(const DiscreteMeasure& m) {
    return json{{"points", m.points},
                {"weights", m.weights},
                {"weight_at_infinity", m.weight_at_infinity}};
}

json samples_to_json(const DivergenceSamples& s) {
    return json{{"interval", json::array({s.a, s.b})},
                {"alphas", s.alphas},
                {"values", s.values}};
}

DivergenceSamples samples_from_json(const json& j) {
    if (!j.is_object() || !j.contains("interval") || !j.contains("alphas") ||
        !j.contains("values"))
        throw Error("ParseError",
                    "samples JSON needs \"interval\", \"alphas\", \"values\"");
    const json& iv = j.at("interval");
    if (!iv.is_array() || iv.size() != 2)
        throw Error("ParseError", "\"interval\" must be [a, b]");
    DivergenceSamples s;
    s.a = iv[0].get<double>();
    s.b = iv[1].get<double>();
    s.alphas = j.at("alphas").get<std::vector<double>>();
    s.values = j.at("values").get<std::vector<double>>();
    if (s.alphas.size() != s.values.size() || s.alphas.empty())
        throw Error("ParseError", "\"alphas\" and \"values\" must match and be nonempty");
    return s;
}

json reconstruction_to_json(const ReconstructedForm& r) {
    return json{{"form", minimal_form_to_json(r.form)},
                {"exact", r.exact},
                {"lambda", r.lambda},
                {"measure", measure_to_json(r.measure)}};
}

json decision_to_json(const ConversionDecision& d) {
    return json{{"convertible_1_to_2", d.convertible_1_to_2},
                {"convertible_2_to_1", d.convertible_2_to_1},
                {"interconvertible", d.interconvertible}};
}

json matrix_to_json(const Eigen::MatrixXcd& m) {
    const int n = static_cast<int>(m.rows());
    json re = json::array(), im = json::array();
    bool any_im = false;
    for (int i = 0; i < n; ++i) {
        json rrow = json::array(), irow = json::array();
        for (int c = 0; c < static_cast<int>(m.cols()); ++c) {
            rrow.push_back(m(i, c).real());
            irow.push_back(m(i, c).imag());
            any_im = any_im || m(i, c).imag() != 0.0;
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
    json out{{"dim", n}, {"re", re}};
    if (any_im) out["im"] = im;
    return out;
}

Eigen::MatrixXcd matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("re"))
        throw Error("ParseError", "matrix JSON needs \"dim\" and \"re\"");
    const int n = j.at("dim").get<int>();
    if (n <= 0) throw Error("ParseError", "\"dim\" must be positive");
    const json& re = j.at("re");
    const bool has_im = j.contains("im");
    if (!re.is_array() || static_cast<int>(re.size()) != n)
        throw Error("ParseError", "\"re\" must be a dim x dim array");
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
        const json& rrow = re[static_cast<size_t>(i)];
        if (!rrow.is_array() || static_cast<int>(rrow.size()) != n)
            throw Error("ParseError", "\"re\" must be a dim x dim array");
        for (int c = 0; c < n; ++c)
            m(i, c) = std::complex<double>(rrow[static_cast<size_t>(c)].get<double>(), 0.0);
    }
    if (has_im) {
        const json& im = j.at("im");
        if (!im.is_array() || static_cast<int>(im.size()) != n)
            throw Error("ParseError", "\"im\" must be a dim x dim array");
        for (int i = 0; i < n; ++i) {
            const json& irow = im[static_cast<size_t>(i)];
            if (!irow.is_array() || static_cast<int>(irow.size()) != n)
                throw Error("ParseError", "\"im\" must be a dim x dim array");
            for (int c = 0; c < n; ++c)
                m(i, c).imag(irow[static_cast<size_t>(c)].get<double>());
        }
    }
    return m;
}

DensityMatrix density_from_json(const json& j) {
    return make_density_matrix(matrix_from_json(j));
}

QuantumDichotomy quantum_pair_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rho") || !j.contains("sigma"))
        throw Error("ParseError", "quantum pair JSON needs \"rho\" and \"sigma\"");
    return make_quantum_dichotomy(density_from_json(j.at("rho")),
                                  density_from_json(j.at("sigma")));
}

json divergence_value_to_json(const DivergenceValue& v) {
    json out{{"family", family_name(v.family)},
             {"alpha", v.alpha},
             {"value", extended_to_json(v.value)},
             {"dpi_valid", v.dpi_valid},
             {"flags", v.flags}};
    out["limit_used"] = v.limit_used ? json(*v.limit_used) : json(nullptr);
    return out;
}

std::string divergence_values_to_csv(const std::vector<DivergenceValue>& vs) {
    std::string out = "alpha,value,family,dpi_valid,limit_used,flags\n";
    for (const DivergenceValue& v : vs) {
        out += format_double(v.alpha);
        out.push_back(',');
        out += format_double(v.value);
        out.push_back(',');
        out += family_name(v.family);
        out.push_back(',');
        out += v.dpi_valid ? "true" : "false";
        out.push_back(',');
        if (v.limit_used) out += *v.limit_used;
        out.push_back(',');
        out += join(v.flags, ';');
        out.push_back('\n');
    }
    return out;
}

json kraus_channels_to_json(const ChannelPair& ch) {
    json fwd = json::array(), bwd = json::array();
    for (const auto& k : ch.forward) fwd.push_back(matrix_to_json(k));
    for (const auto& k : ch.backward) bwd.push_back(matrix_to_json(k));
    return json{{"forward", fwd},
                {"backward", bwd},
                {"residuals", ch.residuals}};
}

json cm_report_to_json(const CMReport& r) {
    json verdicts = json::array();
    json margins = json::array();
    json errors = json::array();
    for (size_t n = 0; n < r.verdicts.size(); ++n) {
        json vrow = json::array(), mrow = json::array(), erow = json::array();
        for (size_t i = 0; i < r.verdicts[n].size(); ++i) {
            switch (r.verdicts[n][i]) {
                case Verdict::Pass: vrow.push_back("pass"); break;
                case Verdict::Fail: vrow.push_back("fail"); break;
                case Verdict::Inconclusive: vrow.push_back("inconclusive"); break;
            }
            mrow.push_back(extended_to_json(r.margins[n][i]));
            erow.push_back(extended_to_json(r.errors[n][i]));
        }
        verdicts.push_back(std::move(vrow));
        margins.push_back(std::move(mrow));
        errors.push_back(std::move(erow));
    }
    json out{{"family", family_name(r.family)},
             {"alpha_grid", r.alpha_grid},
             {"max_order", r.max_order},
             {"verdicts", verdicts},
             {"margins", margins},
             {"errors", errors}};
    if (r.first_violation) {
        out["first_violation"] = json{{"order", std::get<0>(*r.first_violation)},
                                      {"alpha", std::get<1>(*r.first_violation)},
                                      {"margin", std::get<2>(*r.first_violation)}};
    } else {
        out["first_violation"] = nullptr;
    }
    return out;
}

std::string cm_report_to_csv(const CMReport& r) {
    std::string out = "alpha";
    for (int n = 0; n <= r.max_order; ++n) {
        out += ",order_";
        out += std::to_string(n);
    }
    out.push_back('\n');
    for (size_t i = 0; i < r.alpha_grid.size(); ++i) {
        out += format_double(r.alpha_grid[i]);
        for (size_t n = 0; n < r.margins.size(); ++n) {
            out.push_back(',');
            out += format_double(r.margins[n][i]);
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace dichotomy
