#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dichotomy/json_io.hpp"

using nlohmann::json;
namespace dch = dichotomy;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dch::Error("IoError", "cannot open '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw dch::Error("ParseError", "cannot parse '" + path + "': " + e.what());
    }
}

void emit(const std::string& content, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(output_path, std::ios::binary);
    if (!out) throw dch::Error("IoError", "cannot open '" + output_path + "' for writing");
    out << content;
    if (!out) throw dch::Error("IoError", "write to '" + output_path + "' failed");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// A parsed input file: a classical dichotomy, a quantum pair, or a sample
// set, recognized by its keys.
struct Input {
    std::optional<dch::ClassicalDichotomy> classical;
    std::optional<dch::QuantumDichotomy> quantum;
    std::optional<dch::DivergenceSamples> samples;
};

Input load_input(const std::string& path) {
    const json j = read_json_file(path);
    Input in;
    if (j.is_object() && j.contains("p") && j.contains("q"))
        in.classical = dch::dichotomy_from_json(j);
    else if (j.is_object() && j.contains("rho") && j.contains("sigma"))
        in.quantum = dch::quantum_pair_from_json(j);
    else if (j.is_object() && j.contains("alphas") && j.contains("values"))
        in.samples = dch::samples_from_json(j);
    else
        throw dch::Error("ParseError",
                         "'" + path + "' matches no known schema (dichotomy "
                         "{p,q}, quantum pair {rho,sigma}, or samples "
                         "{interval,alphas,values})");
    return in;
}

dch::ClassicalDichotomy require_classical(const Input& in, const std::string& path) {
    if (!in.classical)
        throw dch::Error("ParseError", "'" + path + "' must hold a classical dichotomy {p,q}");
    return *in.classical;
}

// Diagonal embedding of an exact dichotomy as a commuting quantum pair.
dch::QuantumDichotomy embed_classical(const dch::ClassicalDichotomy& cd) {
    const int n = cd.size();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        rho(i, i) = cd.p[i].to_double();
        sigma(i, i) = cd.q[i].to_double();
    }
    return dch::make_quantum_dichotomy(dch::make_density_matrix(rho),
                                       dch::make_density_matrix(sigma));
}

int thread_cap() {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap <= 0) cap = 1;
    if (const char* env = std::getenv("DICHOTOMY_THREADS")) {
        try {
            cap = std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw dch::Error("ParseError", "DICHOTOMY_THREADS must be an integer");
        }
    }
    return cap;
}

// Evaluates fn over the alpha list on up to DICHOTOMY_THREADS threads;
// results come back in input order.
std::vector<dch::DivergenceValue> sweep(
    const std::vector<double>& alphas,
    const std::function<dch::DivergenceValue(double)>& fn) {
    const size_t n = alphas.size();
    std::vector<dch::DivergenceValue> results(n);
    const int threads = std::min<int>(thread_cap(), static_cast<int>(n));
    if (threads <= 1) {
        for (size_t i = 0; i < n; ++i) results[i] = fn(alphas[i]);
        return results;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                results[i] = fn(alphas[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

std::vector<double> build_alpha_list(std::vector<double> alphas, const std::string& grid) {
    if (!grid.empty()) {
        double a = 0, b = 0;
        int count = 0;
        if (std::sscanf(grid.c_str(), "%lf:%lf:%d", &a, &b, &count) != 3 || count < 1)
            throw dch::Error("ParseError", "--grid expects start:stop:count");
        if (count == 1) {
            alphas.push_back(a);
        } else {
            const double step = (b - a) / (count - 1);
            for (int k = 0; k < count; ++k) alphas.push_back(a + k * step);
        }
    }
    if (alphas.empty()) throw dch::Error("ParseError", "no alpha values given");
    std::sort(alphas.begin(), alphas.end());
    return alphas;
}

// Grid validation before dispatch, per family admissible range.
void validate_alphas(const dch::DivergenceFamily& fam, const std::vector<double>& alphas) {
    for (double a : alphas) {
        if (std::isnan(a)) throw dch::Error("AlphaOutOfRange", "alpha is nan");
        switch (fam.tag) {
            case dch::FamilyTag::ClassicalEmbedded:
                if (a < 0) throw dch::Error("AlphaOutOfRange", "classical requires alpha >= 0");
                break;
            case dch::FamilyTag::Petz:
                if (a < 0 || a > 2)
                    throw dch::Error("AlphaOutOfRange", "petz requires alpha in [0, 2]");
                break;
            case dch::FamilyTag::Sandwiched:
                if (!(a >= 0.5))
                    throw dch::Error("AlphaOutOfRange", "sandwiched requires alpha >= 1/2");
                break;
            case dch::FamilyTag::Maximal:
                if (a < 0 || a > 2)
                    throw dch::Error("AlphaOutOfRange", "maximal requires alpha in [0, 2]");
                break;
            case dch::FamilyTag::AlphaZ:
                if (a < 0) throw dch::Error("AlphaOutOfRange", "alpha-z requires alpha >= 0");
                break;
            case dch::FamilyTag::LogEuclidean:
                if (a < 0 || a > 2)
                    throw dch::Error("AlphaOutOfRange",
                                     "log-euclidean is computed on [0, 2]");
                break;
            case dch::FamilyTag::Measured:
                if (!(a > 0))
                    throw dch::Error("AlphaOutOfRange", "measured requires alpha > 0");
                break;
        }
    }
}

struct SweepOptions {
    std::string family_selector = "sandwiched";
    std::vector<double> alphas;
    std::string grid;
    std::string format = "json";
    std::string output;
    unsigned long long seed = 0;
    bool seed_given = false;
};

void add_sweep_options(CLI::App* cmd, SweepOptions& opt) {
    cmd->add_option("--family", opt.family_selector,
                    "Divergence family selector: classical, petz, sandwiched, "
                    "maximal, alpha-z:<z>, log-euclidean, "
                    "measured[:<restarts>[:<seed>]]")
        ->capture_default_str();
    cmd->add_option("--alpha", opt.alphas, "Alpha value (repeatable)");
    cmd->add_option("--grid", opt.grid, "Alpha grid start:stop:count");
    cmd->add_option("--format", opt.format, "Output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd->add_option("--output", opt.output, "Write output to this path instead of stdout");
    cmd->add_option("--seed", opt.seed,
                    "Seed for randomized paths (measured family)")
        ->each([&opt](const std::string&) { opt.seed_given = true; });
}

dch::DivergenceFamily resolve_family(const SweepOptions& opt) {
    dch::DivergenceFamily fam = dch::parse_family(opt.family_selector);
    const bool selector_has_seed =
        std::count(opt.family_selector.begin(), opt.family_selector.end(), ':') >= 2;
    if (fam.tag == dch::FamilyTag::Measured && opt.seed_given && !selector_has_seed)
        fam.seed = opt.seed;
    return fam;
}

void run_divergence_like(const Input& in, const std::string& path,
                         const SweepOptions& opt) {
    dch::DivergenceFamily fam = resolve_family(opt);
    const std::vector<double> alphas = build_alpha_list(opt.alphas, opt.grid);
    validate_alphas(fam, alphas);

    std::vector<dch::DivergenceValue> values;
    if (in.classical && fam.tag == dch::FamilyTag::ClassicalEmbedded) {
        // exact classical path, no embedding round trip
        const dch::ClassicalDichotomy cd = *in.classical;
        values = sweep(alphas, [&cd, &fam](double a) {
            dch::DivergenceValue v;
            v.value = dch::classical_renyi(cd, a);
            v.alpha = a;
            v.family = fam;
            v.dpi_valid = true;
            if (a == 1.0) v.limit_used = "relative_entropy";
            return v;
        });
    } else {
        dch::QuantumDichotomy qd =
            in.quantum ? *in.quantum : embed_classical(require_classical(in, path));
        values = sweep(alphas, [&qd, &fam](double a) { return dch::divergence(qd, fam, a); });
    }

    if (opt.format == "csv") {
        emit(dch::divergence_values_to_csv(values), opt.output);
    } else {
        json arr = json::array();
        for (const auto& v : values) arr.push_back(dch::divergence_value_to_json(v));
        emit(dump(arr), opt.output);
    }
}

dch::DivergenceSamples samples_from_input(const Input& in, const std::string& path) {
    if (in.samples) return *in.samples;
    if (in.classical)
        return dch::sample_divergences(*in.classical, 0.05, 0.95, in.classical->size());
    throw dch::Error("ParseError",
                     "'" + path + "' must hold divergence samples or a classical dichotomy");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classical and quantum dichotomy toolkit: convertibility, "
                 "interconverting channels, Renyi divergences, and "
                 "complete-monotonicity tests"};
    app.require_subcommand(1);

    // divergence
    auto* cmd_div = app.add_subcommand(
        "divergence", "Renyi divergence sweep over alpha for one dichotomy");
    SweepOptions div_opt;
    std::string div_path;
    cmd_div->add_option("input", div_path, "Dichotomy file ({p,q} or {rho,sigma})")
        ->required();
    add_sweep_options(cmd_div, div_opt);

    // minimal-form
    auto* cmd_mf = app.add_subcommand("minimal-form",
                                      "Koashi-Imoto minimal form of a classical dichotomy");
    std::string mf_path, mf_output;
    cmd_mf->add_option("input", mf_path, "Classical dichotomy file")->required();
    cmd_mf->add_option("--output", mf_output, "Output path");

    // channels
    auto* cmd_ch = app.add_subcommand(
        "channels", "Exact stochastic channels T (to minimal form) and R (back)");
    std::string ch_path, ch_output;
    cmd_ch->add_option("input", ch_path, "Classical dichotomy file")->required();
    cmd_ch->add_option("--output", ch_output, "Output path");

    // lorenz
    auto* cmd_lz = app.add_subcommand("lorenz", "Lorenz curve breakpoints");
    std::string lz_path, lz_output, lz_format = "csv";
    bool lz_simplified = false;
    cmd_lz->add_option("input", lz_path, "Classical dichotomy file")->required();
    cmd_lz->add_option("--format", lz_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd_lz->add_flag("--simplified", lz_simplified, "Drop collinear breakpoints");
    cmd_lz->add_option("--output", lz_output, "Output path");

    // check-convert
    auto* cmd_cc = app.add_subcommand(
        "check-convert", "Decide convertibility of two classical dichotomies by "
                         "Lorenz curve domination");
    std::string cc_a, cc_b, cc_output;
    cmd_cc->add_option("first", cc_a, "First dichotomy file")->required();
    cmd_cc->add_option("second", cc_b, "Second dichotomy file")->required();
    cmd_cc->add_option("--output", cc_output, "Output path");

    // decide-from-divergences
    auto* cmd_dd = app.add_subcommand(
        "decide-from-divergences",
        "Decide convertibility from Renyi divergence samples alone");
    std::string dd_a, dd_b, dd_output;
    cmd_dd->add_option("first", dd_a, "Samples or dichotomy file")->required();
    cmd_dd->add_option("second", dd_b, "Samples or dichotomy file")->required();
    cmd_dd->add_option("--output", dd_output, "Output path");

    // interconvertible
    auto* cmd_ic = app.add_subcommand(
        "interconvertible",
        "Exact interconversion test; classical pairs get exact channels, "
        "quantum pure-state pairs get Kraus channels");
    std::string ic_a, ic_b, ic_output;
    cmd_ic->add_option("first", ic_a, "Dichotomy file")->required();
    cmd_ic->add_option("second", ic_b, "Dichotomy file")->required();
    cmd_ic->add_option("--output", ic_output, "Output path");

    // simulate-classical
    auto* cmd_sc = app.add_subcommand(
        "simulate-classical",
        "Classical dichotomy simulating a quantum pair (Nussbaum-Szkola or "
        "maximal)");
    std::string sc_path, sc_output, sc_method = "ns";
    cmd_sc->add_option("input", sc_path, "Quantum pair file")->required();
    cmd_sc->add_option("--method", sc_method, "ns or maximal")
        ->check(CLI::IsMember({"ns", "maximal"}))
        ->capture_default_str();
    cmd_sc->add_option("--output", sc_output, "Output path");

    // cm-check
    auto* cmd_cm = app.add_subcommand(
        "cm-check", "Complete-monotonicity test of the shifted power sum g");
    SweepOptions cm_opt;
    cm_opt.grid = "0.25:4:16";
    std::string cm_path;
    int cm_max_order = 4;
    cmd_cm->add_option("input", cm_path, "Dichotomy file ({p,q} or {rho,sigma})")
        ->required();
    add_sweep_options(cmd_cm, cm_opt);
    cmd_cm->add_option("--max-order", cm_max_order, "Highest derivative order (<= 6)")
        ->capture_default_str();

    // thermo
    auto* cmd_th = app.add_subcommand(
        "thermo", "Generalized free energies: D_alpha(rho, gibbs(H, beta))");
    SweepOptions th_opt;
    std::string th_state, th_hamiltonian;
    double th_beta = 1.0;
    bool th_beta_given = false;
    cmd_th->add_option("state", th_state, "State file (density matrix or {p,q})")
        ->required();
    cmd_th->add_option("hamiltonian", th_hamiltonian,
                       "Hamiltonian file ({dim,re[,im][,beta]})")
        ->required();
    cmd_th->add_option("--beta", th_beta, "Inverse temperature (overrides file)")
        ->each([&th_beta_given](const std::string&) { th_beta_given = true; });
    add_sweep_options(cmd_th, th_opt);

    try {
        app.parse(argc, argv);

        if (cmd_div->parsed()) {
            run_divergence_like(load_input(div_path), div_path, div_opt);
        } else if (cmd_mf->parsed()) {
            const auto cd = require_classical(load_input(mf_path), mf_path);
            emit(dump(dch::minimal_form_to_json(dch::minimal_form(cd))), mf_output);
        } else if (cmd_ch->parsed()) {
            const auto cd = require_classical(load_input(ch_path), ch_path);
            emit(dump(dch::channels_to_json(dch::build_channels(cd))), ch_output);
        } else if (cmd_lz->parsed()) {
            const auto cd = require_classical(load_input(lz_path), lz_path);
            dch::LorenzCurve curve = dch::lorenz_curve(cd);
            if (lz_simplified) curve = dch::simplified(curve);
            if (lz_format == "csv")
                emit(dch::lorenz_to_csv(curve), lz_output);
            else
                emit(dump(dch::lorenz_to_json(curve)), lz_output);
        } else if (cmd_cc->parsed()) {
            const auto d1 = require_classical(load_input(cc_a), cc_a);
            const auto d2 = require_classical(load_input(cc_b), cc_b);
            dch::ConversionDecision dec;
            dec.convertible_1_to_2 = dch::relative_majorizes(d1, d2);
            dec.convertible_2_to_1 = dch::relative_majorizes(d2, d1);
            dec.interconvertible = dec.convertible_1_to_2 && dec.convertible_2_to_1;
            emit(dump(dch::decision_to_json(dec)), cc_output);
        } else if (cmd_dd->parsed()) {
            const auto s1 = samples_from_input(load_input(dd_a), dd_a);
            const auto s2 = samples_from_input(load_input(dd_b), dd_b);
            emit(dump(dch::decision_to_json(
                     dch::decide_conversion_from_divergences(s1, s2))),
                 dd_output);
        } else if (cmd_ic->parsed()) {
            const Input a = load_input(ic_a);
            const Input b = load_input(ic_b);
            if (a.classical && b.classical) {
                const dch::InterconvertResult res =
                    dch::interconvertible_classical(*a.classical, *b.classical);
                json out{{"interconvertible", res.interconvertible}};
                out["d1_to_d2"] =
                    res.d1_to_d2 ? dch::stochastic_to_json(*res.d1_to_d2) : json(nullptr);
                out["d2_to_d1"] =
                    res.d2_to_d1 ? dch::stochastic_to_json(*res.d2_to_d1) : json(nullptr);
                emit(dump(out), ic_output);
            } else if (a.quantum && b.quantum) {
                const auto channels = dch::pure_state_channels(*a.quantum, *b.quantum);
                json out{{"interconvertible", channels.has_value()}};
                out["channels"] =
                    channels ? dch::kraus_channels_to_json(*channels) : json(nullptr);
                emit(dump(out), ic_output);
            } else {
                throw dch::Error("ParseError",
                                 "interconvertible needs two classical or two "
                                 "quantum dichotomy files");
            }
        } else if (cmd_sc->parsed()) {
            const Input in = load_input(sc_path);
            if (!in.quantum)
                throw dch::Error("ParseError",
                                 "'" + sc_path + "' must hold a quantum pair {rho,sigma}");
            const dch::ClassicalDichotomy sim = sc_method == "ns"
                                                    ? dch::nussbaum_szkola(*in.quantum)
                                                    : dch::maximal_simulation(*in.quantum);
            emit(dump(dch::dichotomy_to_json(sim)), sc_output);
        } else if (cmd_cm->parsed()) {
            const Input in = load_input(cm_path);
            dch::DivergenceFamily fam = resolve_family(cm_opt);
            const std::vector<double> alphas = build_alpha_list(cm_opt.alphas, cm_opt.grid);
            dch::QuantumDichotomy qd = in.quantum
                                           ? *in.quantum
                                           : embed_classical(require_classical(in, cm_path));
            const dch::CMReport rep = dch::cm_check(qd, fam, alphas, cm_max_order);
            if (cm_opt.format == "csv")
                emit(dch::cm_report_to_csv(rep), cm_opt.output);
            else
                emit(dump(dch::cm_report_to_json(rep)), cm_opt.output);
        } else if (cmd_th->parsed()) {
            const json hj = read_json_file(th_hamiltonian);
            const Eigen::MatrixXcd h = dch::matrix_from_json(hj);
            double beta = th_beta;
            if (!th_beta_given && hj.contains("beta")) beta = hj.at("beta").get<double>();
            const dch::DensityMatrix gibbs = dch::gibbs_state(h, beta);

            const json sj = read_json_file(th_state);
            dch::DensityMatrix rho;
            if (sj.is_object() && sj.contains("p") && sj.contains("q")) {
                rho = embed_classical(dch::dichotomy_from_json(sj)).rho;
            } else if (sj.is_object() && sj.contains("rho")) {
                rho = dch::density_from_json(sj.at("rho"));
            } else {
                rho = dch::density_from_json(sj);
            }
            const dch::QuantumDichotomy qd = dch::make_quantum_dichotomy(rho, gibbs);
            dch::DivergenceFamily fam = resolve_family(th_opt);
            const std::vector<double> alphas = build_alpha_list(th_opt.alphas, th_opt.grid);
            validate_alphas(fam, alphas);
            const auto values =
                sweep(alphas, [&qd, &fam](double a) { return dch::divergence(qd, fam, a); });
            if (th_opt.format == "csv") {
                emit(dch::divergence_values_to_csv(values), th_opt.output);
            } else {
                json arr = json::array();
                for (const auto& v : values) arr.push_back(dch::divergence_value_to_json(v));
                emit(dump(arr), th_opt.output);
            }
        }
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const dch::Error& e) {
        std::cerr << json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
        return e.code() == "ParseError" || e.code() == "IoError" ? 2 : 1;
    } catch (const json::exception& e) {
        std::cerr << json{{"error", "ParseError"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
}
