#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dichotomy/json_io.hpp"

using nlohmann::json;
namespace dch = dichotomy;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

const std::string kCli = DICHOTOMY_CLI_PATH;

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("dichotomy-cli-" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
    const fs::path path = scratch_dir() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

fs::path write_json(const std::string& name, const json& j) {
    return write_file(name, j.dump(2) + "\n");
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs the CLI through the shell; env assignments can be prefixed via `env`.
RunResult run_cli(const std::string& args, const std::string& env = "") {
    const fs::path errfile = scratch_dir() / "stderr.txt";
    std::string cmd = env.empty() ? "" : env + " ";
    cmd += kCli + " " + args + " 2>" + errfile.string();
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = read_file(errfile);
    return r;
}

json parse_out(const RunResult& r) {
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    return json::parse(r.out);
}

json parse_err(const RunResult& r) { return json::parse(r.err); }

// Six-outcome worked example; exact strings keep the parser on the exact
// path (entries must sum to 1 without normalization).
json worked_json() {
    return json{{"p", {"1/12", "1/2", "1/4", "1/12", "1/12", "0"}},
                {"q", {"0", "1/12", "1/12", "1/6", "1/6", "1/2"}}};
}

dch::ClassicalDichotomy worked_dichotomy() {
    return dch::dichotomy_from_json(worked_json());
}

json matrix_json(int dim, std::vector<std::vector<double>> re) {
    return json{{"dim", dim}, {"re", re}};
}

// Noncommuting qubit pair: symmetric tilted state against a diagonal Gibbs
// weight, the pair used in the monotonicity figure.
json tilted_pair_json(double s) {
    const double cs = std::cosh(s), ss = std::sinh(s), c1 = std::cosh(1.0);
    json rho = matrix_json(2, {{cs / (2 * cs), ss / (2 * cs)},
                               {ss / (2 * cs), cs / (2 * cs)}});
    json sigma = matrix_json(2, {{std::exp(1.0) / (2 * c1), 0.0},
                                 {0.0, std::exp(-1.0) / (2 * c1)}});
    return json{{"rho", rho}, {"sigma", sigma}};
}

}  // namespace

TEST_CASE("cli: help exits 0 and lists subcommands") {
    const RunResult r = run_cli("--help");
    CHECK(r.code == 0);
    for (const char* name : {"divergence", "minimal-form", "channels", "lorenz",
                             "check-convert", "decide-from-divergences",
                             "interconvertible", "simulate-classical", "cm-check",
                             "thermo"})
        CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("cli: minimal-form matches the library on the worked example") {
    const fs::path in = write_json("appb.json", worked_json());
    const json got = parse_out(run_cli("minimal-form " + in.string()));

    CHECK(got == dch::minimal_form_to_json(dch::minimal_form(worked_dichotomy())));
    CHECK(got.at("p_tilde") == json({"1/12", "1/2", "1/4", "1/6", "0"}));
    CHECK(got.at("q_tilde") == json({"0", "1/12", "1/12", "1/3", "1/2"}));
    CHECK(got.at("ratios") == json({"inf", "6", "3", "1/2", "0"}));
    CHECK(got.at("blocks") == json({{0}, {1}, {2}, {3, 4}, {5}}));
    CHECK(got.at("block_count") == 5);
}

TEST_CASE("cli: channels equals the library serialization and --output works") {
    const fs::path in = write_json("appb.json", worked_json());
    const json expected = dch::channels_to_json(dch::build_channels(worked_dichotomy()));

    const json got = parse_out(run_cli("channels " + in.string()));
    CHECK(got == expected);

    const fs::path outfile = scratch_dir() / "channels.json";
    const RunResult r = run_cli("channels " + in.string() + " --output " + outfile.string());
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    CHECK(json::parse(read_file(outfile)) == expected);
}

TEST_CASE("cli: lorenz csv bytes and json breakpoints") {
    const fs::path in = write_json("appb.json", worked_json());
    const dch::LorenzCurve curve = dch::lorenz_curve(worked_dichotomy());

    const RunResult csv = run_cli("lorenz " + in.string());
    CHECK(csv.code == 0);
    CHECK(csv.out == dch::lorenz_to_csv(curve));
    CHECK(csv.out.substr(0, 4) == "x,y\n");

    const json got = parse_out(run_cli("lorenz " + in.string() + " --format json"));
    CHECK(got == dch::lorenz_to_json(curve));
    REQUIRE(got.at("points").size() == 7);
    CHECK(got.at("points")[2] == json::array({"1/12", "7/12"}));

    const json simp =
        parse_out(run_cli("lorenz " + in.string() + " --format json --simplified"));
    CHECK(simp.at("points").size() == 6);
}

TEST_CASE("cli: divergence on the exact classical path") {
    const fs::path in =
        write_json("simple.json", json{{"p", {"1/2", "1/2"}}, {"q", {"3/4", "1/4"}}});
    const json arr = parse_out(
        run_cli("divergence " + in.string() + " --family classical --alpha 1 --alpha 2"));
    REQUIRE(arr.size() == 2);

    const double kl = 0.5 * std::log(2.0 / 3.0) + 0.5 * std::log(2.0);
    CHECK(arr[0].at("alpha") == 1.0);
    CHECK(arr[0].at("value").get<double>() == doctest::Approx(kl).epsilon(1e-15));
    CHECK(arr[0].at("limit_used") == "relative_entropy");
    CHECK(arr[1].at("limit_used").is_null());
    CHECK(arr[1].at("value").get<double>() ==
          doctest::Approx(std::log(1.0 / 3.0 + 1.0)).epsilon(1e-15));

    // infinities travel as strings, and show up as "inf" in csv too
    const fs::path ortho = write_json(
        "ortho.json", json{{"p", {"1/2", "1/2", "0"}}, {"q", {"0", "1/2", "1/2"}}});
    const json inf_arr = parse_out(
        run_cli("divergence " + ortho.string() + " --family classical --alpha 2"));
    CHECK(inf_arr[0].at("value") == "inf");
    const RunResult csv = run_cli("divergence " + ortho.string() +
                                  " --family classical --alpha 2 --format csv");
    CHECK(csv.out.find("2,inf,classical") != std::string::npos);
    CHECK(csv.out.substr(0, 45) == "alpha,value,family,dpi_valid,limit_used,flags");
}

TEST_CASE("cli: divergence sandwiched on identical quantum states is zero") {
    json pair = tilted_pair_json(0.4);
    pair["sigma"] = pair["rho"];
    const fs::path in = write_json("equal_pair.json", pair);
    const json arr =
        parse_out(run_cli("divergence " + in.string() + " --family sandwiched --alpha 1"));
    CHECK(std::abs(arr[0].at("value").get<double>()) < 1e-12);
    CHECK(arr[0].at("limit_used") == "relative_entropy");
}

TEST_CASE("cli: sweep output is deterministic and thread-count independent") {
    const fs::path in = write_json("tilted06.json", tilted_pair_json(0.6));
    const std::string args = "divergence " + in.string() +
                             " --family measured:4:42 --grid 0.7:2:6 --format csv";

    const RunResult a = run_cli(args, "DICHOTOMY_THREADS=1");
    const RunResult b = run_cli(args, "DICHOTOMY_THREADS=1");
    const RunResult c = run_cli(args, "DICHOTOMY_THREADS=4");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);

    // six rows ascending in alpha, plus header
    std::istringstream lines(a.out);
    std::string line;
    std::getline(lines, line);
    double prev = -1;
    int rows = 0;
    while (std::getline(lines, line)) {
        const double alpha = std::stod(line.substr(0, line.find(',')));
        CHECK(alpha > prev);
        prev = alpha;
        ++rows;
    }
    CHECK(rows == 6);
}

TEST_CASE("cli: --seed fills in only when the selector has no explicit seed") {
    const fs::path in = write_json("tilted05.json", tilted_pair_json(0.5));
    const std::string tail = " --alpha 1.3 --format csv";

    // measured --seed 123 is the same run as measured:8:123
    const RunResult flag =
        run_cli("divergence " + in.string() + " --family measured --seed 123" + tail);
    const RunResult inline_seed =
        run_cli("divergence " + in.string() + " --family measured:8:123" + tail);
    CHECK(flag.code == 0);
    CHECK(flag.out == inline_seed.out);

    // an explicit selector seed wins over --seed
    const RunResult both =
        run_cli("divergence " + in.string() + " --family measured:8:123 --seed 999" + tail);
    CHECK(both.out == inline_seed.out);
}

TEST_CASE("cli: check-convert reports one-way convertibility") {
    const fs::path a = write_json("appb.json", worked_json());
    const fs::path flat =
        write_json("flat.json", json{{"p", {"1/2", "1/2"}}, {"q", {"1/2", "1/2"}}});

    json got = parse_out(run_cli("check-convert " + a.string() + " " + flat.string()));
    CHECK(got.at("convertible_1_to_2") == true);
    CHECK(got.at("convertible_2_to_1") == false);
    CHECK(got.at("interconvertible") == false);

    got = parse_out(run_cli("check-convert " + a.string() + " " + a.string()));
    CHECK(got.at("interconvertible") == true);
}

TEST_CASE("cli: decide-from-divergences agrees with the exact decision") {
    const fs::path a = write_json("appb.json", worked_json());
    const fs::path b =
        write_json("simple.json", json{{"p", {"1/2", "1/2"}}, {"q", {"3/4", "1/4"}}});

    const json exact = parse_out(run_cli("check-convert " + a.string() + " " + b.string()));
    const json sampled =
        parse_out(run_cli("decide-from-divergences " + a.string() + " " + b.string()));
    CHECK(sampled == exact);

    const json self =
        parse_out(run_cli("decide-from-divergences " + a.string() + " " + a.string()));
    CHECK(self.at("interconvertible") == true);
}

TEST_CASE("cli: interconvertible on classical pairs emits exact channels") {
    const fs::path a = write_json("appb.json", worked_json());
    // relabeled copy with one block split differently; same minimal form
    const fs::path b = write_json(
        "appb_relabel.json", json{{"p", {"1/6", "0", "0", "1/4", "1/2", "1/12"}},
                                  {"q", {"1/3", "1/4", "1/4", "1/12", "1/12", "0"}}});

    const json got = parse_out(run_cli("interconvertible " + a.string() + " " + b.string()));
    CHECK(got.at("interconvertible") == true);
    REQUIRE(got.at("d1_to_d2").is_object());
    CHECK(got.at("d1_to_d2").at("rows") == 6);
    CHECK(got.at("d1_to_d2").at("cols") == 6);
    REQUIRE(got.at("d2_to_d1").is_object());

    const fs::path c =
        write_json("simple.json", json{{"p", {"1/2", "1/2"}}, {"q", {"3/4", "1/4"}}});
    const json no = parse_out(run_cli("interconvertible " + a.string() + " " + c.string()));
    CHECK(no.at("interconvertible") == false);
    CHECK(no.at("d1_to_d2").is_null());
    CHECK(no.at("d2_to_d1").is_null());
}

TEST_CASE("cli: interconvertible on pure quantum pairs") {
    const json plus = matrix_json(2, {{0.5, 0.5}, {0.5, 0.5}});
    const fs::path a = write_json(
        "pure_a.json",
        json{{"rho", matrix_json(2, {{1.0, 0.0}, {0.0, 0.0}})}, {"sigma", plus}});
    // the same overlap pattern after a bit flip
    const fs::path b = write_json(
        "pure_b.json",
        json{{"rho", matrix_json(2, {{0.0, 0.0}, {0.0, 1.0}})}, {"sigma", plus}});

    const json got = parse_out(run_cli("interconvertible " + a.string() + " " + b.string()));
    CHECK(got.at("interconvertible") == true);
    REQUIRE(got.at("channels").is_object());
    for (double r : got.at("channels").at("residuals").get<std::vector<double>>())
        CHECK(r <= 1e-8);

    // different overlap: |<0|psi>|^2 = 3/4 instead of 1/2
    const double c30 = std::cos(std::acos(-1.0) / 6), s30 = std::sin(std::acos(-1.0) / 6);
    const fs::path c = write_json(
        "pure_c.json",
        json{{"rho", matrix_json(2, {{1.0, 0.0}, {0.0, 0.0}})},
             {"sigma", matrix_json(2, {{c30 * c30, c30 * s30}, {c30 * s30, s30 * s30}})}});
    const json no = parse_out(run_cli("interconvertible " + a.string() + " " + c.string()));
    CHECK(no.at("interconvertible") == false);
    CHECK(no.at("channels").is_null());
}

TEST_CASE("cli: simulate-classical matches the library for both methods") {
    const fs::path in = write_json("tilted06.json", tilted_pair_json(0.6));
    const dch::QuantumDichotomy qd =
        dch::quantum_pair_from_json(tilted_pair_json(0.6));

    const json ns = parse_out(run_cli("simulate-classical " + in.string()));
    CHECK(ns == dch::dichotomy_to_json(dch::nussbaum_szkola(qd)));

    const json mx =
        parse_out(run_cli("simulate-classical " + in.string() + " --method maximal"));
    CHECK(mx == dch::dichotomy_to_json(dch::maximal_simulation(qd)));
    CHECK(ns != mx);
}

TEST_CASE("cli: cm-check clean classical report and csv layout") {
    const fs::path in =
        write_json("simple.json", json{{"p", {"1/2", "1/2"}}, {"q", {"3/4", "1/4"}}});

    const json rep = parse_out(run_cli("cm-check " + in.string() + " --format json"));
    CHECK(rep.at("family") == "sandwiched");
    CHECK(rep.at("max_order") == 4);
    CHECK(rep.at("first_violation").is_null());
    REQUIRE(rep.at("alpha_grid").size() == 16);
    for (const auto& row : rep.at("verdicts"))
        for (const auto& v : row) CHECK(v == "pass");

    const RunResult csv = run_cli("cm-check " + in.string() + " --format csv");
    CHECK(csv.code == 0);
    std::istringstream lines(csv.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "alpha,order_0,order_1,order_2,order_3,order_4");
    int rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    CHECK(rows == 16);
}

TEST_CASE("cli: cm-check finds the order-5 violation of the tilted pair") {
    const fs::path in = write_json("tilted03.json", tilted_pair_json(0.3));
    const json rep = parse_out(run_cli("cm-check " + in.string() +
                                       " --grid 0.05:4:80 --max-order 5 --format json"));
    REQUIRE(rep.at("first_violation").is_object());
    CHECK(rep.at("first_violation").at("order") == 5);
    CHECK(rep.at("first_violation").at("alpha").get<double>() ==
          doctest::Approx(0.15).epsilon(1e-9));
    CHECK(rep.at("first_violation").at("margin").get<double>() < -30.0);
}

TEST_CASE("cli: thermo free energy of the maximally mixed state") {
    const fs::path state =
        write_json("mixed.json", matrix_json(2, {{0.5, 0.0}, {0.0, 0.5}}));
    json h = matrix_json(2, {{1.0, 0.0}, {0.0, -1.0}});

    const fs::path h_flag = write_json("sigmaz.json", h);
    json arr = parse_out(run_cli("thermo " + state.string() + " " + h_flag.string() +
                                 " --beta 1 --family classical --alpha 1"));
    CHECK(arr[0].at("value").get<double>() ==
          doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-12));

    // beta from the hamiltonian file; beta = 0 gives the flat Gibbs state
    h["beta"] = 1.0;
    const fs::path h_file = write_json("sigmaz_beta.json", h);
    arr = parse_out(run_cli("thermo " + state.string() + " " + h_file.string() +
                            " --family classical --alpha 1"));
    CHECK(arr[0].at("value").get<double>() ==
          doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-12));

    arr = parse_out(run_cli("thermo " + state.string() + " " + h_flag.string() +
                            " --beta 0 --family classical --alpha 1"));
    CHECK(std::abs(arr[0].at("value").get<double>()) < 1e-14);

    // classical {p,q} state input rides on its p component
    const fs::path cls =
        write_json("simple.json", json{{"p", {"1/2", "1/2"}}, {"q", {"3/4", "1/4"}}});
    arr = parse_out(run_cli("thermo " + cls.string() + " " + h_flag.string() +
                            " --beta 1 --family classical --alpha 1"));
    CHECK(arr[0].at("value").get<double>() ==
          doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-12));
}

TEST_CASE("cli: domain errors exit 1 with a machine-readable code") {
    const fs::path in =
        write_json("simple.json", json{{"p", {"1/2", "1/2"}}, {"q", {"3/4", "1/4"}}});

    RunResult r = run_cli("divergence " + in.string() + " --family petz --alpha 3");
    CHECK(r.code == 1);
    CHECK(parse_err(r).at("error") == "AlphaOutOfRange");

    r = run_cli("divergence " + in.string() + " --family sandwiched --alpha 0.3");
    CHECK(r.code == 1);
    CHECK(parse_err(r).at("error") == "AlphaOutOfRange");

    r = run_cli("divergence " + in.string() + " --family classical --alpha -1");
    CHECK(r.code == 1);
    CHECK(parse_err(r).at("error") == "AlphaOutOfRange");

    r = run_cli("cm-check " + in.string() + " --max-order 9");
    CHECK(r.code == 1);
    CHECK(parse_err(r).at("error") == "OrderTooLarge");

    r = run_cli("cm-check " + in.string() + " --grid 0:4:5");
    CHECK(r.code == 1);
    CHECK(parse_err(r).at("error") == "InvalidGrid");
}

TEST_CASE("cli: io, parse, and usage errors exit 2") {
    const fs::path in =
        write_json("simple.json", json{{"p", {"1/2", "1/2"}}, {"q", {"3/4", "1/4"}}});
    const fs::path pair = write_json("tilted04.json", tilted_pair_json(0.4));

    RunResult r = run_cli("divergence " + (scratch_dir() / "missing.json").string() +
                          " --alpha 1");
    CHECK(r.code == 2);
    CHECK(parse_err(r).at("error") == "IoError");

    const fs::path junk = write_file("junk.json", "{not json");
    r = run_cli("minimal-form " + junk.string());
    CHECK(r.code == 2);
    CHECK(parse_err(r).at("error") == "ParseError");

    const fs::path stray =
        write_json("stray.json", json{{"foo", 1}});
    r = run_cli("minimal-form " + stray.string());
    CHECK(r.code == 2);
    CHECK(parse_err(r).at("error") == "ParseError");

    r = run_cli("divergence " + in.string());  // no alpha values
    CHECK(r.code == 2);
    CHECK(parse_err(r).at("error") == "ParseError");

    r = run_cli("divergence " + in.string() + " --alpha 1 --grid 1:2");
    CHECK(r.code == 2);
    CHECK(parse_err(r).at("error") == "ParseError");

    r = run_cli("bogus-subcommand");
    CHECK(r.code == 2);
    CHECK(parse_err(r).at("error") == "UsageError");

    r = run_cli("lorenz " + in.string() + " --format xml");
    CHECK(r.code == 2);
    CHECK(parse_err(r).at("error") == "UsageError");

    r = run_cli("divergence " + in.string() + " --alpha 1", "DICHOTOMY_THREADS=abc");
    CHECK(r.code == 2);
    CHECK(parse_err(r).at("error") == "ParseError");

    r = run_cli("interconvertible " + in.string() + " " + pair.string());
    CHECK(r.code == 2);
    CHECK(parse_err(r).at("error") == "ParseError");

    r = run_cli("simulate-classical " + in.string());
    CHECK(r.code == 2);
    CHECK(parse_err(r).at("error") == "ParseError");
}

TEST_CASE("cli: quantum support mismatch is reported, not fatal") {
    const fs::path in = write_json(
        "support.json", json{{"rho", matrix_json(2, {{0.5, 0.0}, {0.0, 0.5}})},
                             {"sigma", matrix_json(2, {{1.0, 0.0}, {0.0, 0.0}})}});
    const json arr =
        parse_out(run_cli("divergence " + in.string() + " --family sandwiched --alpha 2"));
    CHECK(arr[0].at("value") == "inf");
}
