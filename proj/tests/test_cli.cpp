#include "run.hpp"

#include "nle/errors.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nle;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "nle_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in{p, std::ios::binary};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_text(const fs::path& dir, const std::string& text, std::string* log_out = nullptr,
             std::optional<std::uint64_t> seed = {}) {
    const auto cfg = dir / "run.yaml";
    std::ofstream{cfg} << text;
    app::run_options opt;
    opt.out_dir = dir / "out";
    opt.quiet = true;
    opt.seed = seed;
    std::ostringstream log;
    const int code = app::run(cfg, opt, log);
    if (log_out)
        *log_out = log.str();
    return code;
}

std::string config_error_of(const std::string& text) {
    try {
        app::parse_config(text, "cfg.yaml");
    } catch (const config_error& e) {
        return e.what();
    }
    return "";
}

}

TEST_CASE("schema errors carry the line") {
    CHECK(config_error_of("mode: solve\ns: 1.5\n").find("cfg.yaml:2:") == 0);
    CHECK(config_error_of("mode: solve\ns: 0.5\nbogus: 1\n").find("cfg.yaml:3:") == 0);
    CHECK(config_error_of("mode: sprint\n").find("cfg.yaml:1:") == 0);
    CHECK(config_error_of("mode: solve\nbasis_k: 4\ni_max: 5\n").find("cfg.yaml:3:") == 0);
    CHECK(config_error_of("mode: solve\nkernel: plap:3\nyoung: power:2\n").find("cfg.yaml:3:") == 0);
    CHECK(config_error_of("mode: solve\nkernel: plap:0.5\n").find("cfg.yaml:2:") == 0);
    CHECK(config_error_of("mode: solve\nsolver:\n  backtrack: 2\n").find("cfg.yaml:3:") == 0);
    CHECK(config_error_of("mode: study\nbasis_k: 8\n") != "");
    CHECK(config_error_of("mode: study\nk_list: [8, 4]\n").find("cfg.yaml:2:") == 0);
    CHECK(config_error_of("mode: solve\nomega: [1, 0]\n").find("cfg.yaml:2:") == 0);
    CHECK(config_error_of("mode: solve\nquad:\n  tail_radius_factor: 0\n").find("cfg.yaml:3:") == 0);
    CHECK(config_error_of("mode: [unclosed\n") != "");
    CHECK(config_error_of("s: 0.5\n") != "");
}

TEST_CASE("valid configs parse") {
    const auto cfg = app::parse_config("mode: solve\nomega: [-1, 2]\ns: 0.3\nbasis_k: 10\nkernel: mlap:plog:2\n"
                                       "young: plog:2\nsource: atan-power:2\ni_max: 3\nquad:\n  grading_depth: 6\n"
                                       "solver:\n  rng_seed: 5\n");
    CHECK(cfg.alpha == -1);
    CHECK(cfg.beta == 2);
    CHECK(cfg.basis_k == 10);
    CHECK(cfg.i_max == 3);
    CHECK(cfg.quad.grading_depth == 6);
    CHECK(cfg.solver.rng_seed == 5);
    const auto prob = app::make_problem(cfg);
    CHECK(prob.kern.young.name() == "plog:2");
}

TEST_CASE("malformed s exits with the config code") {
    const auto dir = scratch("bad_s");
    std::string log;
    CHECK(run_text(dir, "mode: solve\ns: 1.5\n", &log) == app::exit_config);
    CHECK(log.find("run.yaml:2:") != std::string::npos);
}

TEST_CASE("minimal oracle run") {
    const auto dir = scratch("oracle");
    REQUIRE(run_text(dir, "mode: oracle\nomega: [0, 1]\ns: 0.5\nbasis_k: 16\nkernel: plap:2\nsource: power:2\n") ==
            app::exit_ok);
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "results.json"));
    const auto& pairs = j["eigenpairs"];
    REQUIRE(pairs.size() == 16);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK(pairs[i]["lambda"].get<double>() > 0);
        if (i > 0)
            CHECK(pairs[i]["lambda"].get<double>() > pairs[i - 1]["lambda"].get<double>());
    }
    for (const auto& d : j["solver_deltas"])
        CHECK(d["relative_lambda_error"].get<double>() < 1e-6);
    CHECK(j["quadrature"]["pair_count"].get<int>() > 0);
    CHECK(j["quadrature"]["tail_bound"].get<double>() > 0);
    CHECK(j.contains("config_echo"));
    CHECK(j.contains("timings"));
    CHECK(fs::exists(dir / "out" / "deltas.csv"));
}

TEST_CASE("solve run writes results and eigenfunctions") {
    const auto dir = scratch("solve");
    REQUIRE(run_text(dir, "mode: solve\nbasis_k: 8\nkernel: plap:3\nsource: power:3\ni_max: 2\n") == app::exit_ok);
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "results.json"));
    REQUIRE(j["eigenpairs"].size() == 2);
    for (const char* key : {"i", "lambda", "g_value", "a_value", "residual", "converged"})
        CHECK(j["eigenpairs"][0].contains(key));
    const auto csv = slurp(dir / "out" / "eigenfunctions.csv");
    CHECK(csv.rfind("x,u1,u2\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

TEST_CASE("results are byte identical across runs and follow the seed") {
    const std::string text = "mode: solve\nbasis_k: 8\nkernel: mlap:plog:2\nsource: power:2\ni_max: 2\n";
    const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    REQUIRE(run_text(a, text, nullptr, 3) == 0);
    REQUIRE(run_text(b, text, nullptr, 3) == 0);
    REQUIRE(run_text(c, text, nullptr, 4) == 0);
    const auto ra = slurp(a / "out" / "results.json");
    CHECK(ra == slurp(b / "out" / "results.json"));
    CHECK(ra != slurp(c / "out" / "results.json"));
    CHECK(nlohmann::json::parse(ra)["config_echo"]["solver"]["rng_seed"] == 3);
}

TEST_CASE("validate mode reports the fixture failure as data") {
    const auto dir = scratch("validate");
    REQUIRE(run_text(dir, "mode: validate\nkernel: \"expr:xi - xi^3\"\nvalidation:\n  samples: 2000\n") == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "validation.json"));
    CHECK_FALSE(j["kernel"]["all_passed"].get<bool>());
    bool sign_failed = false;
    for (const auto& c : j["kernel"]["conditions"])
        if (c["name"] == "sign")
            sign_failed = !c["passed"].get<bool>();
    CHECK(sign_failed);
}

TEST_CASE("study mode writes the convergence table") {
    const auto dir = scratch("study");
    REQUIRE(run_text(dir, "mode: study\nk_list: [4, 8]\nkernel: plap:2\nsource: power:2\n") == 0);
    const auto csv = slurp(dir / "out" / "study.csv");
    CHECK(csv.rfind("k,i,lambda,g_value,a_value,residual,converged,oracle_lambda\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "results.json"));
    CHECK(j["verdicts"]["lambda1_nonincreasing"].get<bool>());
}

TEST_CASE("nonconvergence exits with its code and still writes diagnostics") {
    const auto dir = scratch("nonconv");
    CHECK(run_text(dir, "mode: solve\nbasis_k: 10\ni_max: 2\nsolver:\n  max_iter: 1\n  polish_iter: 0\n"
                        "  n_restarts: 1\n") == app::exit_nonconvergence);
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "results.json"));
    CHECK_FALSE(j["eigenpairs"][0]["converged"].get<bool>());
}

TEST_CASE("assembly failure exits with its code") {
    // the weight is positive on the validation box but undefined far out in the truncated exterior
    const auto dir = scratch("assembly");
    CHECK(run_text(dir, "mode: oracle\nbasis_k: 6\nkernel: \"weighted-plap:2:1 + pow(4 - x, 0.5)\"\nsource: power:2\n") ==
          app::exit_assembly);
}
