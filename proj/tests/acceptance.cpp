// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include "oracles.hpp"
#include "run.hpp"

#include "nle/kernels.hpp"
#include "nle/orlicz.hpp"
#include "nle/solver.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

namespace {

using namespace nle;

struct verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

verdict young_calculus() {
    const std::vector<young_function> catalog{young_function::from_spec("power:3"), young_function::from_spec("plog:2"),
                                              young_function::from_spec("exp")};
    double worst_inv = 0, worst_gap = 0, worst_eq = 0;
    for (const auto& y : catalog) {
        const auto c = y.conjugate();
        const auto cc = c.conjugate();
        for (int i = 0; i <= 400; ++i) {
            const double t = std::pow(10.0, -2 + 3.0 * i / 400);
            worst_inv = std::max(worst_inv, std::abs(cc.M(t) - y.M(t)) / (1 + y.M(t)));
        }
        oracle::rng gen{17};
        for (int n = 0; n < 10000; ++n) {
            const double t = gen.log_uniform(1e-2, 10);
            const double tau = gen.uniform(0, 2 * y.m(t));
            worst_gap = std::min(worst_gap, young_gap(y, c, t, tau));
            worst_eq = std::max(worst_eq, young_gap(y, c, t, y.m(t)) / (1 + y.M(t)));
        }
    }
    return {worst_inv <= 1e-6 && worst_gap >= -1e-12 && worst_eq <= 1e-8,
            fmt("involution %.1e, min gap %.1e, equality gap %.1e", worst_inv, worst_gap, worst_eq)};
}

verdict luxemburg() {
    const std::vector<young_function> catalog{young_function::from_spec("power:1.5"), young_function::from_spec("power:3"),
                                              young_function::from_spec("plog:2"), young_function::from_spec("exp")};
    oracle::rng gen{29};
    double ball = 0, homog = 0, atom = 0;
    for (int n = 0; n < 1000; ++n) {
        const auto& y = catalog[n % catalog.size()];
        const std::size_t size = static_cast<std::size_t>(gen.integer(1, 24));
        const discrete_measure_space space{gen.vector(size, 0.01, 2)};
        const double scale = gen.log_uniform(1e-3, 1e2);
        auto u = gen.vector(size, -scale, scale);
        const double norm = luxemburg_norm(space, u, y);
        std::vector<double> unit(u);
        for (double& v : unit)
            v /= norm;
        ball = std::max(ball, modular(space, unit, y) - 1);
        const double c = (gen.coin() ? -1 : 1) * gen.log_uniform(0.1, 10);
        for (double& v : u)
            v *= c;
        homog = std::max(homog, std::abs(luxemburg_norm(space, u, y) - std::abs(c) * norm) / (std::abs(c) * norm));

        const double w = gen.uniform(0.05, 3);
        const double value = (gen.coin() ? -1 : 1) * gen.log_uniform(1e-3, 1e2);
        const double exact = std::abs(value) / y.inverse(1 / w);
        const double got = luxemburg_norm(discrete_measure_space{{w}}, std::vector<double>{value}, y);
        atom = std::max(atom, std::abs(got - exact) / exact);
    }
    return {ball <= 1e-8 && homog <= 1e-10 && atom <= 1e-8,
            fmt("unit ball excess %.1e, homogeneity %.1e, single atom %.1e", ball, homog, atom)};
}

verdict quadrature() {
    const quad_config cfg{.cells_per_axis = 24};
    const auto basis = build_basis(0, 3, 5);
    const auto quad = build_pair_quadrature(basis, 0.5, cfg);
    const double exact = 3 * std::log(3.0) - 4 * std::log(2.0);
    const double rel = std::abs(quad.mass_in(0, 1, 2, 3) - exact) / exact;

    problem prob;
    prob.kern = catalog_kernel("plap:3");
    prob.src = catalog_source("power:3");
    std::vector<double> energies;
    std::vector<double> u(8);
    for (int j = 0; j < 8; ++j)
        u[j] = std::sin(0.7 * (j + 1)) + 0.3;
    for (int depth = 2; depth <= 7; ++depth) {
        prob.quad.grading_depth = depth;
        energies.push_back(energy_A(energy_context{prob, 8}, u));
    }
    std::string diffs;
    int decreasing = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < energies.size(); ++i) {
        const double d = std::abs(energies[i] - energies[i - 1]);
        diffs += fmt(" %.1e", d);
        if (d < prev)
            ++decreasing;
        else
            decreasing = -100;
        prev = d;
    }
    return {rel <= 1e-6 && decreasing >= 3, fmt("mass rel error %.1e; depth differences%s", rel, diffs.c_str())};
}

verdict gradients() {
    struct pairing {
        const char* kernel;
        const char* source;
    };
    const std::vector<double> steps{1e-2, 1e-3, 1e-4, 1e-5};
    bool ok = true;
    std::string detail;
    for (const auto [kname, sname] : {pairing{"plap:3", "power:3"}, pairing{"mlap:plog:2", "atan-power:2"}}) {
        problem prob;
        prob.kern = catalog_kernel(kname);
        prob.src = catalog_source(sname);
        const energy_context ctx{prob, 12};
        oracle::rng gen{5};
        const auto u = normalize(ctx, gen.vector(12, -1, 1)).unit;
        const auto v = gen.vector(12, -1, 1);
        for (const bool is_a : {true, false}) {
            const auto grad = is_a ? grad_A(ctx, u) : grad_G(ctx, u);
            const auto f = [&](std::span<const double> c) { return is_a ? energy_A(ctx, c) : energy_G(ctx, c); };
            const auto err = oracle::central_difference_errors(f, u, v, dot(grad, v), steps);
            const double slope = oracle::loglog_slope(steps, err);
            const double best = *std::min_element(err.begin(), err.end());
            ok = ok && std::abs(slope - 2) <= 0.2 && best <= 1e-5;
            detail += fmt("%s%s %s: slope %.2f min %.1e", detail.empty() ? "" : "; ", is_a ? "A" : "G", kname, slope,
                          best);
        }
    }
    return {ok, detail};
}

verdict linear_oracle_match() {
    const problem prob;
    const energy_context ctx{prob, 16};
    const auto seq = solve_sequence(ctx, 16, 4, solver_config{});
    const auto oracle = linear_oracle(ctx, 16);
    const Eigen::MatrixXd B = mass_matrix(ctx);
    double lam = 0, vec = 0;
    bool converged = seq.size() == 4;
    for (const auto& r : seq) {
        converged = converged && r.converged;
        lam = std::max(lam, std::abs(r.lambda - oracle[r.index - 1].lambda) / oracle[r.index - 1].lambda);
        vec = std::max(vec, b_distance(B, r.coeffs, oracle[r.index - 1].coeffs));
    }
    return {converged && lam <= 1e-3 && vec <= 1e-2,
            fmt("max relative lambda error %.1e, max B-distance %.1e", lam, vec)};
}

struct nonlinear_run {
    std::string name;
    problem prob;
    std::vector<eigenpair_result> seq;
    std::vector<double> coercivity;
};

std::vector<nonlinear_run>& nonlinear_runs() {
    static std::vector<nonlinear_run> runs = [] {
        std::vector<nonlinear_run> out;
        for (const auto& [k, s] : {std::pair{"plap:3", "power:3"}, std::pair{"mlap:plog:2", "power:2"}}) {
            nonlinear_run r;
            r.name = k;
            r.prob.kern = catalog_kernel(k);
            r.prob.src = catalog_source(s);
            const energy_context ctx{r.prob, 32};
            r.seq = solve_sequence(ctx, 32, 4, solver_config{});
            for (const auto& e : r.seq)
                r.coercivity.push_back(e.converged ? coercivity_modular(ctx, e.coeffs) : 0.0);
            out.push_back(std::move(r));
        }
        return out;
    }();
    return runs;
}

verdict nonlinear_surrogates() {
    bool ok = true;
    std::string detail;
    for (const auto& run : nonlinear_runs()) {
        const energy_context ctx{run.prob, 32};
        double a_err = 0, ratio_err = 0, bound_slack = std::numeric_limits<double>::infinity();
        bool ordered = true;
        int converged = 0;
        for (std::size_t i = 0; i < run.seq.size(); ++i) {
            const auto& r = run.seq[i];
            if (!r.converged)
                continue;
            ++converged;
            const double gu = source_pairing(ctx, r.coeffs);
            const double au = dot(grad_A(ctx, r.coeffs), r.coeffs);
            a_err = std::max(a_err, std::abs(energy_A(ctx, r.coeffs) - 1));
            ratio_err = std::max(ratio_err, std::abs(r.lambda * gu - au) / au);
            bound_slack = std::min(bound_slack, r.lambda - 1 / gu);
            if (i > 0)
                ordered = ordered && r.lambda >= run.seq[i - 1].lambda && r.g_value <= run.seq[i - 1].g_value;
        }
        const bool this_ok = converged == 4 && a_err <= 1e-8 && ratio_err <= 1e-8 && ordered && bound_slack >= -1e-8;
        ok = ok && this_ok;
        detail += fmt("%s%s: %d/4 converged, |A-1| %.1e, ratio %.1e, ordered %s, lambda - 1/int g(u)u >= %.2f",
                      detail.empty() ? "" : "; ", run.name.c_str(), converged, a_err, ratio_err,
                      ordered ? "yes" : "no", bound_slack);
    }
    return {ok, detail};
}

verdict galerkin_monotonicity() {
    const std::vector<int> ks{8, 16, 32};
    problem nonlinear;
    nonlinear.kern = catalog_kernel("plap:3");
    nonlinear.src = catalog_source("power:3");
    const auto nrep = k_study(nonlinear, solver_config{}, ks, 1);
    const auto lrep = k_study(problem{}, solver_config{}, ks, 1);
    std::string cs, ls;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        cs += fmt(" %.8f", nrep.runs[i].front().g_value);
        ls += fmt(" %.6f", lrep.runs[i].front().lambda);
    }
    const bool ok = nrep.c1_nondecreasing.value_or(false) && lrep.lambda1_nonincreasing.value_or(false) &&
                    lrep.max_oracle_deviation.value_or(1) <= 1e-3;
    return {ok, fmt("c_1,k (plap:3):%s; lambda_1,k (plap:2):%s; oracle deviation %.1e", cs.c_str(), ls.c_str(),
                    lrep.max_oracle_deviation.value_or(-1))};
}

verdict validators() {
    bool ok = true;
    std::string failed;
    for (const char* spec : {"plap:1.5", "plap:2", "plap:3", "plap:4", "mlap:power:1.5", "mlap:power:3", "mlap:plog:1",
                             "mlap:plog:2", "mlap:exp", "weighted-plap:2:1+x*x+y*y", "weighted-plap:3:2+sin(x+y)"}) {
        const auto rep = validate_conditions(catalog_kernel(spec), 100000, 3);
        for (const char* c : {"oddness", "sign", "growth", "monotonicity", "coercivity"})
            if (!rep.condition(c).passed) {
                ok = false;
                failed += fmt(" %s/%s", spec, c);
            }
    }
    const auto fixture = validate_conditions(catalog_kernel("expr:xi - xi^3"), 100000, 3);
    const bool fixture_fails = !fixture.condition("sign").passed && !fixture.condition("monotonicity").passed;
    return {ok && fixture_fails, fmt("11 catalog kernels on 1e5 samples%s; fixture xi - xi^3 %s",
                                     failed.empty() ? " all pass" : (": failed" + failed).c_str(),
                                     fixture_fails ? "fails sign and monotonicity" : "NOT rejected")};
}

verdict coercivity_bound() {
    double worst = 0;
    int count = 0;
    for (const auto& run : nonlinear_runs())
        for (std::size_t i = 0; i < run.seq.size(); ++i)
            if (run.seq[i].converged) {
                worst = std::max(worst, run.coercivity[i]);
                ++count;
            }
    return {count > 0 && worst <= 1 + 1e-6, fmt("max theta iint M(c D^s u / 2) over %d pairs: %.6f", count, worst)};
}

verdict determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "nle_acceptance_determinism";
    std::filesystem::create_directories(dir);
    const auto cfg = dir / "run.yaml";
    std::ofstream{cfg} << "mode: solve\nomega: [0, 1]\ns: 0.4\nbasis_k: 10\nkernel: plap:3\nsource: power:3\n"
                          "i_max: 3\nsolver:\n  rng_seed: 11\n";
    std::string bytes[2];
    for (int r = 0; r < 2; ++r) {
        app::run_options opt;
        opt.out_dir = dir / ("out" + std::to_string(r));
        opt.quiet = true;
        std::ostringstream log;
        if (app::run(cfg, opt, log) != 0)
            return {false, "run failed: " + log.str()};
        std::ifstream in{opt.out_dir / "results.json", std::ios::binary};
        std::ostringstream s;
        s << in.rdbuf();
        bytes[r] = s.str();
    }
    return {!bytes[0].empty() && bytes[0] == bytes[1], fmt("two runs, %zu bytes each, %s", bytes[0].size(),
                                                          bytes[0] == bytes[1] ? "identical" : "DIFFERENT")};
}

}

int main() {
    struct criterion {
        int id;
        const char* title;
        double budget_s;
        std::function<verdict()> check;
    };
    const std::vector<criterion> criteria{
        {1, "Young calculus", 5, young_calculus},
        {2, "Luxemburg norm", 5, luxemburg},
        {3, "pair quadrature", 30, quadrature},
        {4, "gradient correctness", 30, gradients},
        {5, "linear oracle equivalence", 120, linear_oracle_match},
        {6, "nonlinear eigenpair properties", 300, nonlinear_surrogates},
        {7, "Galerkin monotonicity", 300, galerkin_monotonicity},
        {8, "structure condition validators", 10, validators},
        {9, "coercivity modular bound", 300, coercivity_bound},
        {10, "determinism", 300, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string{"exception: "} + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = v.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s  %2d  %-32s %s (%.1f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.title, v.detail.c_str(), secs,
                    in_time ? "" : fmt(", over %.0f s budget", c.budget_s).c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
