#include "run.hpp"

#include "nle/errors.hpp"
#include "nle/numeric.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace nle::app {

using json = nlohmann::ordered_json;

namespace {

class schema {
public:
    explicit schema(std::string origin)
        : origin{std::move(origin)} {}

    [[noreturn]] void fail(const YAML::Mark& mark, const std::string& msg) const {
        if (mark.is_null())
            throw config_error{origin + ": " + msg};
        throw config_error{origin + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1) +
                           ": " + msg};
    }

    void only(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) const {
        if (!map.IsMap())
            fail(map.Mark(), where + " must be a mapping");
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.contains(key))
                fail(kv.first.Mark(), "unknown key '" + key + "' in " + where);
        }
    }

    template <class T>
    T get(const YAML::Node& node, const std::string& key, const char* expected) const {
        if (!node.IsScalar())
            fail(node.Mark(), "'" + key + "' must be " + expected);
        try {
            return node.as<T>();
        } catch (const YAML::BadConversion&) {
            fail(node.Mark(), "'" + key + "' must be " + expected + ", got '" + node.Scalar() + "'");
        }
    }

    double real(const YAML::Node& node, const std::string& key) const {
        const auto v = get<double>(node, key, "a number");
        if (!std::isfinite(v))
            fail(node.Mark(), "'" + key + "' must be finite");
        return v;
    }

    int count(const YAML::Node& node, const std::string& key, const int min) const {
        const auto v = get<long long>(node, key, "an integer");
        if (v < min || v > 1000000)
            fail(node.Mark(), "'" + key + "' must be an integer >= " + std::to_string(min));
        return static_cast<int>(v);
    }

    std::string origin;
};

run_mode parse_mode(const schema& sc, const YAML::Node& node) {
    const auto m = sc.get<std::string>(node, "mode", "a string");
    if (m == "solve")
        return run_mode::solve;
    if (m == "study")
        return run_mode::study;
    if (m == "oracle")
        return run_mode::oracle;
    if (m == "validate")
        return run_mode::validate;
    sc.fail(node.Mark(), "mode must be one of solve, study, oracle, validate; got '" + m + "'");
}

const char* mode_name(const run_mode m) {
    switch (m) {
    case run_mode::solve: return "solve";
    case run_mode::study: return "study";
    case run_mode::oracle: return "oracle";
    case run_mode::validate: return "validate";
    }
    return "?";
}

void parse_quad(const schema& sc, const YAML::Node& node, quad_config& q) {
    sc.only(node, {"cells_per_axis", "grading_depth", "gauss_order", "tail_radius_factor", "tail_panels", "admissibility"},
            "quad");
    if (node["cells_per_axis"])
        q.cells_per_axis = sc.count(node["cells_per_axis"], "cells_per_axis", 2);
    if (node["grading_depth"])
        q.grading_depth = sc.count(node["grading_depth"], "grading_depth", 0);
    if (node["gauss_order"])
        q.gauss_order = sc.count(node["gauss_order"], "gauss_order", 1);
    if (node["tail_radius_factor"])
        q.tail_radius_factor = sc.real(node["tail_radius_factor"], "tail_radius_factor");
    if (node["tail_panels"])
        q.tail_panels = sc.count(node["tail_panels"], "tail_panels", 1);
    if (node["admissibility"])
        q.admissibility = sc.real(node["admissibility"], "admissibility");
}

void parse_solver(const schema& sc, const YAML::Node& node, solver_config& s) {
    sc.only(node,
            {"max_iter", "step0", "backtrack", "armijo", "grad_tol", "ascent_tol", "polish_iter", "n_restarts",
             "rng_seed", "deflation_penalty", "precondition"},
            "solver");
    if (node["max_iter"])
        s.max_iter = sc.count(node["max_iter"], "max_iter", 1);
    if (node["step0"])
        s.step0 = sc.real(node["step0"], "step0");
    if (node["backtrack"])
        s.backtrack = sc.real(node["backtrack"], "backtrack");
    if (node["armijo"])
        s.armijo = sc.real(node["armijo"], "armijo");
    if (node["grad_tol"])
        s.grad_tol = sc.real(node["grad_tol"], "grad_tol");
    if (node["ascent_tol"])
        s.ascent_tol = sc.real(node["ascent_tol"], "ascent_tol");
    if (node["polish_iter"])
        s.polish_iter = sc.count(node["polish_iter"], "polish_iter", 0);
    if (node["n_restarts"])
        s.n_restarts = sc.count(node["n_restarts"], "n_restarts", 1);
    if (node["rng_seed"])
        s.rng_seed = sc.get<std::uint64_t>(node["rng_seed"], "rng_seed", "a non-negative integer");
    if (node["deflation_penalty"])
        s.deflation_penalty = sc.real(node["deflation_penalty"], "deflation_penalty");
    if (node["precondition"])
        s.precondition = sc.get<bool>(node["precondition"], "precondition", "true or false");
    try {
        validate(s);
    } catch (const config_error& e) {
        sc.fail(node.Mark(), e.what());
    }
}

void parse_constants(const schema& sc, const YAML::Node& node, kernel_options& opt) {
    sc.only(node, {"theta", "coercivity_c", "growth_b", "growth_c", "growth_d"}, "kernel_constants");
    coercivity_constants co;
    growth_constants gr;
    if (node["theta"])
        co.theta = sc.real(node["theta"], "theta");
    if (node["coercivity_c"])
        co.c = sc.real(node["coercivity_c"], "coercivity_c");
    if (node["growth_b"])
        gr.b = sc.real(node["growth_b"], "growth_b");
    if (node["growth_c"])
        gr.c = sc.real(node["growth_c"], "growth_c");
    if (node["growth_d"]) {
        const double d = sc.real(node["growth_d"], "growth_d");
        gr.d = [d](double, double) { return d; };
    }
    if (co.theta <= 0 || co.c <= 0 || gr.b <= 0 || gr.c <= 0)
        sc.fail(node.Mark(), "kernel constants must be positive");
    opt.coercivity = co;
    opt.growth = gr;
}

std::vector<int> parse_k_list(const schema& sc, const YAML::Node& node) {
    if (!node.IsSequence() || node.size() == 0)
        sc.fail(node.Mark(), "'k_list' must be a non-empty list of integers");
    std::vector<int> out;
    for (const auto& item : node) {
        const int k = sc.count(item, "k_list", 1);
        if (!out.empty() && k <= out.back())
            sc.fail(item.Mark(), "'k_list' must be strictly increasing");
        out.push_back(k);
    }
    return out;
}

}

run_config parse_config(const std::string& text, const std::string& origin) {
    const schema sc{origin};
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        sc.fail(e.mark, e.msg);
    }
    if (!root.IsMap())
        sc.fail(root.Mark(), "config must be a mapping of keys to values");
    sc.only(root,
            {"mode", "omega", "s", "basis_k", "k_list", "kernel", "source", "young", "i_max", "quad", "solver",
             "kernel_constants", "validation"},
            "config");

    run_config cfg;
    if (!root["mode"])
        sc.fail(root.Mark(), "missing required key 'mode'");
    cfg.mode = parse_mode(sc, root["mode"]);

    if (const auto om = root["omega"]) {
        if (!om.IsSequence() || om.size() != 2)
            sc.fail(om.Mark(), "'omega' must be a list [alpha, beta]");
        cfg.alpha = sc.real(om[0], "omega");
        cfg.beta = sc.real(om[1], "omega");
        if (!(cfg.alpha < cfg.beta))
            sc.fail(om.Mark(), "'omega' needs alpha < beta");
    }
    if (const auto s = root["s"]) {
        cfg.s = sc.real(s, "s");
        if (!(cfg.s > 0 && cfg.s < 1))
            sc.fail(s.Mark(), "'s' must lie strictly inside (0, 1), got " + s.Scalar());
    }
    if (root["basis_k"])
        cfg.basis_k = sc.count(root["basis_k"], "basis_k", 1);
    if (root["k_list"])
        cfg.k_list = parse_k_list(sc, root["k_list"]);
    if (cfg.mode == run_mode::study && cfg.k_list.empty())
        sc.fail(root.Mark(), "mode 'study' needs 'k_list'");
    if (root["i_max"])
        cfg.i_max = sc.count(root["i_max"], "i_max", 1);
    else if (cfg.mode == run_mode::oracle)
        cfg.i_max = std::min(4, cfg.basis_k);
    const int k_min = cfg.mode == run_mode::study ? cfg.k_list.front() : cfg.basis_k;
    if (cfg.i_max > k_min)
        sc.fail(root["i_max"].Mark(), "'i_max' must not exceed the basis size " + std::to_string(k_min));

    if (root["kernel"])
        cfg.kernel = sc.get<std::string>(root["kernel"], "kernel", "a kernel spec string");
    if (root["source"])
        cfg.source = sc.get<std::string>(root["source"], "source", "a source spec string");
    if (root["young"])
        cfg.young = sc.get<std::string>(root["young"], "young", "a Young function spec string");
    if (root["quad"])
        parse_quad(sc, root["quad"], cfg.quad);
    if (root["solver"])
        parse_solver(sc, root["solver"], cfg.solver);
    if (root["kernel_constants"])
        parse_constants(sc, root["kernel_constants"], cfg.constants);
    if (const auto v = root["validation"]) {
        sc.only(v, {"samples", "box"}, "validation");
        if (v["samples"])
            cfg.validation_samples = static_cast<std::size_t>(sc.count(v["samples"], "samples", 1));
        if (const auto box = v["box"]) {
            if (!box.IsSequence() || box.size() != 2)
                sc.fail(box.Mark(), "'box' must be a list [lo, hi]");
            cfg.constants.box_lo = sc.real(box[0], "box");
            cfg.constants.box_hi = sc.real(box[1], "box");
            if (!(cfg.constants.box_lo < cfg.constants.box_hi))
                sc.fail(box.Mark(), "'box' needs lo < hi");
        }
    }

    // resolve the catalog now so that bad specs point at their line
    try {
        if (cfg.young)
            cfg.constants.young = young_function::from_spec(*cfg.young);
    } catch (const error& e) {
        sc.fail(root["young"].Mark(), e.what());
    }
    kernel kern;
    try {
        kern = catalog_kernel(cfg.kernel, cfg.constants);
    } catch (const error& e) {
        sc.fail(root["kernel"] ? root["kernel"].Mark() : root.Mark(), e.what());
    }
    if (cfg.young && kern.young.name() != cfg.constants.young->name())
        sc.fail(root["young"].Mark(), "young '" + *cfg.young + "' does not match the kernel's Young function '" +
                                          kern.young.name() + "'");
    try {
        (void)catalog_source(cfg.source);
    } catch (const error& e) {
        sc.fail(root["source"] ? root["source"].Mark() : root.Mark(), e.what());
    }
    try {
        (void)build_pair_quadrature(build_basis(cfg.alpha, cfg.beta, 1), cfg.s, cfg.quad);
    } catch (const config_error& e) {
        sc.fail(root["quad"] ? root["quad"].Mark() : root.Mark(), e.what());
    }
    return cfg;
}

run_config load_config(const std::filesystem::path& path) {
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw config_error{path.string() + ": cannot read config file"};
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

problem make_problem(const run_config& cfg) {
    problem p;
    p.alpha = cfg.alpha;
    p.beta = cfg.beta;
    p.s = cfg.s;
    p.kern = catalog_kernel(cfg.kernel, cfg.constants);
    p.src = catalog_source(cfg.source);
    p.quad = cfg.quad;
    return p;
}

namespace {

std::string number(const double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

json finite_or_null(const double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json echo(const run_config& cfg, const std::uint64_t seed) {
    json j;
    j["mode"] = mode_name(cfg.mode);
    j["omega"] = {cfg.alpha, cfg.beta};
    j["s"] = cfg.s;
    if (cfg.mode == run_mode::study)
        j["k_list"] = cfg.k_list;
    else
        j["basis_k"] = cfg.basis_k;
    j["kernel"] = cfg.kernel;
    j["source"] = cfg.source;
    j["young"] = catalog_kernel(cfg.kernel, cfg.constants).young.name();
    j["i_max"] = cfg.i_max;
    j["quad"] = {{"cells_per_axis", cfg.quad.cells_per_axis},
                 {"grading_depth", cfg.quad.grading_depth},
                 {"gauss_order", cfg.quad.gauss_order},
                 {"tail_radius_factor", cfg.quad.tail_radius_factor},
                 {"tail_panels", cfg.quad.tail_panels},
                 {"admissibility", cfg.quad.admissibility}};
    const solver_config& s = cfg.solver;
    j["solver"] = {{"max_iter", s.max_iter},       {"step0", s.step0},
                   {"backtrack", s.backtrack},     {"armijo", s.armijo},
                   {"grad_tol", s.grad_tol},       {"ascent_tol", s.ascent_tol},
                   {"polish_iter", s.polish_iter}, {"n_restarts", s.n_restarts},
                   {"rng_seed", seed},             {"deflation_penalty", s.deflation_penalty},
                   {"precondition", s.precondition}};
    if (cfg.constants.coercivity)
        j["kernel_constants"] = {{"theta", cfg.constants.coercivity->theta},
                                 {"coercivity_c", cfg.constants.coercivity->c},
                                 {"growth_b", cfg.constants.growth->b},
                                 {"growth_c", cfg.constants.growth->c}};
    if (cfg.mode == run_mode::validate)
        j["validation"] = {{"samples", cfg.validation_samples},
                           {"box", {cfg.constants.box_lo, cfg.constants.box_hi}}};
    return j;
}

json pair_json(const energy_context& ctx, const eigenpair_result& r) {
    json j;
    j["i"] = r.index;
    j["lambda"] = r.lambda;
    j["g_value"] = r.g_value;
    j["a_value"] = r.a_value;
    j["residual"] = r.residual;
    j["converged"] = r.converged;
    j["candidate"] = r.candidate;
    j["cluster"] = r.cluster;
    j["order_violation"] = r.order_violation;
    j["iterations"] = r.iterations;
    j["restart"] = r.restart;
    j["monotone_certificate"] = finite_or_null(r.monotone_certificate);
    j["source_pairing"] = source_pairing(ctx, r.coeffs);
    j["coercivity_modular"] = coercivity_modular(ctx, r.coeffs);
    j["coeffs"] = r.coeffs;
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out{path, std::ios::binary};
    out << text;
    if (!out)
        throw std::runtime_error{"cannot write " + path.string()};
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

void write_eigenfunctions(const std::filesystem::path& path, const galerkin_basis& basis,
                          const std::vector<std::vector<double>>& vectors) {
    std::string out = "x";
    for (std::size_t i = 0; i < vectors.size(); ++i)
        out += ",u" + std::to_string(i + 1);
    out += "\n";
    for (const double x : basis.nodes()) {
        out += number(x);
        for (const auto& v : vectors)
            out += "," + number(basis.eval(v, x));
        out += "\n";
    }
    write_text(path, out);
}

double tail_bound(const energy_context& ctx, const std::vector<std::vector<double>>& vectors) {
    double worst = 0;
    for (const auto& v : vectors)
        worst = std::max(worst, tail_estimate(ctx, v));
    return worst;
}

bool all_converged(const std::vector<eigenpair_result>& seq, const int i_max) {
    return static_cast<int>(seq.size()) == i_max &&
           std::all_of(seq.begin(), seq.end(), [](const auto& r) { return r.converged; });
}

json work_counts(const std::vector<eigenpair_result>& seq) {
    long long iterations = 0;
    for (const auto& r : seq)
        iterations += r.iterations;
    return {{"iterations", iterations}, {"energy_evaluations", seq.empty() ? 0 : seq.back().energy_evaluations}};
}

int run_solve(const run_config& cfg, json& results, const run_options& opt, std::ostream& log) {
    const problem prob = make_problem(cfg);
    const energy_context ctx{prob, cfg.basis_k};
    const auto seq = solve_sequence(ctx, cfg.basis_k, cfg.i_max, cfg.solver);
    std::vector<std::vector<double>> vectors;
    results["eigenpairs"] = json::array();
    for (const auto& r : seq) {
        results["eigenpairs"].push_back(pair_json(ctx, r));
        if (r.converged)
            vectors.push_back(r.coeffs);
    }
    results["quadrature"] = {{"pair_count", ctx.quadrature().size()}, {"tail_bound", tail_bound(ctx, vectors)}};
    results["timings"] = work_counts(seq);
    write_eigenfunctions(opt.out_dir / "eigenfunctions.csv", ctx.basis(), vectors);
    if (!opt.quiet)
        for (const auto& r : seq)
            log << "lambda_" << r.index << " = " << number(r.lambda) << "  residual " << number(r.residual)
                << (r.converged ? "" : "  (not converged)") << "\n";
    if (!all_converged(seq, cfg.i_max)) {
        log << "eigenpair " << seq.back().index << " did not converge, best residual " << number(seq.back().residual)
            << "\n";
        return exit_nonconvergence;
    }
    return exit_ok;
}

int run_oracle(const run_config& cfg, json& results, const run_options& opt, std::ostream& log) {
    const problem prob = make_problem(cfg);
    if (!is_linear_problem(prob))
        throw config_error{"mode 'oracle' needs a linear kernel (plap:2 or weighted-plap:2) with source power:2"};
    const energy_context ctx{prob, cfg.basis_k};
    const auto oracle = linear_oracle(ctx, cfg.basis_k);
    results["eigenpairs"] = json::array();
    std::vector<std::vector<double>> vectors;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        const auto& o = oracle[i];
        const auto gA = grad_A(ctx, o.coeffs);
        const auto gG = grad_G(ctx, o.coeffs);
        double num = 0;
        for (std::size_t j = 0; j < gA.size(); ++j)
            num += (gA[j] - o.lambda * gG[j]) * (gA[j] - o.lambda * gG[j]);
        results["eigenpairs"].push_back({{"i", i + 1},
                                         {"lambda", o.lambda},
                                         {"g_value", energy_G(ctx, o.coeffs)},
                                         {"a_value", energy_A(ctx, o.coeffs)},
                                         {"residual", std::sqrt(num) / norm2(gA)},
                                         {"converged", true}});
        if (static_cast<int>(i) < cfg.i_max)
            vectors.push_back(o.coeffs);
    }

    const auto seq = solve_sequence(ctx, cfg.basis_k, cfg.i_max, cfg.solver);
    const Eigen::MatrixXd B = mass_matrix(ctx);
    std::string csv = "i,lambda_solver,lambda_oracle,relative_lambda_error,b_distance,converged\n";
    results["solver_deltas"] = json::array();
    for (const auto& r : seq) {
        const auto& o = oracle[r.index - 1];
        const double rel = std::abs(r.lambda - o.lambda) / o.lambda;
        const double dist = b_distance(B, r.coeffs, o.coeffs);
        results["solver_deltas"].push_back({{"i", r.index},
                                            {"lambda_solver", r.lambda},
                                            {"lambda_oracle", o.lambda},
                                            {"relative_lambda_error", rel},
                                            {"b_distance", dist},
                                            {"converged", r.converged}});
        csv += std::to_string(r.index) + "," + number(r.lambda) + "," + number(o.lambda) + "," + number(rel) + "," +
               number(dist) + "," + (r.converged ? "true" : "false") + "\n";
        if (!opt.quiet)
            log << "lambda_" << r.index << ": solver " << number(r.lambda) << "  oracle " << number(o.lambda)
                << "  relative " << number(rel) << "\n";
    }
    results["quadrature"] = {{"pair_count", ctx.quadrature().size()}, {"tail_bound", tail_bound(ctx, vectors)}};
    results["timings"] = work_counts(seq);
    write_text(opt.out_dir / "deltas.csv", csv);
    write_eigenfunctions(opt.out_dir / "eigenfunctions.csv", ctx.basis(), vectors);
    if (!all_converged(seq, cfg.i_max)) {
        log << "solver pair " << seq.back().index << " did not converge\n";
        return exit_nonconvergence;
    }
    return exit_ok;
}

int run_study(const run_config& cfg, json& results, const run_options& opt, std::ostream& log) {
    const problem prob = make_problem(cfg);
    const convergence_report rep = k_study(prob, cfg.solver, cfg.k_list, cfg.i_max);
    std::string csv = "k,i,lambda,g_value,a_value,residual,converged,oracle_lambda\n";
    json rows = json::array();
    bool ok = true;
    std::uint64_t evaluations = 0;
    long long iterations = 0;
    for (std::size_t r = 0; r < rep.runs.size(); ++r) {
        const int k = rep.k_list[r];
        ok = ok && all_converged(rep.runs[r], std::min(cfg.i_max, k));
        for (const auto& e : rep.runs[r]) {
            const bool has_oracle = r < rep.oracle_lambdas.size();
            const double ol = has_oracle ? rep.oracle_lambdas[r][e.index - 1] : 0;
            csv += std::to_string(k) + "," + std::to_string(e.index) + "," + number(e.lambda) + "," +
                   number(e.g_value) + "," + number(e.a_value) + "," + number(e.residual) + "," +
                   (e.converged ? "true" : "false") + "," + (has_oracle ? number(ol) : "") + "\n";
            json row = {{"k", k},
                        {"i", e.index},
                        {"lambda", e.lambda},
                        {"g_value", e.g_value},
                        {"a_value", e.a_value},
                        {"residual", e.residual},
                        {"converged", e.converged}};
            if (has_oracle)
                row["oracle_lambda"] = ol;
            rows.push_back(row);
            iterations += e.iterations;
        }
        if (!rep.runs[r].empty())
            evaluations += rep.runs[r].back().energy_evaluations;
    }
    results["eigenpairs"] = rows;
    json verdicts = json::object();
    if (rep.c1_nondecreasing)
        verdicts["c1_nondecreasing"] = *rep.c1_nondecreasing;
    if (rep.lambda1_nonincreasing)
        verdicts["lambda1_nonincreasing"] = *rep.lambda1_nonincreasing;
    if (rep.max_oracle_deviation)
        verdicts["max_oracle_deviation"] = *rep.max_oracle_deviation;
    results["verdicts"] = verdicts;
    json quad = json::array();
    for (const int k : cfg.k_list) {
        const energy_context ctx{prob, k};
        std::vector<std::vector<double>> vectors;
        const auto& run = rep.runs[quad.size()];
        for (const auto& e : run)
            if (e.converged)
                vectors.push_back(e.coeffs);
        quad.push_back({{"k", k}, {"pair_count", ctx.quadrature().size()}, {"tail_bound", tail_bound(ctx, vectors)}});
    }
    results["quadrature"] = quad;
    results["timings"] = {{"iterations", iterations}, {"energy_evaluations", evaluations}};
    write_text(opt.out_dir / "study.csv", csv);
    if (!opt.quiet)
        log << csv;
    if (!ok) {
        log << "some eigenpairs did not converge\n";
        return exit_nonconvergence;
    }
    return exit_ok;
}

json report_json(const validation_report& rep) {
    json conds = json::array();
    for (const auto& c : rep.conditions)
        conds.push_back({{"name", c.name},
                         {"passed", c.passed},
                         {"worst_margin", finite_or_null(c.worst_margin)},
                         {"worst_sample", c.worst_sample}});
    return {{"name", rep.kernel},
            {"samples", rep.samples},
            {"seed", rep.seed},
            {"all_passed", rep.all_passed()},
            {"conditions", conds}};
}

int run_validate(const run_config& cfg, json& results, const run_options& opt, std::ostream& log) {
    const problem prob = make_problem(cfg);
    validation_options vo;
    vo.box_lo = cfg.constants.box_lo;
    vo.box_hi = cfg.constants.box_hi;
    const auto krep = validate_conditions(prob.kern, cfg.validation_samples, cfg.solver.rng_seed, vo);
    const auto srep = validate_source(prob.src, prob.kern.young, cfg.validation_samples, cfg.solver.rng_seed);
    results["kernel"] = report_json(krep);
    results["source"] = report_json(srep);
    write_json(opt.out_dir / "validation.json", results);
    if (!opt.quiet)
        for (const auto* rep : {&krep, &srep})
            for (const auto& c : rep->conditions)
                log << rep->kernel << "  " << c.name << ": " << (c.passed ? "pass" : "FAIL") << "\n";
    return exit_ok;
}

}

int run(const std::filesystem::path& config_path, const run_options& options, std::ostream& log) {
    try {
        run_config cfg = load_config(config_path);
        if (options.seed)
            cfg.solver.rng_seed = *options.seed;
        std::filesystem::create_directories(options.out_dir);

        const auto start = std::chrono::steady_clock::now();
        json results;
        results["config_echo"] = echo(cfg, cfg.solver.rng_seed);
        int status = exit_ok;
        switch (cfg.mode) {
        case run_mode::solve: status = run_solve(cfg, results, options, log); break;
        case run_mode::oracle: status = run_oracle(cfg, results, options, log); break;
        case run_mode::study: status = run_study(cfg, results, options, log); break;
        case run_mode::validate: return run_validate(cfg, results, options, log);
        }
        write_json(options.out_dir / "results.json", results);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_text(options.out_dir / "wallclock.txt", number(seconds) + "\n");
        if (!options.quiet)
            log << "wrote " << (options.out_dir / "results.json").string() << " in " << number(seconds) << " s\n";
        return status;
    } catch (const config_error& e) {
        log << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const nonconvergence_error& e) {
        log << "no convergence: " << e.what() << "\n";
        return exit_nonconvergence;
    } catch (const error& e) {
        log << "numerical failure: " << e.what() << "\n";
        return exit_assembly;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_failure;
    }
}

}
