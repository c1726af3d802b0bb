#include "run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Eigenpairs of nonlocal quasilinear operators on fractional Orlicz-Sobolev Galerkin spaces"};
    app.require_subcommand(1);

    auto* solve = app.add_subcommand("solve", "Run a config file (mode solve, study, oracle or validate)");
    std::string config;
    std::uint64_t seed = 0;
    nle::app::run_options options;
    std::string out_dir = ".";
    solve->add_option("config", config, "YAML run file")->required()->check(CLI::ExistingFile);
    auto* seed_opt = solve->add_option("--seed", seed, "Override solver.rng_seed");
    solve->add_option("--out", out_dir, "Output directory");
    solve->add_flag("--quiet", options.quiet, "Only report errors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nle::app::exit_config;
    }
    if (seed_opt->count() > 0)
        options.seed = seed;
    options.out_dir = out_dir;
    return nle::app::run(config, options, std::cerr);
}
