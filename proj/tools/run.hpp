#ifndef NLE_APP_RUN_HPP
#define NLE_APP_RUN_HPP

#include "nle/energy.hpp"
#include "nle/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nle::app {

enum class run_mode { solve, study, oracle, validate };

struct run_config {
    run_mode mode = run_mode::solve;
    double alpha = 0;
    double beta = 1;
    double s = 0.5;
    int basis_k = 16;
    std::vector<int> k_list;
    std::string kernel = "plap:2";
    std::string source = "power:2";
    std::optional<std::string> young;
    int i_max = 1;
    quad_config quad;
    solver_config solver;
    kernel_options constants;
    std::size_t validation_samples = 100000;
};

/// Reads the YAML run file. Schema violations throw config_error carrying
/// "file:line:column: message".
run_config load_config(const std::filesystem::path& path);
run_config parse_config(const std::string& text, const std::string& origin = "<config>");

/// Builds the problem (kernel, source, quadrature) described by a config.
problem make_problem(const run_config& cfg);

struct run_options {
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir = ".";
    bool quiet = false;
};

enum exit_status { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_nonconvergence = 3, exit_assembly = 4 };

/// Runs a config file and writes the artifacts of its mode into out_dir.
int run(const std::filesystem::path& config_path, const run_options& options, std::ostream& log);

}

#endif
