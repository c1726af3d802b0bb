#ifndef NLE_SOLVER_HPP
#define NLE_SOLVER_HPP

#include "energy.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace nle {

struct solver_config {
    int max_iter = 3000;
    // first trial step, relative to |u|
    double step0 = 0.5;
    double backtrack = 0.5;
    double armijo = 1e-4;
    // stationarity |A'(u) - lambda G'(u)| / |A'(u)| required of a converged pair
    double grad_tol = 1e-9;
    // the ascent hands over to the Newton polish at this residual
    double ascent_tol = 1e-4;
    int polish_iter = 40;
    int n_restarts = 3;
    std::uint64_t rng_seed = 1;
    double deflation_penalty = 10;
    // ascend in the metric of the linear stiffness matrix instead of the Euclidean one
    bool precondition = true;
};

void validate(const solver_config& cfg);

struct eigenpair_result {
    int index = 1;
    int basis_k = 0;
    double lambda = 0;
    std::vector<double> coeffs;
    double g_value = 0;
    double a_value = 0;
    double residual = 0;
    int iterations = 0;
    bool converged = false;
    // higher pairs come from deflation and are not certified minimax levels
    bool candidate = false;
    bool cluster = false;
    bool order_violation = false;
    // smallest monotonicity gap between consecutive ascent iterates
    double monotone_certificate = 0;
    int restart = 0;
    std::uint64_t energy_evaluations = 0;
};

/// Maximizer of G on {u in V_k : A(u) = 1}, V_k spanned by the first k basis functions.
eigenpair_result solve_first(const energy_context& ctx, int k, const solver_config& cfg);

/// Ascent and polish from a given start; previous pairs are deflated.
eigenpair_result ascend_from(const energy_context& ctx, int k, std::span<const double> start, const solver_config& cfg,
                             std::span<const eigenpair_result> previous = {});

/// Pairs 1..i_max. Stops after the first index that fails to converge; that
/// entry is returned with converged == false.
std::vector<eigenpair_result> solve_sequence(const energy_context& ctx, int k, int i_max, const solver_config& cfg);

struct oracle_pair {
    double lambda = 0;
    std::vector<double> coeffs; // scaled to A(u) = 1
};

/// Dense K u = lambda B u for linear kernels with the power:2 source, ascending.
std::vector<oracle_pair> linear_oracle(const energy_context& ctx, int k);

bool is_linear_problem(const problem& prob);

struct convergence_report {
    std::vector<int> k_list;
    std::vector<std::vector<eigenpair_result>> runs;
    // per k, present in the linear case
    std::vector<std::vector<double>> oracle_lambdas;
    std::optional<bool> c1_nondecreasing;
    std::optional<bool> lambda1_nonincreasing;
    std::optional<double> max_oracle_deviation;
};

convergence_report k_study(const problem& prob, const solver_config& cfg, const std::vector<int>& k_list, int i_max);

/// Coefficient vectors compared in the B-norm after B-normalization, up to sign.
double b_distance(const Eigen::MatrixXd& B, std::span<const double> u, std::span<const double> v);

}

#endif
