#ifndef NLE_KERNELS_HPP
#define NLE_KERNELS_HPP

#include "young.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nle {

using pair_function = std::function<double(double x, double y, double xi)>;
using weight_function = std::function<double(double x, double y)>;

/// Constants of |a(x,y,xi)| <= d(x,y) + b Mbar^{-1}(M(c xi)).
struct growth_constants {
    weight_function d = [](double, double) { return 0.0; };
    double b = 1;
    double c = 1;
};

/// Constants of a(x,y,xi) xi >= theta M(c xi).
struct coercivity_constants {
    double theta = 1;
    double c = 1;
};

/// Anisotropic integrand a(x, y, xi) with its primitive in xi.
///
/// Catalog entries:
///   plap:p              a = |xi|^{p-2} xi,         M = power:p, theta = p, b = (p-1)^{(p-1)/p}, c = 1
///   mlap:<young>        a = m(xi), A = M(xi),      theta = 1 (p for power/plog), b = 1, c = 2
///   weighted-plap:p:<w> a = w(x,y) |xi|^{p-2} xi, w given as an expression in x, y
///   expr:<a>            a given as an expression in x, y, xi; A by adaptive quadrature
struct kernel {
    std::string name;
    pair_function a;
    pair_function A;
    pair_function da; // d a / d xi
    young_function young = young_function::power(2);
    growth_constants growth;
    coercivity_constants coercivity;
    bool symmetric = true;
    // set when a(x, y, xi) = w(x, y) xi, which is what the dense linear oracle needs
    std::optional<weight_function> linear_weight;
};

struct kernel_options {
    // box over which catalog weights are bounded and validators sample (x, y)
    double box_lo = -1;
    double box_hi = 2;
    // Young function and constants for "expr:" kernels
    std::optional<young_function> young;
    std::optional<growth_constants> growth;
    std::optional<coercivity_constants> coercivity;
};

kernel catalog_kernel(std::string_view spec, const kernel_options& options = {});

/// a_sym = (a(x,y,xi) + a(y,x,xi)) / 2. Conditions and constants carry over.
kernel symmetrize(const kernel& k);

struct condition_result {
    std::string name;
    bool passed = true;
    double worst_margin = 0; // >= 0 means satisfied with room
    std::vector<double> worst_sample;
};

struct validation_report {
    std::string kernel;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::vector<condition_result> conditions;

    bool all_passed() const;
    const condition_result& condition(std::string_view name) const;
};

struct validation_options {
    double box_lo = -1;
    double box_hi = 2;
    double xi_min = 1e-3;
    double xi_max = 1e2;
};

/// Checks oddness, sign, growth, monotonicity, coercivity and A(xi) <= xi a(xi)
/// on scrambled Halton samples of (x, y, xi, xi'). Deterministic in the seed.
validation_report validate_conditions(const kernel& k, std::size_t samples, std::uint64_t seed,
                                      const validation_options& options = {});

/// Constants of |g(t)| <= e + a1 Mbar^{-1}(a2 M(a3 t)), stated for M = power:p.
struct source_growth_constants {
    double e = 0;
    double a1 = 1;
    double a2 = 1;
    double a3 = 1;
};

struct source {
    std::string name;
    std::function<double(double)> g;
    std::function<double(double)> G;
    std::function<double(double)> dg;
    source_growth_constants growth;
    // exponent p when g is p-homogeneous
    std::optional<double> homogeneity;
};

/// "power:p" (g = |t|^{p-2} t) or "atan-power:p" (g = atan|t| |t|^{p-2} t).
source catalog_source(std::string_view spec);

/// Samples oddness and positivity of g, evenness and monotonicity of G, and the
/// growth bound against the given Young function.
validation_report validate_source(const source& src, const young_function& young, std::size_t samples,
                                  std::uint64_t seed);

}

#endif
