#ifndef NLE_ENERGY_HPP
#define NLE_ENERGY_HPP

#include "fracgrid.hpp"
#include "kernels.hpp"
#include "orlicz.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

namespace nle {

/// Everything that defines the eigenproblem except the Galerkin dimension.
struct problem {
    double alpha = 0;
    double beta = 1;
    double s = 0.5;
    kernel kern = catalog_kernel("plap:2");
    source src = catalog_source("power:2");
    quad_config quad;
};

/// Node of the Gauss rule on Omega together with its basis location.
struct omega_point {
    double x = 0;
    double weight = 0;
    galerkin_basis::location at;
};

/// Basis, cached pair quadrature and Omega rule for one Galerkin dimension.
/// Immutable after construction and safe to share between threads.
class energy_context {
public:
    energy_context(const problem& prob, int k);

    const problem& definition() const noexcept { return _problem; }
    const galerkin_basis& basis() const noexcept { return _basis; }
    const pair_quadrature& quadrature() const noexcept { return *_quad; }
    const discrete_measure_space& omega_space() const noexcept { return _omega_space; }
    std::span<const omega_point> omega_points() const noexcept { return _omega; }
    const kernel& kern() const noexcept { return _problem.kern; }
    const source& src() const noexcept { return _problem.src; }
    double s() const noexcept { return _problem.s; }
    int size() const noexcept { return _basis.size(); }

    /// Values of u at the Omega nodes.
    std::vector<double> omega_values(std::span<const double> coeffs) const;

private:
    problem _problem;
    galerkin_basis _basis;
    std::shared_ptr<const pair_quadrature> _quad;
    std::vector<omega_point> _omega;
    discrete_measure_space _omega_space;
};

double energy_A(const energy_context& ctx, std::span<const double> coeffs);
std::vector<double> grad_A(const energy_context& ctx, std::span<const double> coeffs);
double energy_G(const energy_context& ctx, std::span<const double> coeffs);
std::vector<double> grad_G(const energy_context& ctx, std::span<const double> coeffs);

/// <A'(u), u> = iint a(x, y, D^s u) D^s u dnu.
double action_pairing(const energy_context& ctx, std::span<const double> coeffs);
/// int_Omega g(u) u dx.
double source_pairing(const energy_context& ctx, std::span<const double> coeffs);

struct normalization {
    double r = 0;
    std::vector<double> unit;
};

/// The unique r > 0 with A(r u) = 1 (the map r -> A(r u) is strictly increasing).
normalization normalize(const energy_context& ctx, std::span<const double> coeffs, double tol = 1e-13);

/// K_jl = iint w(x,y) D^s phi_j D^s phi_l dnu with w the kernel's linear weight (1 if none).
Eigen::MatrixXd stiffness_matrix(const energy_context& ctx);
/// B_jl = int_Omega phi_j phi_l dx.
Eigen::MatrixXd mass_matrix(const energy_context& ctx);

Eigen::MatrixXd hessian_A(const energy_context& ctx, std::span<const double> coeffs);
Eigen::MatrixXd hessian_G(const energy_context& ctx, std::span<const double> coeffs);

/// iint (a(D^s u) - a(D^s v)) (D^s u - D^s v) dnu; non-negative for monotone kernels.
double monotonicity_gap(const energy_context& ctx, std::span<const double> u, std::span<const double> v);

/// theta iint M(c D^s u / 2) dnu with the kernel's coercivity constants.
double coercivity_modular(const energy_context& ctx, std::span<const double> coeffs);

/// Estimate of the part of A(u) from pairs leaving the truncation box [alpha - L, beta + L].
double tail_estimate(const energy_context& ctx, std::span<const double> coeffs);

}

#endif
