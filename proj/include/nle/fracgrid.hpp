#ifndef NLE_FRACGRID_HPP
#define NLE_FRACGRID_HPP

#include <span>
#include <vector>

namespace nle {

/// Uniform hat functions on (alpha, beta), vanishing at the end points and
/// extended by zero outside the interval. Basis function j (0-based) peaks at
/// nodes()[j + 1].
class galerkin_basis {
    double _alpha = 0;
    double _beta = 1;
    int _k = 1;
    double _h = 0.5;
    std::vector<double> _nodes;

public:
    galerkin_basis(double alpha, double beta, int k);

    double alpha() const noexcept { return _alpha; }
    double beta() const noexcept { return _beta; }
    int size() const noexcept { return _k; }
    double spacing() const noexcept { return _h; }
    const std::vector<double>& nodes() const noexcept { return _nodes; }
    double lipschitz() const noexcept { return 1 / _h; }

    bool inside(double x) const noexcept { return x > _alpha && x < _beta; }

    // Interval index i in [0, k] and local coordinate in [0, 1]; -1 outside the closed interval.
    struct location {
        int interval = -1;
        double t = 0;
    };
    location locate(double x) const noexcept;

    double eval(int j, double x) const;
    double eval(std::span<const double> coeffs, double x) const;
};

galerkin_basis build_basis(double alpha, double beta, int k);

/// (u(x) - u(y)) / |x - y|^s for u = sum coeffs_j phi_j.
double holder_quotient(const galerkin_basis& basis, std::span<const double> coeffs, double s, double x, double y);

struct quad_config {
    int cells_per_axis = 32;
    int grading_depth = 8;
    int gauss_order = 3;
    double tail_radius_factor = 4;
    int tail_panels = 12;
    // a box is integrated directly once its longest side is <= admissibility * distance to the diagonal
    double admissibility = 1.0;
};

/// One node of the pair-space rule. weight already contains 1/|x - y|.
struct pair_point {
    double x = 0;
    double y = 0;
    double weight = 0;
    double inv_dist_s = 0; // |x - y|^{-s}
    galerkin_basis::location at_x;
    galerkin_basis::location at_y;
};

/// Quadrature for dnu_1 = dx dy / |x - y| on [alpha - L, beta + L]^2 minus the
/// diagonal, restricted to pairs with at least one coordinate in Omega. Boxes
/// touching the diagonal are dyadically graded toward it; the rule is exactly
/// symmetric under (x, y) -> (y, x).
class pair_quadrature {
public:
    pair_quadrature(galerkin_basis basis, double s, quad_config cfg, std::vector<pair_point> pairs, double tail_radius);

    const galerkin_basis& basis() const noexcept { return _basis; }
    double s() const noexcept { return _s; }
    const quad_config& config() const noexcept { return _cfg; }
    std::span<const pair_point> pairs() const noexcept { return _pairs; }
    std::size_t size() const noexcept { return _pairs.size(); }
    double tail_radius() const noexcept { return _tail_radius; }

    /// Sum of weights whose nodes fall in [x0, x1] x [y0, y1].
    double mass_in(double x0, double x1, double y0, double y1) const;

    /// Values (u(x) - u(y)) |x - y|^{-s} at every node.
    std::vector<double> holder_values(std::span<const double> coeffs) const;

private:
    galerkin_basis _basis;
    double _s;
    quad_config _cfg;
    std::vector<pair_point> _pairs;
    double _tail_radius;
};

pair_quadrature build_pair_quadrature(const galerkin_basis& basis, double s, const quad_config& cfg);

}

#endif
