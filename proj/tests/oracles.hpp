#ifndef NLE_TESTS_ORACLES_HPP
#define NLE_TESTS_ORACLES_HPP

// Reference computations that share no code path with the library routines
// they check.

#include "nle/energy.hpp"
#include "nle/numeric.hpp"
#include "nle/young.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

// splitmix64 stream, enough for hand-rolled property generators
class rng {
    std::uint64_t _state;

public:
    explicit rng(const std::uint64_t seed)
        : _state{seed} {}

    std::uint64_t next() {
        std::uint64_t z = (_state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(const double lo, const double hi) { return lo + (hi - lo) * uniform(); }
    double log_uniform(const double lo, const double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(const int lo, const int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
    bool coin() { return (next() >> 63) != 0; }
    std::vector<double> vector(const std::size_t n, const double lo, const double hi) {
        std::vector<double> v(n);
        for (double& x : v)
            x = uniform(lo, hi);
        return v;
    }
};

// iint_{[a,b]x[c,d]} dx dy / (y - x) for b <= c, from z log z
inline double nu_mass_box(const double a, const double b, const double c, const double d) {
    const auto phi = [](const double z) { return z > 0 ? z * std::log(z) : 0.0; };
    return phi(d - a) - phi(d - b) - phi(c - a) + phi(c - b);
}

// sup_{t >= 0} (tau t - M(t)) by a grid scan followed by golden-section refinement
inline double sup_scan_conjugate(const nle::young_function& y, const double tau, const double t_hi) {
    const int n = 4000;
    double best_t = 0, best = 0;
    for (int i = 1; i <= n; ++i) {
        const double t = t_hi * i / n;
        const double v = tau * t - y.M(t);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    double lo = std::max(0.0, best_t - t_hi / n), hi = best_t + t_hi / n;
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 200; ++it) {
        const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
        if (tau * m1 - y.M(m1) < tau * m2 - y.M(m2))
            lo = m1;
        else
            hi = m2;
    }
    const double t = (lo + hi) / 2;
    return std::max(best, tau * t - y.M(t));
}

// Stiffness matrix evaluated with basis.eval at every pair node instead of the stencil tables.
inline Eigen::MatrixXd stiffness_by_eval(const nle::energy_context& ctx) {
    const auto& basis = ctx.basis();
    const int k = basis.size();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k, k);
    const auto& w = ctx.kern().linear_weight;
    for (const auto& p : ctx.quadrature().pairs()) {
        Eigen::VectorXd d(k);
        for (int j = 0; j < k; ++j)
            d[j] = (basis.eval(j, p.x) - basis.eval(j, p.y)) * std::pow(std::abs(p.x - p.y), -ctx.s());
        K += p.weight * (w ? (*w)(p.x, p.y) : 1.0) * d * d.transpose();
    }
    return K;
}

// int phi_j phi_l over Omega with a 7 point rule per element
inline Eigen::MatrixXd mass_by_eval(const nle::galerkin_basis& basis) {
    const int k = basis.size();
    const auto& rule = nle::gauss_legendre(7);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k, k);
    const auto& nodes = basis.nodes();
    for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
        const double a = nodes[e], b = nodes[e + 1];
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double x = (a + b) / 2 + (b - a) / 2 * rule.nodes[q];
            Eigen::VectorXd v(k);
            for (int j = 0; j < k; ++j)
                v[j] = basis.eval(j, x);
            B += (b - a) / 2 * rule.weights[q] * v * v.transpose();
        }
    }
    return B;
}

// relative errors of the central difference of f along v against the predicted slope <grad, v>
inline std::vector<double> central_difference_errors(const std::function<double(std::span<const double>)>& f,
                                                     std::span<const double> u, std::span<const double> v,
                                                     const double predicted, std::span<const double> steps) {
    std::vector<double> out;
    for (const double eps : steps) {
        std::vector<double> up(u.begin(), u.end()), um(u.begin(), u.end());
        for (std::size_t j = 0; j < u.size(); ++j) {
            up[j] += eps * v[j];
            um[j] -= eps * v[j];
        }
        const double fd = (f(up) - f(um)) / (2 * eps);
        out.push_back(std::abs(fd - predicted) / std::abs(predicted));
    }
    return out;
}

// least-squares slope of log(err) against log(eps)
inline double loglog_slope(std::span<const double> eps, std::span<const double> err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double x = std::log(eps[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}

#endif
