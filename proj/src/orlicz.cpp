#include "nle/orlicz.hpp"

#include "nle/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nle {

discrete_measure_space::discrete_measure_space(std::vector<double> weights)
    : _weights{std::move(weights)} {
    compensated_sum total;
    for (const double w : _weights) {
        if (!(w > 0) || !std::isfinite(w))
            throw domain_error{"discrete_measure_space: weights must be positive and finite"};
        total += w;
    }
    _total_mass = total.value();
}

namespace {

void check_shape(const discrete_measure_space& space, std::span<const double> u) {
    if (u.size() != space.size())
        throw shape_error{"sample length " + std::to_string(u.size()) + " does not match space size " +
                          std::to_string(space.size())};
}

double scaled_modular(const discrete_measure_space& space, std::span<const double> u, const young_function& young,
                      const double k) {
    const auto w = space.weights();
    compensated_sum s;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] != 0)
            s += w[i] * young.M(u[i] / k);
    }
    return s.value();
}

}

double modular(const discrete_measure_space& space, std::span<const double> u, const young_function& young) {
    check_shape(space, u);
    return scaled_modular(space, u, young, 1.0);
}

double luxemburg_norm(const discrete_measure_space& space, std::span<const double> u, const young_function& young) {
    check_shape(space, u);
    for (const double v : u)
        if (!std::isfinite(v))
            throw domain_error{"luxemburg_norm: non-finite sample"};
    const auto w = space.weights();
    double lo = 0;
    double umax = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] == 0)
            continue;
        umax = std::max(umax, std::abs(u[i]));
        // each atom alone must satisfy w_i M(u_i / k) <= 1
        lo = std::max(lo, std::abs(u[i]) / young.inverse(1 / w[i]));
    }
    if (umax == 0)
        return 0;
    // M(u_i / k) <= M(umax / k) = 1 / total_mass for every atom
    double hi = umax / young.inverse(1 / space.total_mass());
    while (scaled_modular(space, u, young, hi) > 1)
        hi *= 2;
    // both brackets come from the bisected inverse of M; refine from the modular itself
    lo = std::min(lo, hi / 2);
    while (scaled_modular(space, u, young, lo) <= 1 && lo > 0)
        lo /= 2;
    // modular(u / k) is nonincreasing in k; keep hi on the feasible side
    for (int it = 0; it < 200; ++it) {
        const double mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi)
            break;
        if (scaled_modular(space, u, young, mid) <= 1)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

holder_bound holder_pairing_bound(const discrete_measure_space& space, std::span<const double> u,
                                  std::span<const double> v, const young_function& young) {
    check_shape(space, u);
    check_shape(space, v);
    const auto w = space.weights();
    compensated_sum lhs;
    for (std::size_t i = 0; i < u.size(); ++i)
        lhs += w[i] * std::abs(u[i] * v[i]);
    const double nu = luxemburg_norm(space, u, young);
    const double nv = luxemburg_norm(space, v, young.conjugate());
    return {lhs.value(), 2 * nu * nv};
}

}
