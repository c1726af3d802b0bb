#include "nle/energy.hpp"

#include "nle/errors.hpp"
#include "nle/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nle {

namespace {

// Up to two hat functions are nonzero at a point.
struct hat_values {
    int index[2] = {-1, -1};
    double value[2] = {0, 0};
};

hat_values hats_at(const galerkin_basis::location& at, const int k) {
    hat_values h;
    if (at.interval < 0)
        return h;
    // nodal index n corresponds to basis function n - 1
    const int left = at.interval;
    const int right = at.interval + 1;
    if (left >= 1 && left <= k) {
        h.index[0] = left - 1;
        h.value[0] = 1 - at.t;
    }
    if (right >= 1 && right <= k) {
        h.index[1] = right - 1;
        h.value[1] = at.t;
    }
    return h;
}

void check_size(const energy_context& ctx, std::span<const double> coeffs) {
    if (static_cast<int>(coeffs.size()) != ctx.size())
        throw shape_error{"coefficient length " + std::to_string(coeffs.size()) + " does not match basis size " +
                          std::to_string(ctx.size())};
}

// D^s phi_j at a pair node, as (index, value) entries
struct pair_stencil {
    int index[4];
    double value[4];
    int count = 0;
};

pair_stencil stencil(const pair_point& p, const int k) {
    pair_stencil st;
    const hat_values hx = hats_at(p.at_x, k);
    const hat_values hy = hats_at(p.at_y, k);
    auto push = [&](const int idx, const double v) {
        if (idx < 0)
            return;
        for (int i = 0; i < st.count; ++i)
            if (st.index[i] == idx) {
                st.value[i] += v;
                return;
            }
        st.index[st.count] = idx;
        st.value[st.count] = v;
        ++st.count;
    };
    push(hx.index[0], hx.value[0] * p.inv_dist_s);
    push(hx.index[1], hx.value[1] * p.inv_dist_s);
    push(hy.index[0], -hy.value[0] * p.inv_dist_s);
    push(hy.index[1], -hy.value[1] * p.inv_dist_s);
    return st;
}

}

energy_context::energy_context(const problem& prob, const int k)
    : _problem{prob}
    , _basis{prob.alpha, prob.beta, k} {
    if (!(prob.s > 0 && prob.s < 1))
        throw config_error{"s must lie strictly inside (0, 1)"};
    _quad = std::make_shared<const pair_quadrature>(build_pair_quadrature(_basis, prob.s, prob.quad));

    const gauss_rule& rule = gauss_legendre(5);
    const auto& nodes = _basis.nodes();
    std::vector<double> weights;
    for (int i = 0; i + 1 < static_cast<int>(nodes.size()); ++i) {
        const double a = nodes[i], b = nodes[i + 1];
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = (rule.nodes[q] + 1) / 2;
            const double w = (b - a) / 2 * rule.weights[q];
            _omega.push_back({a + (b - a) * t, w, {i, t}});
            weights.push_back(w);
        }
    }
    _omega_space = discrete_measure_space{std::move(weights)};
}

std::vector<double> energy_context::omega_values(std::span<const double> coeffs) const {
    check_size(*this, coeffs);
    std::vector<double> out(_omega.size());
    for (std::size_t q = 0; q < _omega.size(); ++q) {
        const hat_values h = hats_at(_omega[q].at, size());
        double v = 0;
        for (int i = 0; i < 2; ++i)
            if (h.index[i] >= 0)
                v += coeffs[h.index[i]] * h.value[i];
        out[q] = v;
    }
    return out;
}

double energy_A(const energy_context& ctx, std::span<const double> coeffs) {
    check_size(ctx, coeffs);
    const auto pairs = ctx.quadrature().pairs();
    const auto D = ctx.quadrature().holder_values(coeffs);
    const auto& A = ctx.kern().A;
    compensated_sum sum;
    for (std::size_t q = 0; q < pairs.size(); ++q)
        if (D[q] != 0)
            sum += pairs[q].weight * A(pairs[q].x, pairs[q].y, D[q]);
    return sum.value();
}

std::vector<double> grad_A(const energy_context& ctx, std::span<const double> coeffs) {
    check_size(ctx, coeffs);
    const int k = ctx.size();
    const auto pairs = ctx.quadrature().pairs();
    const auto D = ctx.quadrature().holder_values(coeffs);
    const auto& a = ctx.kern().a;
    std::vector<compensated_sum> acc(k);
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        if (D[q] == 0)
            continue;
        const double f = pairs[q].weight * a(pairs[q].x, pairs[q].y, D[q]);
        const pair_stencil st = stencil(pairs[q], k);
        for (int i = 0; i < st.count; ++i)
            acc[st.index[i]] += f * st.value[i];
    }
    std::vector<double> g(k);
    for (int j = 0; j < k; ++j)
        g[j] = acc[j].value();
    return g;
}

double energy_G(const energy_context& ctx, std::span<const double> coeffs) {
    const auto u = ctx.omega_values(coeffs);
    const auto pts = ctx.omega_points();
    compensated_sum sum;
    for (std::size_t q = 0; q < pts.size(); ++q)
        sum += pts[q].weight * ctx.src().G(u[q]);
    return sum.value();
}

std::vector<double> grad_G(const energy_context& ctx, std::span<const double> coeffs) {
    const auto u = ctx.omega_values(coeffs);
    const auto pts = ctx.omega_points();
    const int k = ctx.size();
    std::vector<compensated_sum> acc(k);
    for (std::size_t q = 0; q < pts.size(); ++q) {
        const double f = pts[q].weight * ctx.src().g(u[q]);
        const hat_values h = hats_at(pts[q].at, k);
        for (int i = 0; i < 2; ++i)
            if (h.index[i] >= 0)
                acc[h.index[i]] += f * h.value[i];
    }
    std::vector<double> g(k);
    for (int j = 0; j < k; ++j)
        g[j] = acc[j].value();
    return g;
}

double action_pairing(const energy_context& ctx, std::span<const double> coeffs) {
    check_size(ctx, coeffs);
    const auto pairs = ctx.quadrature().pairs();
    const auto D = ctx.quadrature().holder_values(coeffs);
    const auto& a = ctx.kern().a;
    compensated_sum sum;
    for (std::size_t q = 0; q < pairs.size(); ++q)
        if (D[q] != 0)
            sum += pairs[q].weight * a(pairs[q].x, pairs[q].y, D[q]) * D[q];
    return sum.value();
}

double source_pairing(const energy_context& ctx, std::span<const double> coeffs) {
    const auto u = ctx.omega_values(coeffs);
    const auto pts = ctx.omega_points();
    compensated_sum sum;
    for (std::size_t q = 0; q < pts.size(); ++q)
        sum += pts[q].weight * ctx.src().g(u[q]) * u[q];
    return sum.value();
}

normalization normalize(const energy_context& ctx, std::span<const double> coeffs, const double tol) {
    check_size(ctx, coeffs);
    if (std::all_of(coeffs.begin(), coeffs.end(), [](const double c) { return c == 0; }))
        throw degenerate_input_error{"normalize: zero coefficient vector"};
    const auto pairs = ctx.quadrature().pairs();
    const auto D = ctx.quadrature().holder_values(coeffs);
    const auto& A = ctx.kern().A;
    const auto& a = ctx.kern().a;

    // phi(r) = A(r u) and phi'(r) = <A'(r u), u> in one pass
    const auto phi = [&](const double r, double* slope) {
        compensated_sum v, dv;
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            if (D[q] == 0)
                continue;
            const double xi = r * D[q];
            v += pairs[q].weight * A(pairs[q].x, pairs[q].y, xi);
            if (slope)
                dv += pairs[q].weight * a(pairs[q].x, pairs[q].y, xi) * D[q];
        }
        if (slope)
            *slope = dv.value();
        return v.value();
    };

    double slope = 0;
    double value = phi(1, &slope);
    if (!(value > 0))
        throw degenerate_input_error{"normalize: energy vanishes for a nonzero vector"};
    // first guess from the local degree of homogeneity r phi'(r) / phi(r)
    const double degree = std::max(1.0, slope / value);
    double r = std::pow(value, -1 / degree);
    if (!(r > 0) || !std::isfinite(r))
        r = 1;
    value = phi(r, &slope);
    double lo = 0, hi = 0;
    if (value < 1) {
        lo = r;
        hi = 2 * r;
        for (int it = 0; phi(hi, nullptr) < 1; ++it) {
            lo = hi;
            hi *= 2;
            if (it > 2000 || !std::isfinite(hi))
                throw degenerate_input_error{"normalize: energy stays below 1 along the ray"};
        }
    } else {
        hi = r;
        lo = r / 2;
        for (int it = 0; phi(lo, nullptr) >= 1; ++it) {
            hi = lo;
            lo /= 2;
            if (it > 2000 || lo == 0)
                throw degenerate_input_error{"normalize: energy stays above 1 along the ray"};
        }
    }

    // safeguarded Newton inside [lo, hi]
    for (int it = 0; it < 200; ++it) {
        const double res = value - 1;
        if (std::abs(res) <= tol)
            break;
        if (res < 0)
            lo = r;
        else
            hi = r;
        double next = slope > 0 ? r - res / slope : lo + (hi - lo) / 2;
        if (!(next > lo && next < hi))
            next = lo + (hi - lo) / 2;
        if (next == r || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi)
            break;
        r = next;
        value = phi(r, &slope);
    }
    normalization out;
    out.r = r;
    out.unit.assign(coeffs.begin(), coeffs.end());
    for (double& c : out.unit)
        c *= r;
    return out;
}

Eigen::MatrixXd stiffness_matrix(const energy_context& ctx) {
    const int k = ctx.size();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k, k);
    const auto& weight = ctx.kern().linear_weight;
    for (const pair_point& p : ctx.quadrature().pairs()) {
        const pair_stencil st = stencil(p, k);
        const double w = p.weight * (weight ? (*weight)(p.x, p.y) : 1.0);
        for (int i = 0; i < st.count; ++i)
            for (int j = 0; j < st.count; ++j)
                K(st.index[i], st.index[j]) += w * st.value[i] * st.value[j];
    }
    if (!K.allFinite())
        throw assembly_error{"stiffness matrix has non-finite entries"};
    return K;
}

Eigen::MatrixXd mass_matrix(const energy_context& ctx) {
    const int k = ctx.size();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k, k);
    for (const omega_point& p : ctx.omega_points()) {
        const hat_values h = hats_at(p.at, k);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                if (h.index[i] >= 0 && h.index[j] >= 0)
                    B(h.index[i], h.index[j]) += p.weight * h.value[i] * h.value[j];
    }
    if (!B.allFinite())
        throw assembly_error{"mass matrix has non-finite entries"};
    return B;
}

Eigen::MatrixXd hessian_A(const energy_context& ctx, std::span<const double> coeffs) {
    check_size(ctx, coeffs);
    const int k = ctx.size();
    const auto D = ctx.quadrature().holder_values(coeffs);
    const auto pairs = ctx.quadrature().pairs();
    const auto& da = ctx.kern().da;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const pair_stencil st = stencil(pairs[q], k);
        if (st.count == 0)
            continue;
        const double w = pairs[q].weight * da(pairs[q].x, pairs[q].y, D[q]);
        for (int i = 0; i < st.count; ++i)
            for (int j = 0; j < st.count; ++j)
                H(st.index[i], st.index[j]) += w * st.value[i] * st.value[j];
    }
    return H;
}

Eigen::MatrixXd hessian_G(const energy_context& ctx, std::span<const double> coeffs) {
    const int k = ctx.size();
    const auto u = ctx.omega_values(coeffs);
    const auto pts = ctx.omega_points();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t q = 0; q < pts.size(); ++q) {
        const hat_values h = hats_at(pts[q].at, k);
        const double w = pts[q].weight * ctx.src().dg(u[q]);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                if (h.index[i] >= 0 && h.index[j] >= 0)
                    H(h.index[i], h.index[j]) += w * h.value[i] * h.value[j];
    }
    return H;
}

double monotonicity_gap(const energy_context& ctx, std::span<const double> u, std::span<const double> v) {
    check_size(ctx, u);
    check_size(ctx, v);
    const auto pairs = ctx.quadrature().pairs();
    const auto Du = ctx.quadrature().holder_values(u);
    const auto Dv = ctx.quadrature().holder_values(v);
    const auto& a = ctx.kern().a;
    compensated_sum sum;
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const double d = Du[q] - Dv[q];
        if (d == 0)
            continue;
        const auto& p = pairs[q];
        sum += p.weight * (a(p.x, p.y, Du[q]) - a(p.x, p.y, Dv[q])) * d;
    }
    return sum.value();
}

double coercivity_modular(const energy_context& ctx, std::span<const double> coeffs) {
    check_size(ctx, coeffs);
    const auto pairs = ctx.quadrature().pairs();
    const auto D = ctx.quadrature().holder_values(coeffs);
    const auto& kern = ctx.kern();
    compensated_sum sum;
    for (std::size_t q = 0; q < pairs.size(); ++q)
        if (D[q] != 0)
            sum += pairs[q].weight * kern.young.M(kern.coercivity.c * D[q] / 2);
    return kern.coercivity.theta * sum.value();
}

double tail_estimate(const energy_context& ctx, std::span<const double> coeffs) {
    const auto u = ctx.omega_values(coeffs);
    const auto pts = ctx.omega_points();
    const double L = ctx.quadrature().tail_radius();
    const double alpha = ctx.basis().alpha();
    const double beta = ctx.basis().beta();
    const double s = ctx.s();
    const auto& A = ctx.kern().A;
    const gauss_rule& rule = gauss_legendre(5);
    compensated_sum sum;
    for (std::size_t q = 0; q < pts.size(); ++q) {
        if (u[q] == 0)
            continue;
        const double x = pts[q].x;
        // y = beta + L / tau (right) and y = alpha - L / tau (left), tau in (0, 1], graded toward 0
        for (int side = 0; side < 2; ++side) {
            for (int j = 0; j < 60; ++j) {
                const double t_hi = std::ldexp(1.0, -j);
                const double t_lo = t_hi / 2;
                for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
                    const double tau = t_lo + (t_hi - t_lo) * (rule.nodes[g] + 1) / 2;
                    const double wt = (t_hi - t_lo) / 2 * rule.weights[g];
                    const double y = side == 0 ? beta + L / tau : alpha - L / tau;
                    const double dist = std::abs(y - x);
                    const double xi = u[q] / std::pow(dist, s);
                    const double f = (A(x, y, xi) + A(y, x, -xi)) / dist;
                    sum += pts[q].weight * wt * L / (tau * tau) * f;
                }
            }
        }
    }
    return sum.value();
}

}
