#include "nle/fracgrid.hpp"

#include "nle/errors.hpp"
#include "nle/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace nle {

galerkin_basis::galerkin_basis(const double alpha, const double beta, const int k)
    : _alpha{alpha}
    , _beta{beta}
    , _k{k} {
    if (!(alpha < beta) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw config_error{"galerkin_basis: need a non-degenerate interval alpha < beta"};
    if (k < 1)
        throw config_error{"galerkin_basis: need k >= 1"};
    _h = (beta - alpha) / (k + 1);
    _nodes.resize(k + 2);
    for (int i = 0; i <= k + 1; ++i)
        _nodes[i] = alpha + i * _h;
    _nodes.back() = beta;
}

galerkin_basis::location galerkin_basis::locate(const double x) const noexcept {
    if (!(x >= _alpha && x <= _beta))
        return {};
    const double r = (x - _alpha) / _h;
    const int i = std::clamp(static_cast<int>(std::floor(r)), 0, _k);
    return {i, std::clamp(r - i, 0.0, 1.0)};
}

double galerkin_basis::eval(const int j, const double x) const {
    if (j < 0 || j >= _k)
        throw shape_error{"galerkin_basis::eval: index out of range"};
    const double d = std::abs(x - _nodes[j + 1]) / _h;
    return d < 1 ? 1 - d : 0.0;
}

double galerkin_basis::eval(std::span<const double> coeffs, const double x) const {
    if (static_cast<int>(coeffs.size()) != _k)
        throw shape_error{"galerkin_basis::eval: coefficient length does not match basis size"};
    const location at = locate(x);
    if (at.interval < 0)
        return 0;
    // nodal value i is coeffs[i - 1]; the boundary nodes carry zero
    const auto nodal = [&](const int i) { return i >= 1 && i <= _k ? coeffs[i - 1] : 0.0; };
    return nodal(at.interval) * (1 - at.t) + nodal(at.interval + 1) * at.t;
}

galerkin_basis build_basis(const double alpha, const double beta, const int k) {
    return galerkin_basis{alpha, beta, k};
}

double holder_quotient(const galerkin_basis& basis, std::span<const double> coeffs, const double s, const double x,
                       const double y) {
    if (x == y)
        throw diagonal_error{"holder_quotient: x == y"};
    if (!(s > 0 && s < 1))
        throw domain_error{"holder_quotient: s must lie in (0, 1)"};
    return (basis.eval(coeffs, x) - basis.eval(coeffs, y)) / std::pow(std::abs(x - y), s);
}

pair_quadrature::pair_quadrature(galerkin_basis basis, const double s, quad_config cfg, std::vector<pair_point> pairs,
                                 const double tail_radius)
    : _basis{std::move(basis)}
    , _s{s}
    , _cfg{cfg}
    , _pairs{std::move(pairs)}
    , _tail_radius{tail_radius} {}

double pair_quadrature::mass_in(const double x0, const double x1, const double y0, const double y1) const {
    compensated_sum sum;
    for (const pair_point& p : _pairs)
        if (p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1)
            sum += p.weight;
    return sum.value();
}

std::vector<double> pair_quadrature::holder_values(std::span<const double> coeffs) const {
    const int k = _basis.size();
    if (static_cast<int>(coeffs.size()) != k)
        throw shape_error{"holder_values: coefficient length does not match basis size"};
    const auto nodal = [&](const int i) { return i >= 1 && i <= k ? coeffs[i - 1] : 0.0; };
    const auto value = [&](const galerkin_basis::location& at) {
        if (at.interval < 0)
            return 0.0;
        return nodal(at.interval) * (1 - at.t) + nodal(at.interval + 1) * at.t;
    };
    std::vector<double> out(_pairs.size());
    for (std::size_t q = 0; q < _pairs.size(); ++q)
        out[q] = (value(_pairs[q].at_x) - value(_pairs[q].at_y)) * _pairs[q].inv_dist_s;
    return out;
}

namespace {

struct axis_cell {
    double lo;
    double hi;
    bool interior;
};

class pair_builder {
public:
    pair_builder(const galerkin_basis& basis, const double s, const quad_config& cfg)
        : _basis{basis}
        , _s{s}
        , _cfg{cfg}
        , _rule{gauss_legendre(cfg.gauss_order)} {}

    std::vector<pair_point> take() { return std::move(_pairs); }

    // Box with y >= x throughout; it touches the diagonal only if y0 == x1.
    void box(const double x0, const double x1, const double y0, const double y1, const int depth) {
        if (y0 == x1) {
            if (depth >= _cfg.grading_depth) {
                tensor(x0, x1, y0, y1);
                return;
            }
            const double xm = x0 + (x1 - x0) / 2;
            const double ym = y0 + (y1 - y0) / 2;
            box(xm, x1, y0, ym, depth + 1);
            box(x0, xm, y0, ym, depth + 1);
            box(x0, xm, ym, y1, depth + 1);
            box(xm, x1, ym, y1, depth + 1);
            return;
        }
        const double dist = y0 - x1;
        const double limit = _cfg.admissibility * dist;
        const bool split_x = x1 - x0 > limit;
        const bool split_y = y1 - y0 > limit;
        if ((!split_x && !split_y) || depth >= max_admissible_depth) {
            tensor(x0, x1, y0, y1);
            return;
        }
        const double xm = x0 + (x1 - x0) / 2;
        const double ym = y0 + (y1 - y0) / 2;
        if (split_x && split_y) {
            box(x0, xm, y0, ym, depth + 1);
            box(xm, x1, y0, ym, depth + 1);
            box(x0, xm, ym, y1, depth + 1);
            box(xm, x1, ym, y1, depth + 1);
        } else if (split_x) {
            box(x0, xm, y0, y1, depth + 1);
            box(xm, x1, y0, y1, depth + 1);
        } else {
            box(x0, x1, y0, ym, depth + 1);
            box(x0, x1, ym, y1, depth + 1);
        }
    }

    // Upper triangle {a <= x < y <= b} in the variables (x, r = y - x), graded in r.
    void diagonal(const double a, const double b) {
        const double h = b - a;
        const int d = _cfg.grading_depth;
        for (int j = 0; j <= d; ++j) {
            const double r_hi = h * std::ldexp(1.0, -j);
            const double r_lo = j == d ? 0.0 : r_hi / 2;
            for (std::size_t qr = 0; qr < _rule.nodes.size(); ++qr) {
                const double r = r_lo + (r_hi - r_lo) * (_rule.nodes[qr] + 1) / 2;
                const double wr = (r_hi - r_lo) / 2 * _rule.weights[qr];
                const double xlen = h - r;
                for (std::size_t qx = 0; qx < _rule.nodes.size(); ++qx) {
                    const double x = a + xlen * (_rule.nodes[qx] + 1) / 2;
                    const double wx = xlen / 2 * _rule.weights[qx];
                    add(x, x + r, wr * wx / r);
                }
            }
        }
    }

private:
    static constexpr int max_admissible_depth = 40;

    void tensor(const double x0, const double x1, const double y0, const double y1) {
        for (std::size_t i = 0; i < _rule.nodes.size(); ++i) {
            const double x = x0 + (x1 - x0) * (_rule.nodes[i] + 1) / 2;
            const double wx = (x1 - x0) / 2 * _rule.weights[i];
            for (std::size_t j = 0; j < _rule.nodes.size(); ++j) {
                const double y = y0 + (y1 - y0) * (_rule.nodes[j] + 1) / 2;
                const double wy = (y1 - y0) / 2 * _rule.weights[j];
                add(x, y, wx * wy / std::abs(y - x));
            }
        }
    }

    // Stores the node and its mirror with equal weight.
    void add(const double x, const double y, const double w) {
        if (!(x < y) || !(w > 0))
            return;
        const double inv = std::pow(y - x, -_s);
        const auto lx = _basis.locate(x);
        const auto ly = _basis.locate(y);
        _pairs.push_back({x, y, w, inv, lx, ly});
        _pairs.push_back({y, x, w, inv, ly, lx});
    }

    const galerkin_basis& _basis;
    double _s;
    quad_config _cfg;
    const gauss_rule& _rule;
    std::vector<pair_point> _pairs;
};

}

pair_quadrature build_pair_quadrature(const galerkin_basis& basis, const double s, const quad_config& cfg) {
    if (!(s > 0 && s < 1))
        throw config_error{"pair quadrature: s must lie in (0, 1)"};
    if (cfg.cells_per_axis < 2)
        throw config_error{"pair quadrature: cells_per_axis must be >= 2"};
    if (!(cfg.tail_radius_factor > 0))
        throw config_error{"pair quadrature: tail radius must be positive"};
    if (cfg.grading_depth < 0 || cfg.tail_panels < 1 || cfg.gauss_order < 1 || !(cfg.admissibility > 0))
        throw config_error{"pair quadrature: grading_depth >= 0, tail_panels >= 1, gauss_order >= 1 required"};

    const double alpha = basis.alpha();
    const double beta = basis.beta();
    const double L = cfg.tail_radius_factor * (beta - alpha);
    const int k = basis.size();
    const int sub = std::max(1, (cfg.cells_per_axis + k) / (k + 1));
    const double hc = basis.spacing() / sub;

    // exterior offsets from the boundary: one cell of interior size, then geometric up to L
    std::vector<double> offsets{0.0};
    if (L <= hc || cfg.tail_panels == 1) {
        offsets.push_back(L);
    } else {
        const int panels = cfg.tail_panels;
        for (int j = 0; j < panels; ++j)
            offsets.push_back(hc * std::pow(L / hc, static_cast<double>(j) / (panels - 1)));
        offsets.back() = L;
    }

    std::vector<axis_cell> cells;
    for (std::size_t j = offsets.size() - 1; j > 0; --j)
        cells.push_back({alpha - offsets[j], alpha - offsets[j - 1], false});
    cells.back().hi = alpha;
    const auto& nodes = basis.nodes();
    for (int i = 0; i <= k; ++i)
        for (int m = 0; m < sub; ++m) {
            const double lo = m == 0 ? nodes[i] : nodes[i] + m * (nodes[i + 1] - nodes[i]) / sub;
            const double hi = m + 1 == sub ? nodes[i + 1] : nodes[i] + (m + 1) * (nodes[i + 1] - nodes[i]) / sub;
            cells.push_back({lo, hi, true});
        }
    for (std::size_t j = 0; j + 1 < offsets.size(); ++j)
        cells.push_back({beta + offsets[j], beta + offsets[j + 1], false});
    cells[cells.size() - offsets.size() + 1].lo = beta;
    // shared end points must be bitwise equal for corner detection
    for (std::size_t i = 1; i < cells.size(); ++i)
        cells[i].lo = cells[i - 1].hi;

    pair_builder builder{basis, s, cfg};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].interior)
            builder.diagonal(cells[i].lo, cells[i].hi);
        for (std::size_t j = i + 1; j < cells.size(); ++j) {
            if (!cells[i].interior && !cells[j].interior)
                continue;
            builder.box(cells[i].lo, cells[i].hi, cells[j].lo, cells[j].hi, 0);
        }
    }
    return pair_quadrature{basis, s, cfg, builder.take(), L};
}

}
