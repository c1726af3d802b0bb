#include "nle/numeric.hpp"

#include "nle/errors.hpp"

#include <array>
#include <map>
#include <mutex>
#include <numbers>

namespace nle {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw shape_error{"dot: length mismatch"};
    compensated_sum s;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s.value();
}

double norm2(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

double bisect_increasing(const std::function<double(double)>& f, const double target,
                         double lo, double hi, const bisection_options& opt) {
    for (int it = 0; it < opt.max_iter; ++it) {
        if (hi - lo <= opt.atol + opt.rtol * std::abs(hi))
            break;
        const double mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi)
            break;
        if (f(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return lo + (hi - lo) / 2;
}

namespace {

gauss_rule make_gauss(const int order) {
    gauss_rule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = x;
            for (int n = 2; n <= order; ++n) {
                const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // recompute derivative at the converged node
        double p0 = 1, p1 = x;
        for (int n = 2; n <= order; ++n) {
            const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
            p0 = p1;
            p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1);
        rule.nodes[order - 1 - i] = x;
        rule.weights[order - 1 - i] = 2 / ((1 - x * x) * dp * dp);
    }
    return rule;
}

}

const gauss_rule& gauss_legendre(const int order) {
    if (order < 1 || order > 64)
        throw config_error{"gauss_legendre: order must be in [1, 64]"};
    static std::mutex guard;
    static std::map<int, gauss_rule> cache;
    const std::lock_guard lock{guard};
    auto it = cache.find(order);
    if (it == cache.end())
        it = cache.emplace(order, make_gauss(order)).first;
    return it->second;
}

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double radical_inverse(std::uint64_t index, const unsigned base) noexcept {
    const double inv = 1.0 / base;
    double factor = inv;
    double result = 0;
    while (index > 0) {
        result += static_cast<double>(index % base) * factor;
        index /= base;
        factor *= inv;
    }
    return result;
}

namespace {

constexpr std::array<unsigned, 16> primes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}

std::vector<double> halton_shift(const std::uint64_t seed, const std::size_t dim) {
    std::uint64_t state = seed;
    std::vector<double> shift(dim);
    for (double& s : shift)
        s = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    return shift;
}

std::vector<double> halton_point(const std::uint64_t index, std::span<const double> shift) {
    if (shift.size() > primes.size())
        throw config_error{"halton_point: dimension too large"};
    std::vector<double> p(shift.size());
    for (std::size_t d = 0; d < shift.size(); ++d) {
        const double v = radical_inverse(index + 1, primes[d]) + shift[d];
        p[d] = v - std::floor(v);
    }
    return p;
}

}
