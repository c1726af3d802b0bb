#ifndef NLE_NUMERIC_HPP
#define NLE_NUMERIC_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace nle {

struct bisection_options {
    double rtol = 1e-10;
    double atol = 1e-14;
    int max_iter = 200;
};

// Neumaier-compensated accumulator. Energies are sums of ~1e5 small terms and
// finite-difference checks need them accurate to a few ulps.
class compensated_sum {
    double _sum = 0;
    double _comp = 0;

public:
    void add(const double v) noexcept {
        const double t = _sum + v;
        if (std::abs(_sum) >= std::abs(v))
            _comp += (_sum - t) + v;
        else
            _comp += (v - t) + _sum;
        _sum = t;
    }

    compensated_sum& operator+=(const double v) noexcept {
        add(v);
        return *this;
    }

    double value() const noexcept { return _sum + _comp; }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// Root of an increasing function f on [lo, hi] with f(lo) <= target <= f(hi).
// Stops when the bracket width is below atol + rtol * |hi|.
double bisect_increasing(const std::function<double(double)>& f, double target,
                         double lo, double hi, const bisection_options& opt = {});

// Gauss-Legendre rule on [-1, 1].
struct gauss_rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const gauss_rule& gauss_legendre(int order);

// Deterministic 64-bit mixer used to derive offsets from user seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Radical inverse in the given prime base; building block of Halton points.
double radical_inverse(std::uint64_t index, unsigned base) noexcept;

// Scrambled (Cranley-Patterson rotated) Halton point in [0,1)^dim.
std::vector<double> halton_point(std::uint64_t index, std::span<const double> shift);

std::vector<double> halton_shift(std::uint64_t seed, std::size_t dim);

}

#endif
