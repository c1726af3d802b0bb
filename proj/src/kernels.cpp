#include "nle/kernels.hpp"

#include "nle/errors.hpp"
#include "nle/expression.hpp"
#include "nle/numeric.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

namespace nle {

namespace {

double parse_exponent(std::string_view text, std::string_view spec) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw config_error{"invalid exponent in '" + std::string{spec} + "'"};
    return v;
}

// |xi|^{p-2} xi without pow for the common integer exponents
double signed_power(const double xi, const double p) {
    if (p == 2)
        return xi;
    if (p == 3)
        return std::abs(xi) * xi;
    if (xi == 0)
        return 0;
    return std::copysign(std::pow(std::abs(xi), p - 1), xi);
}

double abs_power(const double xi, const double p) {
    const double t = std::abs(xi);
    if (p == 2)
        return t * t;
    if (p == 3)
        return t * t * t;
    return std::pow(t, p);
}

double power_derivative(const double xi, const double p) {
    if (p == 2)
        return 1;
    if (p == 3)
        return 2 * std::abs(xi);
    return (p - 1) * std::pow(std::abs(xi), p - 2);
}

double central_difference(const std::function<double(double)>& f, const double t) {
    const double h = 1e-6 * std::max(1.0, std::abs(t));
    return (f(t + h) - f(t - h)) / (2 * h);
}

kernel make_plap(const double p) {
    if (!(p > 1))
        throw config_error{"plap kernel needs p > 1"};
    kernel k;
    k.name = "plap:" + std::to_string(p);
    k.a = [p](double, double, const double xi) { return signed_power(xi, p); };
    k.A = [p](double, double, const double xi) { return abs_power(xi, p) / p; };
    k.da = [p](double, double, const double xi) { return power_derivative(xi, p); };
    k.young = young_function::power(p);
    k.coercivity = {p, 1};
    // Mbar^{-1}(M(xi)) = (q / p)^{1/q} |xi|^{p-1}
    k.growth.b = std::pow(p - 1, (p - 1) / p);
    k.growth.c = 1;
    if (p == 2)
        k.linear_weight = [](double, double) { return 1.0; };
    return k;
}

// (min, max) of w on a dense grid over [lo, hi]^2
std::pair<double, double> weight_bounds(const weight_function& w, const double lo, const double hi) {
    constexpr int n = 201;
    double wmin = std::numeric_limits<double>::infinity();
    double wmax = -wmin;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = lo + (hi - lo) * i / (n - 1);
            const double y = lo + (hi - lo) * j / (n - 1);
            const double v = w(x, y);
            if (!std::isfinite(v))
                throw config_error{"kernel weight is not finite at (" + std::to_string(x) + ", " +
                                   std::to_string(y) + ")"};
            wmin = std::min(wmin, v);
            wmax = std::max(wmax, v);
        }
    return {wmin, wmax};
}

bool sampled_symmetric(const weight_function& w, const double lo, const double hi) {
    constexpr int n = 41;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) {
            const double x = lo + (hi - lo) * i / (n - 1);
            const double y = lo + (hi - lo) * j / (n - 1);
            const double a = w(x, y), b = w(y, x);
            if (std::abs(a - b) > 1e-12 * (1 + std::abs(a)))
                return false;
        }
    return true;
}

kernel make_weighted_plap(const double p, const std::string& wexpr, const kernel_options& options) {
    kernel base = make_plap(p);
    const auto parsed = expression::parse(wexpr, {"x", "y"});
    const weight_function w = [parsed](const double x, const double y) {
        const std::array<double, 2> v{x, y};
        return parsed(v);
    };
    const auto [wmin, wmax] = weight_bounds(w, options.box_lo, options.box_hi);
    if (!(wmin > 0))
        throw config_error{"weighted-plap: weight must be bounded below by a positive constant (min " +
                           std::to_string(wmin) + ")"};
    kernel k;
    k.name = "weighted-plap:" + std::to_string(p) + ":" + wexpr;
    k.a = [p, w](const double x, const double y, const double xi) { return w(x, y) * signed_power(xi, p); };
    k.A = [p, w](const double x, const double y, const double xi) { return w(x, y) * abs_power(xi, p) / p; };
    k.da = [p, w](const double x, const double y, const double xi) { return w(x, y) * power_derivative(xi, p); };
    k.young = base.young;
    // grid extrema carry a small margin for off-grid points
    k.coercivity = {p * wmin * (1 - 1e-3), 1};
    k.growth.b = base.growth.b * wmax * (1 + 1e-3);
    k.growth.c = 1;
    k.symmetric = sampled_symmetric(w, options.box_lo, options.box_hi);
    if (p == 2)
        k.linear_weight = w;
    return k;
}

kernel make_mlap(const young_function& young, std::string_view young_spec) {
    kernel k;
    k.name = "mlap:" + std::string{young_spec};
    k.a = [young](double, double, const double xi) { return young.m(xi); };
    k.A = [young](double, double, const double xi) { return young.M(xi); };
    if (young_spec.starts_with("plog:")) {
        const double p = parse_exponent(young_spec.substr(5), young_spec);
        k.da = [p](double, double, const double xi) {
            const double t = std::abs(xi);
            if (t == 0)
                return p == 1 ? 2.0 : 0.0;
            const double l = std::log1p(t);
            return p * (p - 1) * std::pow(t, p - 2) * l + 2 * p * std::pow(t, p - 1) / (1 + t) -
                   std::pow(t, p) / ((1 + t) * (1 + t));
        };
        k.coercivity = {p, 1};
    } else {
        k.da = [young](double, double, const double xi) {
            return central_difference([&](const double t) { return young.m(t); }, xi);
        };
        // m(t) t >= M(t) by convexity
        k.coercivity = {1, 1};
        if (young_spec.starts_with("power:"))
            k.coercivity.theta = parse_exponent(young_spec.substr(6), young_spec);
    }
    k.young = young;
    // Mbar(m(t)) = t m(t) - M(t) <= t m(t) <= M(2t)
    k.growth.b = 1;
    k.growth.c = 2;
    return k;
}

kernel make_expr(const std::string& text, const kernel_options& options) {
    const auto parsed = expression::parse(text, {"x", "y", "xi"});
    kernel k;
    k.name = "expr:" + text;
    k.a = [parsed](const double x, const double y, const double xi) {
        const std::array<double, 3> v{x, y, xi};
        return parsed(v);
    };
    const pair_function a = k.a;
    k.A = [a](const double x, const double y, const double xi) {
        if (xi == 0)
            return 0.0;
        auto f = [&](const double tau) { return a(x, y, tau); };
        return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, 0.0, xi, 10, 1e-11);
    };
    k.da = [a](const double x, const double y, const double xi) {
        return central_difference([&](const double t) { return a(x, y, t); }, xi);
    };
    k.young = options.young.value_or(young_function::power(2));
    if (options.growth)
        k.growth = *options.growth;
    if (options.coercivity)
        k.coercivity = *options.coercivity;
    k.symmetric = false;
    return k;
}

}

kernel catalog_kernel(const std::string_view spec, const kernel_options& options) {
    if (spec.starts_with("plap:"))
        return make_plap(parse_exponent(spec.substr(5), spec));
    if (spec.starts_with("mlap:")) {
        const std::string_view ys = spec.substr(5);
        return make_mlap(young_function::from_spec(ys), ys);
    }
    if (spec.starts_with("weighted-plap:")) {
        const std::string_view rest = spec.substr(14);
        const auto colon = rest.find(':');
        if (colon == std::string_view::npos)
            throw config_error{"weighted-plap needs 'weighted-plap:p:<weight expression>'"};
        return make_weighted_plap(parse_exponent(rest.substr(0, colon), spec), std::string{rest.substr(colon + 1)},
                                  options);
    }
    if (spec.starts_with("expr:"))
        return make_expr(std::string{spec.substr(5)}, options);
    throw config_error{"unknown kernel '" + std::string{spec} + "'"};
}

kernel symmetrize(const kernel& k) {
    if (k.symmetric)
        return k;
    kernel out = k;
    out.name = "sym(" + k.name + ")";
    auto average = [](const pair_function& f) -> pair_function {
        return [f](const double x, const double y, const double xi) { return (f(x, y, xi) + f(y, x, xi)) / 2; };
    };
    out.a = average(k.a);
    out.A = average(k.A);
    out.da = average(k.da);
    if (k.linear_weight) {
        const weight_function w = *k.linear_weight;
        out.linear_weight = [w](const double x, const double y) { return (w(x, y) + w(y, x)) / 2; };
    }
    const weight_function d = k.growth.d;
    out.growth.d = [d](const double x, const double y) { return std::max(d(x, y), d(y, x)); };
    out.symmetric = true;
    return out;
}

bool validation_report::all_passed() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.passed; });
}

const condition_result& validation_report::condition(const std::string_view name) const {
    for (const auto& c : conditions)
        if (c.name == name)
            return c;
    throw config_error{"validation report has no condition '" + std::string{name} + "'"};
}

namespace {

class condition_tracker {
public:
    condition_tracker(std::string name, const double tolerance)
        : _result{std::move(name), true, std::numeric_limits<double>::infinity(), {}}
        , _tolerance{tolerance} {}

    void record(const double margin, std::vector<double> sample) {
        if (std::isnan(margin) || margin < _result.worst_margin) {
            _result.worst_margin = std::isnan(margin) ? -std::numeric_limits<double>::infinity() : margin;
            _result.worst_sample = std::move(sample);
        }
    }

    condition_result finish() {
        _result.passed = _result.worst_margin >= -_tolerance;
        return _result;
    }

private:
    condition_result _result;
    double _tolerance;
};

}

validation_report validate_conditions(const kernel& k, const std::size_t samples, const std::uint64_t seed,
                                      const validation_options& options) {
    validation_report report;
    report.kernel = k.name;
    report.samples = samples;
    report.seed = seed;

    const young_function conj = k.young.conjugate();
    condition_tracker odd{"oddness", 1e-12};
    condition_tracker sign{"sign", 0.0};
    condition_tracker growth{"growth", 1e-9};
    condition_tracker mono{"monotonicity", 1e-12};
    condition_tracker coercive{"coercivity", 1e-12};
    condition_tracker primitive{"primitive_bound", 1e-12};

    const auto shift = halton_shift(seed, 6);
    const double lo = options.box_lo, hi = options.box_hi;
    const double lmin = std::log(options.xi_min), lmax = std::log(options.xi_max);
    for (std::size_t n = 0; n < samples; ++n) {
        const auto u = halton_point(n, shift);
        const double x = lo + (hi - lo) * u[0];
        const double y = lo + (hi - lo) * u[1];
        const double xi = (u[4] < 0.5 ? -1 : 1) * std::exp(lmin + (lmax - lmin) * u[2]);
        const double xi2 = (u[5] < 0.5 ? -1 : 1) * std::exp(lmin + (lmax - lmin) * u[3]);
        const std::vector<double> sample{x, y, xi, xi2};

        const double a1 = k.a(x, y, xi);
        const double a1m = k.a(x, y, -xi);
        const double a2 = k.a(x, y, xi2);

        odd.record(-std::abs(a1 + a1m) / (1 + std::abs(a1)), sample);
        sign.record(a1 * xi / (std::abs(xi) * (std::abs(a1) + std::abs(xi))), sample);

        const double diff = (a1 - a2) * (xi - xi2);
        mono.record(diff / ((std::abs(a1) + std::abs(a2)) * std::abs(xi - xi2) + 1e-300), sample);

        // |a| - d <= b Mbar^{-1}(M(c xi))  <=>  Mbar((|a| - d) / b) <= M(c xi)
        const double excess = std::abs(a1) - k.growth.d(x, y);
        const double bound = k.young.M(k.growth.c * xi);
        if (excess <= 0)
            growth.record(1.0, sample);
        else {
            const double lhs = conj.M(excess / k.growth.b);
            growth.record((bound - lhs) / (std::abs(bound) + std::abs(lhs) + 1e-300), sample);
        }

        const double coer_rhs = k.coercivity.theta * k.young.M(k.coercivity.c * xi);
        coercive.record((a1 * xi - coer_rhs) / (std::abs(a1 * xi) + coer_rhs + 1e-300), sample);

        const double A = k.A(x, y, xi);
        primitive.record((a1 * xi - A) / (std::abs(a1 * xi) + std::abs(A) + 1e-300), sample);
    }
    const double A0 = k.A(lo, hi, 0.0);
    primitive.record(A0 == 0 ? 0.0 : -std::abs(A0), {lo, hi, 0.0, 0.0});

    report.conditions = {odd.finish(), sign.finish(), growth.finish(), mono.finish(), coercive.finish(),
                         primitive.finish()};
    return report;
}

namespace {

double atan_power_primitive(const double t, const double p) {
    const double a = std::abs(t);
    if (p == 1)
        return a * std::atan(a) - std::log1p(a * a) / 2;
    if (p == 2)
        return ((a * a + 1) * std::atan(a) - a) / 2;
    if (p == 3)
        return a * a * a * std::atan(a) / 3 - a * a / 6 + std::log1p(a * a) / 6;
    auto f = [p](const double s) { return std::atan(s) * std::pow(s, p - 1); };
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, 0.0, a, 10, 1e-12);
}

}

source catalog_source(const std::string_view spec) {
    source src;
    src.name = std::string{spec};
    if (spec.starts_with("power:")) {
        const double p = parse_exponent(spec.substr(6), spec);
        if (!(p > 1))
            throw config_error{"power source needs p > 1"};
        src.g = [p](const double t) { return signed_power(t, p); };
        src.G = [p](const double t) { return abs_power(t, p) / p; };
        src.dg = [p](const double t) { return power_derivative(t, p); };
        src.growth = {0, std::pow(p - 1, (p - 1) / p), 1, 1};
        src.homogeneity = p;
        return src;
    }
    if (spec.starts_with("atan-power:")) {
        const double p = parse_exponent(spec.substr(11), spec);
        if (!(p >= 1))
            throw config_error{"atan-power source needs p >= 1"};
        src.g = [p](const double t) { return std::atan(std::abs(t)) * signed_power(t, p); };
        src.G = [p](const double t) { return atan_power_primitive(t, p); };
        src.dg = [p](const double t) {
            const double a = std::abs(t);
            return std::pow(a, p - 1) / (1 + a * a) + std::atan(a) * power_derivative(t, p);
        };
        src.growth = {0, std::numbers::pi / 2 * std::pow(p - 1, (p - 1) / p), 1, 1};
        return src;
    }
    throw config_error{"unknown source '" + std::string{spec} + "'"};
}

validation_report validate_source(const source& src, const young_function& young, const std::size_t samples,
                                  const std::uint64_t seed) {
    validation_report report;
    report.kernel = src.name;
    report.samples = samples;
    report.seed = seed;
    const young_function conj = young.conjugate();
    condition_tracker odd{"oddness", 1e-12};
    condition_tracker positive{"positivity", 0.0};
    condition_tracker primitive{"primitive_even_monotone", 1e-12};
    condition_tracker growth{"growth", 1e-9};
    const auto shift = halton_shift(seed, 2);
    for (std::size_t n = 0; n < samples; ++n) {
        const auto u = halton_point(n, shift);
        const double t = std::exp(std::log(1e-3) + (std::log(1e2) - std::log(1e-3)) * u[0]);
        const double t2 = t * (1 + u[1]);
        const std::vector<double> sample{t, t2};
        const double g = src.g(t);
        odd.record(-std::abs(g + src.g(-t)) / (1 + std::abs(g)), sample);
        positive.record(g / (1 + g), sample);
        const double G1 = src.G(t), G2 = src.G(t2);
        const double even = -std::abs(G1 - src.G(-t)) / (1 + G1);
        const double mono = (G2 - G1) / (1 + G2);
        primitive.record(std::min(even, mono), sample);
        const double excess = std::abs(g) - src.growth.e;
        if (excess <= 0)
            growth.record(1.0, sample);
        else {
            const double lhs = conj.M(excess / src.growth.a1);
            const double rhs = src.growth.a2 * young.M(src.growth.a3 * t);
            growth.record((rhs - lhs) / (rhs + lhs + 1e-300), sample);
        }
    }
    primitive.record(src.G(0.0) == 0 ? 0.0 : -1.0, {0.0, 0.0});
    report.conditions = {odd.finish(), positive.finish(), primitive.finish(), growth.finish()};
    return report;
}

}
