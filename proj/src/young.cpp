#include "nle/young.hpp"

#include "nle/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace nle {

struct young_function::impl {
    std::string name;
    young_function::kind kind = young_function::kind::closed_form;
    bisection_options tol;

    virtual ~impl() = default;

    // Both act on t >= 0.
    virtual double density(double t) const = 0;
    virtual double primitive(double t) const = 0;

    virtual double density_inverse(const double y) const {
        if (y == 0)
            return 0;
        const auto f = [this](const double t) { return density(t); };
        auto [lo, hi] = bracket(f, y, "density");
        const double root = bisect_increasing(f, y, lo, hi, tol);
        if (!std::isfinite(density(root)))
            throw unbounded_conjugate_error{name + ": density is infinite before reaching " + std::to_string(y)};
        return root;
    }

    virtual std::shared_ptr<const impl> analytic_conjugate() const { return nullptr; }

    // Finds lo < hi with f(lo) < y <= f(hi) by geometric expansion from t = 1.
    std::pair<double, double> bracket(const std::function<double(double)>& f, const double y,
                                      const char* what) const {
        double lo = 0;
        double hi = 1;
        if (f(hi) >= y) {
            lo = hi / 2;
            int guard = 0;
            while (f(lo) >= y) {
                hi = lo;
                lo /= 2;
                if (++guard > 2000 || lo == 0)
                    return {0.0, hi};
            }
            return {lo, hi};
        }
        int guard = 0;
        while (f(hi) < y) {
            lo = hi;
            hi *= 2;
            if (++guard > 1100 || !std::isfinite(hi))
                throw unbounded_conjugate_error{name + ": " + what + " stays below " + std::to_string(y)};
        }
        return {lo, hi};
    }
};

namespace {

using impl_ptr = std::shared_ptr<const young_function::impl>;

// pow with the small integer exponents of the catalog done by multiplication
double power_of(const double t, const double e) {
    if (e == 1)
        return t;
    if (e == 2)
        return t * t;
    if (e == 3)
        return t * t * t;
    return std::pow(t, e);
}

std::string format_number(const double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

struct power_impl final : young_function::impl {
    double p;

    explicit power_impl(const double exponent)
        : p{exponent} {
        name = "power:" + format_number(p);
    }

    double density(const double t) const override { return power_of(t, p - 1); }
    double primitive(const double t) const override { return power_of(t, p) / p; }
    double density_inverse(const double y) const override { return p == 2 ? y : std::pow(y, 1 / (p - 1)); }

    std::shared_ptr<const impl> analytic_conjugate() const override {
        return std::make_shared<power_impl>(p / (p - 1));
    }
};

struct plog_impl final : young_function::impl {
    double p;

    explicit plog_impl(const double exponent)
        : p{exponent} {
        name = "plog:" + format_number(p);
    }

    double density(const double t) const override {
        const double tp1 = power_of(t, p - 1);
        return p * tp1 * std::log1p(t) + tp1 * t / (1 + t);
    }

    double primitive(const double t) const override { return power_of(t, p) * std::log1p(t); }
};

struct exp_conj_impl;

struct exp_impl final : young_function::impl {
    exp_impl() { name = "exp"; }

    double density(const double t) const override { return std::expm1(t); }
    double primitive(const double t) const override { return std::expm1(t) - t; }
    double density_inverse(const double y) const override { return std::log1p(y); }
    std::shared_ptr<const impl> analytic_conjugate() const override;
};

// (1+t) log(1+t) - t, the Legendre transform of e^t - 1 - t.
struct exp_conj_impl final : young_function::impl {
    exp_conj_impl() { name = "conj(exp)"; }

    double density(const double t) const override { return std::log1p(t); }
    double primitive(const double t) const override { return (1 + t) * std::log1p(t) - t; }
    double density_inverse(const double y) const override { return std::expm1(y); }

    std::shared_ptr<const impl> analytic_conjugate() const override { return std::make_shared<exp_impl>(); }
};

std::shared_ptr<const young_function::impl> exp_impl::analytic_conjugate() const {
    return std::make_shared<exp_conj_impl>();
}

struct tabulated_impl final : young_function::impl {
    std::vector<double> t;
    std::vector<double> m;
    std::vector<double> cumulative; // M at the table nodes

    tabulated_impl(std::vector<double> ts, std::vector<double> ms)
        : t{std::move(ts)}
        , m{std::move(ms)} {
        name = "table";
        kind = young_function::kind::tabulated;
        cumulative.assign(t.size(), 0);
        for (std::size_t i = 1; i < t.size(); ++i)
            cumulative[i] = cumulative[i - 1] + (t[i] - t[i - 1]) * (m[i] + m[i - 1]) / 2;
    }

    std::size_t segment(const double x) const {
        const auto it = std::upper_bound(t.begin(), t.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - t.begin());
        return std::clamp<std::size_t>(i, 1, t.size() - 1) - 1;
    }

    double density(const double x) const override {
        const std::size_t i = segment(x);
        const double slope = (m[i + 1] - m[i]) / (t[i + 1] - t[i]);
        return m[i] + slope * (x - t[i]);
    }

    double primitive(const double x) const override {
        const std::size_t i = segment(x);
        const double mx = density(x);
        return cumulative[i] + (x - t[i]) * (m[i] + mx) / 2;
    }

    double density_inverse(const double y) const override {
        const auto it = std::upper_bound(m.begin(), m.end(), y);
        const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - m.begin()), 1, m.size() - 1) - 1;
        const double slope = (t[i + 1] - t[i]) / (m[i + 1] - m[i]);
        return t[i] + slope * (y - m[i]);
    }
};

struct custom_impl final : young_function::impl {
    std::function<double(double)> m_fn;
    std::function<double(double)> M_fn;

    custom_impl(std::string n, std::function<double(double)> d, std::function<double(double)> p)
        : m_fn{std::move(d)}
        , M_fn{std::move(p)} {
        name = std::move(n);
        kind = young_function::kind::tabulated;
    }

    double density(const double t) const override { return m_fn(t); }
    double primitive(const double t) const override { return M_fn(t); }
};

// Mbar(t) = t s - M(s) with m(s) = t. The density of the conjugate is m^{-1},
// whose inverse is m itself.
struct numeric_conjugate_impl final : young_function::impl {
    impl_ptr base;

    explicit numeric_conjugate_impl(impl_ptr b)
        : base{std::move(b)} {
        name = "conj(" + base->name + ")";
        kind = young_function::kind::tabulated;
        tol = base->tol;
    }

    double density(const double t) const override { return base->density_inverse(t); }

    double primitive(const double t) const override {
        if (t == 0)
            return 0;
        const double s = base->density_inverse(t);
        return t * s - base->primitive(s);
    }

    double density_inverse(const double y) const override { return base->density(y); }

    std::shared_ptr<const impl> analytic_conjugate() const override { return nullptr; }
};

double parse_number(std::string_view text, std::string_view context) {
    double v = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw config_error{"invalid number '" + std::string{text} + "' in '" + std::string{context} + "'"};
    return v;
}

void check_finite(const double t, const char* what) {
    if (!std::isfinite(t))
        throw domain_error{std::string{what} + ": argument is not finite"};
}

}

young_function::young_function(std::shared_ptr<const impl> impl)
    : _impl{std::move(impl)} {}

young_function young_function::power(const double p) {
    if (!(p > 1) || !std::isfinite(p))
        throw config_error{"power Young function needs p > 1, got " + format_number(p)};
    return young_function{std::make_shared<power_impl>(p)};
}

young_function young_function::plog(const double p) {
    if (!(p >= 1) || !std::isfinite(p))
        throw config_error{"plog Young function needs p >= 1, got " + format_number(p)};
    return young_function{std::make_shared<plog_impl>(p)};
}

young_function young_function::exponential() {
    return young_function{std::make_shared<exp_impl>()};
}

young_function young_function::tabulated(std::vector<double> t, std::vector<double> m) {
    if (t.size() != m.size())
        throw config_error{"tabulated density: column lengths differ"};
    if (t.empty())
        throw config_error{"tabulated density: empty table"};
    if (t.front() < 0)
        throw config_error{"tabulated density: negative abscissa"};
    if (t.front() == 0) {
        if (m.front() != 0)
            throw config_error{"tabulated density: m(0) must be 0"};
    } else {
        t.insert(t.begin(), 0.0);
        m.insert(m.begin(), 0.0);
    }
    if (t.size() < 2)
        throw config_error{"tabulated density: need at least one point with t > 0"};
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(m[i]))
            throw config_error{"tabulated density: non-finite entry in row " + std::to_string(i)};
        // plateaus make the conjugate optimality condition set-valued
        if (!(t[i] > t[i - 1]) || !(m[i] > m[i - 1]))
            throw config_error{"tabulated density: columns must be strictly increasing (row " + std::to_string(i) + ")"};
    }
    return young_function{std::make_shared<tabulated_impl>(std::move(t), std::move(m))};
}

young_function young_function::from_csv(const std::string& path) {
    std::ifstream in{path};
    if (!in)
        throw config_error{"cannot open density table '" + path + "'"};
    std::vector<double> t, m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw config_error{path + ":" + std::to_string(lineno) + ": expected 't,m'"};
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return s.substr(b, e - b + 1);
        };
        const std::string a = trim(line.substr(0, comma));
        const std::string b = trim(line.substr(comma + 1));
        double tv = 0, mv = 0;
        const auto ra = std::from_chars(a.data(), a.data() + a.size(), tv);
        const auto rb = std::from_chars(b.data(), b.data() + b.size(), mv);
        const bool ok = ra.ec == std::errc{} && rb.ec == std::errc{} && ra.ptr == a.data() + a.size() &&
                        rb.ptr == b.data() + b.size();
        if (!ok) {
            if (t.empty() && lineno == 1)
                continue; // header
            throw config_error{path + ":" + std::to_string(lineno) + ": non-numeric entry"};
        }
        t.push_back(tv);
        m.push_back(mv);
    }
    auto y = tabulated(std::move(t), std::move(m));
    auto copy = std::make_shared<tabulated_impl>(*std::static_pointer_cast<const tabulated_impl>(y._impl));
    copy->name = "table:" + path;
    return young_function{std::move(copy)};
}

young_function young_function::custom(std::string name, std::function<double(double)> density,
                                      std::function<double(double)> primitive) {
    return young_function{std::make_shared<custom_impl>(std::move(name), std::move(density), std::move(primitive))};
}

young_function young_function::from_spec(const std::string_view spec) {
    if (spec == "exp")
        return exponential();
    if (spec.starts_with("power:"))
        return power(parse_number(spec.substr(6), spec));
    if (spec.starts_with("plog:"))
        return plog(parse_number(spec.substr(5), spec));
    if (spec.starts_with("table:"))
        return from_csv(std::string{spec.substr(6)});
    throw config_error{"unknown Young function '" + std::string{spec} + "'"};
}

double young_function::M(const double t) const {
    check_finite(t, "eval_M");
    return _impl->primitive(std::abs(t));
}

double young_function::m(const double t) const {
    check_finite(t, "eval_m");
    const double v = _impl->density(std::abs(t));
    return t < 0 ? -v : v;
}

double young_function::density_inverse(const double y) const {
    if (!std::isfinite(y) || y < 0)
        throw domain_error{"density_inverse: argument must be finite and >= 0"};
    return _impl->density_inverse(y);
}

double young_function::inverse(const double y) const {
    if (!std::isfinite(y) || y < 0)
        throw domain_error{"inv_M: argument must be finite and >= 0"};
    if (y == 0)
        return 0;
    const auto f = [this](const double t) { return _impl->primitive(t); };
    const auto [lo, hi] = _impl->bracket(f, y, "primitive");
    return bisect_increasing(f, y, lo, hi, _impl->tol);
}

young_function young_function::conjugate() const {
    if (auto c = _impl->analytic_conjugate())
        return young_function{std::move(c)};
    return young_function{std::make_shared<numeric_conjugate_impl>(_impl)};
}

young_function::kind young_function::type() const noexcept {
    return _impl->kind;
}

const std::string& young_function::name() const noexcept {
    return _impl->name;
}

const bisection_options& young_function::tolerances() const noexcept {
    return _impl->tol;
}

delta2_report check_delta2(const young_function& young, const double T, const double t_max) {
    if (!(T > 0) || !(t_max > T))
        throw config_error{"check_delta2: need 0 < T < t_max"};
    delta2_report report;
    constexpr double step = 1.189207115002721; // 2^(1/4)
    for (double t = T; t <= t_max * (1 + 1e-12); t *= step) {
        report.grid.push_back(t);
        const double num = young.M(2 * t);
        const double den = young.M(t);
        const double ratio = std::isfinite(num) && std::isfinite(den) ? num / den
                                                                      : std::numeric_limits<double>::infinity();
        report.ratios.push_back(ratio);
        if (!std::isfinite(ratio))
            break;
    }
    const auto& r = report.ratios;
    report.constant_estimate = *std::max_element(r.begin(), r.end());
    if (!std::isfinite(report.constant_estimate)) {
        report.satisfied = false;
        return report;
    }
    const double tail_start = report.grid.back() / 10;
    std::size_t first = report.grid.size() - 1;
    while (first > 0 && report.grid[first - 1] >= tail_start)
        --first;
    bool increasing = report.grid.size() - first >= 2;
    for (std::size_t i = first + 1; i < r.size() && increasing; ++i)
        increasing = r[i] > r[i - 1];
    const bool grows = increasing && r.back() > r[first] * (1 + 1e-6);
    report.satisfied = !grows;
    return report;
}

double young_gap(const young_function& young, const young_function& conj, const double t, const double tau) {
    return young.M(t) + conj.M(tau) - tau * t;
}

double young_gap(const young_function& young, const double t, const double tau) {
    return young_gap(young, young.conjugate(), t, tau);
}

}
