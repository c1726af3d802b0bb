#ifndef NLE_YOUNG_HPP
#define NLE_YOUNG_HPP

#include "numeric.hpp"

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace nle {

/// A Young function M(t) = int_0^|t| m(s) ds given by its density m.
///
/// Values are immutable and cheap to copy (shared implementation). The density
/// is extended to the whole line by oddness, M by evenness. Catalog entries with
/// an analytic Legendre transform report kind::closed_form; everything else
/// computes the complementary function from the optimality condition m(tau) = t.
class young_function {
public:
    enum class kind { closed_form, tabulated };

    struct impl;

    /// M(t) = |t|^p / p, p > 1.
    static young_function power(double p);
    /// M(t) = |t|^p log(1 + |t|), p >= 1.
    static young_function plog(double p);
    /// m(t) = e^t - 1, M(t) = e^t - 1 - t. Fails the doubling condition.
    static young_function exponential();
    /// Piecewise-linear density through (t_i, m_i); (0, 0) is prepended when
    /// missing and the last slope is continued beyond the table.
    static young_function tabulated(std::vector<double> t, std::vector<double> m);
    /// CSV with one "t,m(t)" pair per line; '#' comments and a header line are skipped.
    static young_function from_csv(const std::string& path);
    /// Arbitrary increasing density with its primitive (both on t >= 0).
    static young_function custom(std::string name, std::function<double(double)> density,
                                 std::function<double(double)> primitive);
    /// "power:p", "plog:p", "exp", "table:<csv path>".
    static young_function from_spec(std::string_view spec);

    double M(double t) const;
    double m(double t) const;
    /// Inverse of the density on [0, inf).
    double density_inverse(double y) const;
    /// t >= 0 with M(t) = y, by bisection on M.
    double inverse(double y) const;
    young_function conjugate() const;

    kind type() const noexcept;
    const std::string& name() const noexcept;

    const bisection_options& tolerances() const noexcept;

    explicit young_function(std::shared_ptr<const impl> impl);

private:
    std::shared_ptr<const impl> _impl;
};

struct delta2_report {
    bool satisfied = true;
    double constant_estimate = 0;
    // The doubling condition is asymptotic; this is a sampled diagnostic only.
    std::string method = "empirical";
    std::vector<double> grid;
    std::vector<double> ratios;
};

/// Samples M(2t)/M(t) on a geometric grid in [T, t_max]. Reports failure when the
/// ratio grows monotonically over the last decade of the grid or overflows.
delta2_report check_delta2(const young_function& young, double T, double t_max);

/// M(t) + Mbar(tau) - tau t. Non-negative; zero iff tau = m(t).
double young_gap(const young_function& young, double t, double tau);
double young_gap(const young_function& young, const young_function& conj, double t, double tau);

}

#endif
