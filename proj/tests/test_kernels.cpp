#include "oracles.hpp"

#include "nle/errors.hpp"
#include "nle/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace nle;

namespace {

double central(const std::function<double(double)>& f, const double t) {
    const double h = 1e-5 * std::max(1.0, std::abs(t));
    return (f(t + h) - f(t - h)) / (2 * h);
}

}

TEST_CASE("catalog kernels are consistent with their primitives") {
    oracle::rng gen{12};
    for (const char* spec : {"plap:2", "plap:3", "plap:1.6", "mlap:plog:2", "mlap:exp", "mlap:power:2.5",
                             "weighted-plap:3:1 + x*x + y*y", "expr:xi + xi^3"}) {
        const kernel k = catalog_kernel(spec);
        CAPTURE(spec);
        for (int n = 0; n < 50; ++n) {
            const double x = gen.uniform(-1, 2), y = gen.uniform(-1, 2), xi = gen.uniform(-4, 4);
            CHECK(central([&](const double t) { return k.A(x, y, t); }, xi) ==
                  doctest::Approx(k.a(x, y, xi)).epsilon(1e-6));
            CHECK(central([&](const double t) { return k.a(x, y, t); }, xi) ==
                  doctest::Approx(k.da(x, y, xi)).epsilon(1e-5));
        }
    }
}

TEST_CASE("catalog errors") {
    CHECK_THROWS_AS(catalog_kernel("plap:1"), config_error);
    CHECK_THROWS_AS(catalog_kernel("laplace"), config_error);
    CHECK_THROWS_AS(catalog_kernel("mlap:cosh"), config_error);
    CHECK_THROWS_AS(catalog_kernel("weighted-plap:2:x"), config_error);
    CHECK_THROWS_AS(catalog_kernel("expr:xi +"), config_error);
    CHECK_THROWS_AS(catalog_source("power:1"), config_error);
    CHECK_THROWS_AS(catalog_source("sine"), config_error);
}

TEST_CASE("linear weights are exposed only for p = 2") {
    CHECK(catalog_kernel("plap:2").linear_weight.has_value());
    CHECK(catalog_kernel("weighted-plap:2:2 + 3 + x*y").linear_weight.has_value());
    CHECK_FALSE(catalog_kernel("plap:3").linear_weight.has_value());
    CHECK_FALSE(catalog_kernel("mlap:power:2").linear_weight.has_value());
}

TEST_CASE("catalog kernels satisfy the structure conditions") {
    for (const char* spec : {"plap:1.5", "plap:2", "plap:5", "mlap:plog:1", "mlap:plog:3", "mlap:exp",
                             "weighted-plap:2:1 + x*x + y*y"}) {
        const auto rep = validate_conditions(catalog_kernel(spec), 20000, 1);
        CAPTURE(spec);
        for (const auto& c : rep.conditions) {
            CAPTURE(c.name);
            CHECK(c.passed);
        }
    }
}

TEST_CASE("the cubic fixture is rejected") {
    const auto rep = validate_conditions(catalog_kernel("expr:xi - xi^3"), 5000, 2);
    CHECK_FALSE(rep.all_passed());
    CHECK_FALSE(rep.condition("sign").passed);
    CHECK_FALSE(rep.condition("monotonicity").passed);
    CHECK(rep.condition("oddness").passed);
    CHECK(rep.samples == 5000);
}

TEST_CASE("validation is deterministic in the seed") {
    const auto k = catalog_kernel("expr:xi - xi^3");
    const auto a = validate_conditions(k, 1000, 7), b = validate_conditions(k, 1000, 7);
    for (std::size_t i = 0; i < a.conditions.size(); ++i) {
        CHECK(a.conditions[i].worst_margin == b.conditions[i].worst_margin);
        CHECK(a.conditions[i].worst_sample == b.conditions[i].worst_sample);
    }
}

TEST_CASE("symmetrized kernels") {
    const auto k = catalog_kernel("weighted-plap:2:2 + x");
    CHECK_FALSE(k.symmetric);
    const auto s = symmetrize(k);
    CHECK(s.symmetric);
    CHECK(s.a(0.2, 0.7, 1.5) == doctest::Approx((k.a(0.2, 0.7, 1.5) + k.a(0.7, 0.2, 1.5)) / 2));
    CHECK(s.a(0.2, 0.7, 1.5) == doctest::Approx(s.a(0.7, 0.2, 1.5)));
    CHECK((*s.linear_weight)(0.2, 0.7) == doctest::Approx(2.45));
}

TEST_CASE("sources") {
    oracle::rng gen{13};
    for (const char* spec : {"power:2", "power:3.5", "atan-power:1", "atan-power:2", "atan-power:3", "atan-power:2.5"}) {
        const auto src = catalog_source(spec);
        CAPTURE(spec);
        for (int n = 0; n < 100; ++n) {
            const double t = gen.uniform(-5, 5);
            CHECK(central(src.G, t) == doctest::Approx(src.g(t)).epsilon(1e-6));
            CHECK(central(src.g, t) == doctest::Approx(src.dg(t)).epsilon(1e-5));
            CHECK(src.G(t) == doctest::Approx(src.G(-t)));
        }
        // the growth constants are stated against the power Young function of the source's own exponent
        const double p = std::stod(std::string{spec}.substr(std::string{spec}.find(':') + 1));
        if (p > 1)
            CHECK(validate_source(src, young_function::power(p), 5000, 1).all_passed());
    }
    CHECK(catalog_source("power:3").homogeneity == 3.0);
    CHECK_FALSE(catalog_source("atan-power:2").homogeneity.has_value());
}
