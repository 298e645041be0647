#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kfp/exponents.hpp"

using namespace kfp;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("critical r closed form") {
    // e^{-pi/sqrt(3)}; reference digits from an arbitrary-precision evaluation
    CHECK(critical_r() == doctest::Approx(0.16303353482158046).epsilon(1e-14));
    CHECK(critical_r() == doctest::Approx(std::exp(-1.8137993642342178)).epsilon(1e-12));
}

TEST_CASE("r_c is a double root of the exponent equation") {
    const double rc = critical_r();
    CHECK(std::abs(exponent_residual(rc, -2.0 / 3.0)) < 1e-12);
    // derivative 3 log r - pi tan(pi(x+1/3)) vanishes at x = -2/3
    const double d =
        3.0 * std::log(rc) - kPi * std::tan(kPi * (-2.0 / 3.0 + 1.0 / 3.0));
    CHECK(std::abs(d) < 1e-12);
    CHECK(alpha_of_r(rc) == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("alpha landmark values") {
    CHECK(std::abs(alpha_of_r(1.0)) < 1e-12);
    // golden value at r = 0.05, pinned by bisection on the exponent equation
    const double a005 = alpha_of_r(0.05);
    CHECK(a005 > -5.0 / 6.0);
    CHECK(a005 < -2.0 / 3.0);
    CHECK(std::abs(exponent_residual(0.05, a005)) < 1e-12);
    CHECK(a005 == doctest::Approx(-0.7700914217324121).epsilon(1e-9));
}

TEST_CASE("alpha monotone increasing with correct limits") {
    double prev = -1.0;
    for (int k = 0; k < 100; ++k) {
        const double r = std::pow(10.0, -4.0 + 6.0 * k / 99.0);
        const double a = alpha_of_r(r);
        CHECK(a > prev);
        CHECK(std::abs(exponent_residual(r, a)) < 1e-10);
        prev = a;
    }
    CHECK(std::abs(alpha_of_r(1e-6) + 5.0 / 6.0) < 1e-3);
    CHECK(std::abs(alpha_of_r(1e6) - 1.0 / 6.0) < 1e-3);
}

TEST_CASE("Kr residual over the sweep") {
    for (int k = 0; k < 50; ++k) {
        const double r = std::pow(10.0, -3.0 + 4.0 * k / 49.0);
        const double a = alpha_of_r(r);
        const double kr =
            std::pow(r, 2.0 + 3.0 * a) * 2.0 * std::cos(kPi * (a + 1.0 / 3.0));
        CHECK(std::abs(kr - 1.0) < 1e-10);
    }
}

TEST_CASE("beta values and equation residual") {
    CHECK(beta_of_r(1.0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(beta_of_r(critical_r())) < 1e-12);
    CHECK(std::abs(beta_of_r(1e-6) - 1.0 / 6.0) < 1e-3);
    for (int k = 0; k < 40; ++k) {
        const double r = std::pow(10.0, -3.0 + 4.0 * k / 39.0);
        CHECK(std::abs(beta_equation_residual(r, beta_of_r(r))) < 1e-9);
    }
}

TEST_CASE("kappa closed form") {
    CHECK(std::abs(kappa_of_r(critical_r())) < 1e-12);
    const double expected = -std::pow(9.0, 2.0 / 3.0) * kPi / std::sqrt(3.0);
    CHECK(kappa_of_r(1.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(kappa_of_r(1.0) == doctest::Approx(-7.8478540610719536).epsilon(1e-12));
    for (int k = 1; k <= 50; ++k) {
        const double r = critical_r() * k / 51.0;
        CHECK(kappa_of_r(r) > 0.0);
    }
}

TEST_CASE("c_star closed form: sign, domain, critical limit") {
    CHECK_THROWS_AS(c_star_closed_form(0.5), std::domain_error);
    CHECK_THROWS_AS(c_star_closed_form(critical_r()), std::domain_error);
    CHECK(c_star_closed_form(0.05) < 0.0);
    CHECK(c_star_closed_form(0.02) < 0.0);
    CHECK(std::abs(c_star_closed_form(0.999 * critical_r())) < 0.05);
}

TEST_CASE("RestitutionConstants record") {
    const auto c = RestitutionConstants::for_r(0.1);
    CHECK(c.subcritical());
    CHECK(c.beta == doctest::Approx(-c.alpha - 2.0 / 3.0).epsilon(1e-15));
    CHECK(c.k_alpha ==
          doctest::Approx(2.0 * std::cos(kPi * (c.alpha + 1.0 / 3.0))).epsilon(1e-15));
    CHECK(c.c_star < 0.0);
    const auto sup = RestitutionConstants::for_r(0.5);
    CHECK(!sup.subcritical());
    CHECK(std::isnan(sup.c_star));
    CHECK_THROWS_AS(RestitutionConstants::for_r(-1.0), std::domain_error);
}
