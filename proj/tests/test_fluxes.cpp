#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kfp/exponents.hpp"
#include "kfp/fluxes.hpp"

using namespace kfp;

namespace {
constexpr double kPi = std::numbers::pi;
const double kN23 = std::pow(9.0, 2.0 / 3.0);
}  // namespace

TEST_CASE("zeta-Lambda moment") {
    const double target = kPi / std::sqrt(3.0);
    const double m50 = zeta_lambda_moment(50.0);
    CHECK(m50 == doctest::Approx(target).epsilon(5e-3 / target));
    // the integrand vanishes at zeta = 0 by the explicit factor
    const double m100 = zeta_lambda_moment(100.0);
    CHECK(std::abs(m100 - m50) < 1.0 / 50.0);  // 1/M tail bound
    CHECK(std::abs(m100 - m50) < 2e-3);
}

TEST_CASE("boundary flux of G_{-2/3} reproduces the closed form") {
    const double r = 0.1;
    const double target = kN23 * (std::log(r) + kPi / std::sqrt(3.0));
    const double flux = boundary_flux(-2.0 / 3.0, {1.0, 1e-3, r});
    CHECK(std::abs(flux - target) / std::abs(target) < 1e-3);
}

TEST_CASE("boundary flux vanishes at r_c") {
    const double rc = critical_r();
    const double flux = boundary_flux(-2.0 / 3.0, {1.0, 1e-3, rc});
    CHECK(std::abs(flux) < 1e-3);
}

TEST_CASE("delta- and b-invariance of the G_{-2/3} flux") {
    const double r = 0.3;
    const double base = boundary_flux(-2.0 / 3.0, {1.0, 1e-3, r});
    for (double delta : {0.5, 2.0}) {
        const double q = boundary_flux(-2.0 / 3.0, {delta, 1e-3, r});
        CHECK(std::abs(q - base) < 1e-5 * std::abs(base) + 1e-8);
    }
    for (double b : {1e-2, 1e-4}) {
        const double q = boundary_flux(-2.0 / 3.0, {1.0, b, r});
        CHECK(std::abs(q - base) < 1e-3 * std::abs(base));
    }
}

TEST_CASE("G_alpha flux vanishes") {
    const double alpha = alpha_of_r(0.1);
    for (double delta : {0.5, 1.0, 2.0}) {
        const double q = boundary_flux(alpha, {delta, 1.0, 0.1});
        CHECK(std::abs(q) < 2e-3);
    }
    CHECK_THROWS_AS(boundary_flux(-0.95, {1.0, 1.0, 0.1}), std::domain_error);
}

TEST_CASE("Delta_alpha structure") {
    const auto c = RestitutionConstants::for_r(0.05);
    CHECK(delta_alpha(c, 0.0) == doctest::Approx(0.0));
    // K_alpha = K_beta makes the 1/w^2 leading parts cancel:
    // |w Delta| must decay faster than 1/w (log-log slope < -1)
    const double f20 = std::abs(20.0 * delta_alpha(c, 20.0));
    const double f50 = std::abs(50.0 * delta_alpha(c, 50.0));
    const double slope = std::log(f50 / f20) / std::log(50.0 / 20.0);
    CHECK(slope < -1.0);
}

TEST_CASE("C* quadrature cross-validates the closed form") {
    const auto c = RestitutionConstants::for_r(0.05);
    const auto q = c_star_quadrature(c, 50.0);
    const double closed = c_star_closed_form(0.05);
    CHECK(q.value < 0.0);
    CHECK(std::abs(q.value - closed) / std::abs(closed) < 1e-4);
    CHECK_THROWS_AS(c_star_quadrature(RestitutionConstants::for_r(0.5), 50.0),
                    std::domain_error);
}

TEST_CASE("C* quadrature sign across subcritical r") {
    for (double r : {0.02, 0.1, 0.15}) {
        const auto c = RestitutionConstants::for_r(r);
        CHECK(c_star_quadrature(c, 40.0).value < 0.0);
    }
}
