#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kfp/exponents.hpp"
#include "kfp/profiles.hpp"
#include "kfp/quadrature.hpp"

using namespace kfp;

namespace {
constexpr double kPi = std::numbers::pi;

// 5-point central first/second derivatives in one variable
template <class F>
double d1(F&& f, double x, double h) {
    return derivative(f, x, h);
}

}  // namespace

TEST_CASE("similarity point coordinates") {
    const auto p = SimilarityPoint::from_xv(0.37, -1.21);
    CHECK(p.zeta == doctest::Approx(-1.21 / std::cbrt(9.0 * 0.37)).epsilon(1e-15));
    CHECK(p.y == doctest::Approx(std::pow(-1.21, 3.0) / (9.0 * 0.37)).epsilon(1e-15));
    CHECK(p.y == doctest::Approx(p.zeta * p.zeta * p.zeta).epsilon(1e-14));
    CHECK_THROWS_AS(SimilarityPoint::from_xv(-0.1, 0.0), std::domain_error);
}

TEST_CASE("lambda_gamma trivials and positivity") {
    CHECK(lambda_gamma(0.0, -17.0) == 1.0);
    CHECK(lambda_gamma(0.0, 0.3) == 1.0);
    for (double gamma : {-0.8, -2.0 / 3.0, -0.3, 0.16}) {
        for (double z = -6.0; z <= 6.0; z += 0.37)
            CHECK(lambda_gamma(gamma, z) > 0.0);
    }
    CHECK_THROWS_AS(lambda_gamma(-0.9, 0.0), std::domain_error);
}

TEST_CASE("Lambda_{-2/3} slope at 0 and far asymptote") {
    CHECK(lambda_gamma_deriv(-2.0 / 3.0, 0.0) == doctest::Approx(3.0).epsilon(1e-6));
    const double z = -20.0;
    CHECK(lambda_gamma(-2.0 / 3.0, z) * z * z == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("integral oracle matches the hypergeometric route") {
    for (double z : {-3.0, 0.0, 1.0, 3.0}) {
        const double direct = lambda_gamma(-2.0 / 3.0, z);
        const double oracle = lambda_m23_oracle(z);
        CHECK(direct == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("first-order ODE for Lambda_{-2/3}") {
    for (double z : {-2.0, -0.5, 0.0, 0.7, 2.0}) {
        const double lp =
            d1([](double s) { return lambda_m23_oracle(s); }, z, 1e-2);
        const double residual = lp + 3.0 * z * z * lambda_m23_oracle(z) - 3.0;
        CHECK(std::abs(residual) < 1e-6);
    }
    // zeta -> -inf tail: Lambda ~ 1/zeta^2
    CHECK(lambda_m23_oracle(-20.0) * 400.0 == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("g_gamma homogeneity and wall limits") {
    const auto c = RestitutionConstants::for_r(0.1);
    for (double gamma : {-2.0 / 3.0, c.alpha}) {
        CHECK(g_gamma(gamma, 8.0 * 0.3, 2.0 * 0.9) ==
              doctest::Approx(std::pow(2.0, 3.0 * gamma) * g_gamma(gamma, 0.3, 0.9))
                  .epsilon(1e-10));
        CHECK(g_gamma(gamma, 0.125 * 0.3, 0.5 * 0.9) ==
              doctest::Approx(std::pow(0.5, 3.0 * gamma) * g_gamma(gamma, 0.3, 0.9))
                  .epsilon(1e-10));
        // 0.5^3 = 0.125 and 2^3 = 8 exercise lambda in {1/2, 2}

        const double wall = std::pow(std::abs(-1.0), 3.0 * gamma) /
                            std::pow(9.0, gamma);
        CHECK(g_gamma(gamma, 1e-9, -1.0) / wall == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(g_gamma_wall(gamma, -1.0) == doctest::Approx(wall).epsilon(1e-14));

        // inelastic wall condition G(0,v) = r^2 G(0,-rv)
        const double lhs = g_gamma(gamma, 1e-9, -1.0);
        const double rhs = 0.1 * 0.1 * g_gamma(gamma, 1e-9, 0.1);
        CHECK(std::abs(lhs - rhs) / lhs < 1e-3);
    }
    CHECK_THROWS_AS(g_gamma(-2.0 / 3.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(g_gamma_wall(-2.0 / 3.0, 0.0), std::domain_error);
}

TEST_CASE("steady kinetic equation residual for G") {
    const auto c = RestitutionConstants::for_r(0.1);
    for (double gamma : {-2.0 / 3.0, c.alpha}) {
        int checked = 0;
        for (double x : {0.2, 0.5, 1.0, 2.0}) {
            for (double v : {-1.5, -0.6, 0.3, 1.0, 1.8}) {
                auto fx = [&](double xx) { return g_gamma(gamma, xx, v); };
                auto fv = [&](double vv) { return g_gamma(gamma, x, vv); };
                const double gx = derivative(fx, x, 1e-4 * (1.0 + x));
                const double gvv = second_derivative(fv, v, 1e-3);
                const double residual = v * gx - gvv;
                const double scale =
                    std::abs(v * gx) + std::abs(gvv) + std::abs(g_gamma(gamma, x, v));
                CHECK(std::abs(residual) / scale < 1e-4);
                ++checked;
            }
        }
        CHECK(checked == 20);
    }
}

TEST_CASE("adjoint profile F_beta") {
    const auto c = RestitutionConstants::for_r(0.1);
    // wall condition F(0,rv) = F(0,-v)
    const double eps = 1e-9;
    const double in = f_beta(c, eps, -1.0);
    const double out = f_beta(c, eps, 0.1);
    CHECK(std::abs(out - in) / in < 1e-3);

    // r = r_c: beta = 0 and F is identically one
    const auto crit = RestitutionConstants::for_r(critical_r());
    CHECK(f_beta(crit, 0.7, -0.9) == doctest::Approx(1.0).epsilon(1e-12));

    // large-y normalization Phi_beta(y) ~ |y|^beta
    CHECK(phi_beta(c.beta, 1e6) / std::pow(1e6, c.beta) ==
          doctest::Approx(1.0).epsilon(1e-3));

    // adjoint equation v F_x + F_vv = 0
    for (double x : {0.3, 0.9}) {
        for (double v : {-1.2, 0.5}) {
            auto fx = [&](double xx) { return f_beta(c, xx, v); };
            auto fv = [&](double vv) { return f_beta(c, x, vv); };
            const double gx = derivative(fx, x, 1e-4 * (1.0 + x));
            const double gvv = second_derivative(fv, v, 1e-3);
            const double scale = std::abs(v * gx) + std::abs(gvv) +
                                 std::abs(f_beta(c, x, v));
            CHECK(std::abs(v * gx + gvv) / scale < 1e-4);
        }
    }
}

TEST_CASE("supersolution") {
    const auto elastic = RestitutionConstants::for_r(1.0);
    CHECK(supersolution_s(elastic, 0.33, -1.7) == 0.5 * 1.7 * 1.7);

    const auto c = RestitutionConstants::for_r(0.5);
    CHECK(supersolution_q(c, 0.0) < 0.0);

    // wall matching S(0,-v) = S(0,rv)
    const double eps = 1e-9;
    CHECK(supersolution_s(c, eps, -1.0) / supersolution_s(c, eps, 0.5) ==
          doctest::Approx(1.0).epsilon(1e-3));

    // L S = S_vv + v S_x = 1
    for (double x : {0.4, 1.1}) {
        for (double v : {-0.8, 0.6}) {
            auto fx = [&](double xx) { return supersolution_s(c, xx, v); };
            auto fv = [&](double vv) { return supersolution_s(c, x, vv); };
            const double sx = derivative(fx, x, 1e-4 * (1.0 + x));
            const double svv = second_derivative(fv, v, 1e-3);
            CHECK(std::abs(svv + v * sx - 1.0) <= 1e-5);
        }
    }
    CHECK_THROWS_AS(supersolution_s(RestitutionConstants::for_r(2.0), 1.0, 1.0),
                    std::domain_error);
}

TEST_CASE("near-origin integrability of G") {
    const auto c = RestitutionConstants::for_r(0.1);
    for (double gamma : {-2.0 / 3.0, c.alpha}) {
        auto mass = [&](int n) {
            // midpoint quadrature over (0,1) x (-1,1), graded in x
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                const double u0 = static_cast<double>(i) / n;
                const double u1 = static_cast<double>(i + 1) / n;
                const double x0 = u0 * u0 * u0, x1 = u1 * u1 * u1;
                const double xm = 0.5 * (x0 + x1);
                if (xm <= 0.0) continue;
                for (int j = 0; j < n; ++j) {
                    const double vm = -1.0 + 2.0 * (j + 0.5) / n;
                    total += (x1 - x0) * (2.0 / n) * g_gamma(gamma, xm, vm);
                }
            }
            return total;
        };
        const double coarse = mass(64);
        const double fine = mass(128);
        CHECK(std::isfinite(fine));
        CHECK(std::abs(fine - coarse) / fine < 0.05);
    }
}

TEST_CASE("profile record wraps evaluation") {
    const auto c = RestitutionConstants::for_r(0.1);
    SelfSimilarProfile prof{c.alpha, c};
    CHECK(prof(0.4, -0.3) == doctest::Approx(g_gamma(c.alpha, 0.4, -0.3)));
    CHECK(prof.wall_limit(-1.0) == doctest::Approx(g_gamma_wall(c.alpha, -1.0)));
}
