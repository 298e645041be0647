#include "kfp/profiles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kfp/quadrature.hpp"
#include "kfp/specfun.hpp"

namespace kfp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGammaLo = -5.0 / 6.0;
constexpr double kGammaHi = 1.0 / 6.0;

// beyond this |zeta| the algebraic asymptote is exact to ~1e-12 relative
constexpr double kZetaAsymptotic = 1e4;

double k_constant(double gamma) {
    return 2.0 * std::cos(kPi * (gamma + 1.0 / 3.0));
}

void check_gamma(double gamma) {
    if (!(gamma > kGammaLo) || !(gamma <= kGammaHi + 1e-12))
        throw std::domain_error("lambda_gamma: gamma outside (-5/6, 1/6], got " +
                                std::to_string(gamma));
}

}  // namespace

SimilarityPoint SimilarityPoint::from_xv(double x, double v) {
    if (!(x >= 0.0)) throw std::domain_error("SimilarityPoint: x must be >= 0");
    SimilarityPoint p{};
    p.x = x;
    p.v = v;
    p.zeta = v / std::cbrt(9.0 * x);
    p.y = v * v * v / (9.0 * x);
    return p;
}

double lambda_gamma(double gamma, double zeta) {
    check_gamma(gamma);
    if (gamma == 0.0) return 1.0;
    if (std::abs(zeta) > kZetaAsymptotic) {
        const double lead = std::pow(std::abs(zeta), 3.0 * gamma);
        return zeta > 0.0 ? k_constant(gamma) * lead : lead;
    }
    return tricomi_u(-gamma, 2.0 / 3.0, -zeta * zeta * zeta);
}

double lambda_gamma_deriv(double gamma, double zeta) {
    const double h = 0.01 * (1.0 + std::abs(zeta));
    return derivative([gamma](double s) { return lambda_gamma(gamma, s); }, zeta, h);
}

double g_gamma(double gamma, double x, double v) {
    if (!(x > 0.0))
        throw std::domain_error(
            "g_gamma: requires x > 0; use g_gamma_wall for the x -> 0+ trace");
    const double zeta = v / std::cbrt(9.0 * x);
    if (std::abs(zeta) > kZetaAsymptotic) return g_gamma_wall(gamma, v);
    return std::pow(x, gamma) * lambda_gamma(gamma, zeta);
}

double g_gamma_wall(double gamma, double v) {
    if (v == 0.0)
        throw std::domain_error("g_gamma_wall: the wall trace diverges at v = 0");
    const double lead = std::pow(std::abs(v), 3.0 * gamma) * std::pow(9.0, -gamma);
    return v > 0.0 ? k_constant(gamma) * lead : lead;
}

double lambda_m23_oracle(double zeta) {
    // substitute s = zeta - u:
    //   Lambda(zeta) = 3 int_0^inf exp(-3 zeta^2 u + 3 zeta u^2 - u^3) du
    auto exponent = [zeta](double u) {
        return u * (-3.0 * zeta * zeta + u * (3.0 * zeta - u));
    };
    double u_max = 1.0;
    while (exponent(u_max) > -750.0 && u_max < 1e12) u_max *= 2.0;
    auto f = [&](double u) { return std::exp(exponent(u)); };
    const QuadratureResult q = integrate(f, 0.0, u_max, 1e-13, 1e-11, 28, 60000);
    if (!q.converged)
        throw std::runtime_error(
            "lambda_m23_oracle: quadrature did not converge, achieved error " +
            std::to_string(q.error));
    return 3.0 * q.value;
}

double phi_beta(double beta, double y) {
    if (beta == 0.0) return 1.0;
    if (std::abs(y) > kZetaAsymptotic * kZetaAsymptotic * kZetaAsymptotic) {
        const double lead = std::pow(std::abs(y), beta);
        // Phi ~ |y|^beta (y -> +inf), K_beta |y|^beta (y -> -inf)
        return y > 0.0 ? lead : k_constant(beta) * lead;
    }
    return tricomi_u(-beta, 2.0 / 3.0, y);
}

double f_beta(const RestitutionConstants& constants, double x, double v) {
    if (!(x > 0.0)) throw std::domain_error("f_beta: requires x > 0");
    const double beta = constants.beta;
    const double y = v * v * v / (9.0 * x);
    if (std::abs(v) > kZetaAsymptotic * std::cbrt(9.0 * x)) {
        const double lead =
            std::pow(std::abs(v), 3.0 * beta) * std::pow(9.0, -beta);
        return v > 0.0 ? lead : k_constant(beta) * lead;
    }
    return std::pow(x, beta) * phi_beta(beta, y);
}

double supersolution_q(const RestitutionConstants& constants, double z) {
    const double r = constants.r;
    if (!(r > 0.0) || !(r <= 1.0))
        throw std::domain_error("supersolution_q: requires 0 < r <= 1");
    if (r == 1.0) return 0.5 * z * z;
    const double c2 = std::pow(9.0, 2.0 / 3.0) * (1.0 - r * r) /
                      (2.0 * (2.0 + r * r));
    const double xi = z * z * z / 9.0;
    double u;
    if (std::abs(z) > kZetaAsymptotic) {
        // U(-2/3,2/3;xi) ~ xi^{2/3} (xi -> +inf), -2 |xi|^{2/3} (xi -> -inf)
        const double lead = std::pow(std::abs(xi), 2.0 / 3.0);
        u = xi > 0.0 ? lead : -2.0 * lead;
    } else {
        u = tricomi_u(-2.0 / 3.0, 2.0 / 3.0, xi);
    }
    return 0.5 * z * z + c2 * u;
}

double supersolution_s(const RestitutionConstants& constants, double x, double v) {
    if (!(x > 0.0)) throw std::domain_error("supersolution_s: requires x > 0");
    if (constants.r == 1.0) return 0.5 * v * v;
    const double z = v / std::cbrt(x);
    if (std::abs(z) > kZetaAsymptotic) {
        const double c2 = std::pow(9.0, 2.0 / 3.0) * (1.0 - constants.r * constants.r) /
                          (2.0 * (2.0 + constants.r * constants.r));
        const double lead = std::pow(std::abs(v), 2.0) * std::pow(9.0, -2.0 / 3.0);
        return 0.5 * v * v + c2 * (z > 0.0 ? lead : -2.0 * lead);
    }
    return std::pow(x, 2.0 / 3.0) * supersolution_q(constants, z);
}

}  // namespace kfp
