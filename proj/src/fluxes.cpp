#include "kfp/fluxes.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kfp/profiles.hpp"
#include "kfp/quadrature.hpp"
#include "kfp/specfun.hpp"

namespace kfp {

namespace {

constexpr double kPi = std::numbers::pi;
const double kNineTwoThirds = std::pow(9.0, 2.0 / 3.0);
const double kNineThird = std::cbrt(9.0);

// d_v G_gamma(x,v) = 9^{-1/3} x^{gamma-1/3} Lambda'_gamma(v/(9x)^{1/3})
double dv_g(double gamma, double x, double v) {
    const double zeta = v / std::cbrt(9.0 * x);
    return std::pow(x, gamma - 1.0 / 3.0) / kNineThird *
           lambda_gamma_deriv(gamma, zeta);
}

}  // namespace

double zeta_lambda_moment(double M) {
    if (!(M > 0.0)) throw std::domain_error("zeta_lambda_moment: M must be > 0");
    // fold the two half-axes together; the 1/zeta tails cancel pairwise and the
    // remaining integrand decays like zeta^{-4}
    auto paired = [](double z) {
        return z * (lambda_gamma(-2.0 / 3.0, z) - lambda_gamma(-2.0 / 3.0, -z));
    };
    const QuadratureResult q = integrate(paired, 0.0, M, 1e-8, 1e-8);
    if (!q.converged)
        throw std::runtime_error(
            "zeta_lambda_moment: quadrature failed, estimate " +
            std::to_string(q.value) + " +- " + std::to_string(q.error));
    return q.value;
}

double boundary_flux(double gamma, const ExcisionDomain& domain) {
    if (!(gamma > -5.0 / 6.0) || !(gamma <= 1.0 / 6.0 + 1e-12))
        throw std::domain_error("boundary_flux: gamma outside supported range");
    if (!(domain.delta > 0.0) || !(domain.b > 0.0) || !(domain.r > 0.0))
        throw std::domain_error("boundary_flux: domain parameters must be positive");

    const double delta = domain.delta;
    const double B = domain.x_extent();
    const double r = domain.r;

    // edge v = r delta, inward normal (0,-1): -int_0^B d_v G(x, r delta) dx
    auto top = [&](double x) { return dv_g(gamma, x, r * delta); };
    // edge v = -delta, inward normal (0,+1): +int_0^B d_v G(x, -delta) dx
    auto bottom = [&](double x) { return dv_g(gamma, x, -delta); };
    // edge x = B, inward normal (-1,0): +int_{-delta}^{r delta} v G(B,v) dv
    auto side = [&](double v) { return v * g_gamma(gamma, B, v); };

    const QuadratureResult q_top = integrate(top, 0.0, B, 1e-8, 1e-9, 28, 60000);
    const QuadratureResult q_bottom = integrate(bottom, 0.0, B, 1e-8, 1e-9, 28, 60000);
    const QuadratureResult q_side =
        integrate(side, -delta, r * delta, 1e-8, 1e-9, 28, 60000);
    return -q_top.value + q_bottom.value + q_side.value;
}

double delta_alpha(const RestitutionConstants& c, double w) {
    const double w3 = w * w * w;
    const double ua_m = tricomi_u(-c.alpha, 2.0 / 3.0, -w3);
    const double ua_p = tricomi_u(-c.alpha, 2.0 / 3.0, w3);
    const double ub_m = tricomi_u(-c.beta, 2.0 / 3.0, -w3);
    const double ub_p = tricomi_u(-c.beta, 2.0 / 3.0, w3);
    return ua_m * ub_p - ua_p * ub_m;
}

CStarQuadrature c_star_quadrature(const RestitutionConstants& c, double R) {
    if (!(c.r > 0.0) || !(c.r < c.r_c))
        throw std::domain_error("c_star_quadrature: requires 0 < r < r_c");
    if (!(R > 2.0)) throw std::domain_error("c_star_quadrature: R too small");

    auto f = [&](double w) { return w * delta_alpha(c, w); };

    const QuadratureResult head = integrate(f, 0.0, 1.0, 1e-10, 1e-9, 28, 60000);
    const QuadratureResult body = integrate(f, 1.0, R, 1e-10, 1e-9, 28, 120000);
    if (!head.converged || !body.converged)
        throw std::runtime_error("c_star_quadrature: quadrature failed");

    CStarQuadrature out;
    out.integral = head.value + body.value;

    // |w Delta| ~ C w^{-p}: fit p on [0.7R, 0.95R] and extrapolate beyond R
    const double f1 = f(0.70 * R);
    const double f2 = f(0.95 * R);
    if (f1 != 0.0 && f2 != 0.0 && f1 * f2 > 0.0) {
        out.tail_exponent =
            -std::log(std::abs(f2) / std::abs(f1)) / std::log(0.95 / 0.70);
        if (out.tail_exponent > 1.2)
            out.tail = f(R) * R / (out.tail_exponent - 1.0);
    }

    out.value = kNineTwoThirds *
                (-(out.integral + out.tail) -
                 2.0 * std::cos(kPi * (c.beta + 1.0 / 3.0)) * std::log(c.r));
    return out;
}

}  // namespace kfp
