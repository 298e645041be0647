#include "kfp/exponents.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kfp {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt3 = std::sqrt(3.0);
const double kNineTwoThirds = std::pow(9.0, 2.0 / 3.0);

constexpr double kLo = -5.0 / 6.0;
constexpr double kHi = 1.0 / 6.0;

double y_deriv(double r, double x) {
    return 3.0 * std::log(r) - kPi * std::tan(kPi * (x + 1.0 / 3.0));
}

}  // namespace

double critical_r() { return std::exp(-kPi / kSqrt3); }

double exponent_residual(double r, double x) {
    return (2.0 + 3.0 * x) * std::log(r) +
           std::log(2.0 * std::cos(kPi * (x + 1.0 / 3.0)));
}

double beta_equation_residual(double r, double b) {
    return -3.0 * b * std::log(r) +
           std::log(2.0 * std::sin(kPi * (1.0 / 6.0 - b)));
}

double alpha_of_r(double r) {
    if (!(r > 0.0)) throw std::domain_error("alpha_of_r: r must be positive");
    const double rc = critical_r();
    if (r == rc) return -2.0 / 3.0;  // double root
    // stationary point of y_r separates the wanted root from the universal -2/3
    const double x_rc = std::atan(3.0 / kPi * std::log(r)) / kPi - 1.0 / 3.0;
    double lo, hi;
    const double eps = 1e-15;
    if (r < rc) {
        lo = kLo + eps;
        hi = x_rc;
    } else {
        lo = x_rc;
        hi = kHi - eps;
    }
    // y(x_rc) > 0 and y -> -inf towards the interval boundary; when r is so
    // extreme that the root sits within an ulp of the boundary, the bisection
    // below still homes in on the boundary endpoint.
    double flo = exponent_residual(r, lo);
    double a = lo, b = hi;
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = exponent_residual(r, m);
        const bool left_has_root = (flo < 0.0) != (fm < 0.0);
        if (left_has_root) {
            b = m;
        } else {
            a = m;
            flo = fm;
        }
    }
    double x = 0.5 * (a + b);
    for (int k = 0; k < 2; ++k) {
        const double d = y_deriv(r, x);
        if (d != 0.0) {
            const double step = exponent_residual(r, x) / d;
            const double xn = x - step;
            if (xn > kLo && xn < kHi) x = xn;
        }
    }
    return x;
}

double beta_of_r(double r) { return -alpha_of_r(r) - 2.0 / 3.0; }

double kappa_of_r(double r) {
    if (!(r > 0.0)) throw std::domain_error("kappa_of_r: r must be positive");
    return -kNineTwoThirds * (std::log(r) + kPi / kSqrt3);
}

double c_star_closed_form(double r) {
    const double rc = critical_r();
    if (!(r > 0.0) || !(r < rc))
        throw std::domain_error(
            "c_star_closed_form: defined for 0 < r < r_c only");
    const double a = alpha_of_r(r);
    const double b = -a - 2.0 / 3.0;
    return kNineTwoThirds *
           (kPi / 3.0 * (std::sin(kPi * a) + kSqrt3 * std::cos(kPi * a)) -
            2.0 * std::cos(kPi * (b + 1.0 / 3.0)) * std::log(r));
}

RestitutionConstants RestitutionConstants::for_r(double r) {
    if (!(r > 0.0))
        throw std::domain_error("RestitutionConstants: r must be positive");
    RestitutionConstants c{};
    c.r = r;
    c.r_c = critical_r();
    c.alpha = alpha_of_r(r);
    c.beta = -c.alpha - 2.0 / 3.0;
    c.k_alpha = 2.0 * std::cos(kPi * (c.alpha + 1.0 / 3.0));
    c.kappa = kappa_of_r(r);
    c.c_star = (r < c.r_c) ? c_star_closed_form(r)
                           : std::numeric_limits<double>::quiet_NaN();
    return c;
}

}  // namespace kfp
