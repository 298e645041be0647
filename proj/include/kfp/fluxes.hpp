#pragma once

#include "kfp/exponents.hpp"

namespace kfp {

// Excised corner domain R_{delta,b} = {0 <= x^{1/3} <= b^{1/3} delta,
// -delta <= v <= r delta}.
struct ExcisionDomain {
    double delta = 1.0;
    double b = 1.0;
    double r = 0.1;
    double x_extent() const { return b * delta * delta * delta; }
};

// int_{-M}^{M} zeta Lambda_{-2/3}(zeta) dzeta; tends to pi/sqrt(3).
double zeta_lambda_moment(double M);

// Line integral of [-v G_gamma n_x + d_v G_gamma n_v] over the three edges of
// R_{delta,b} with x > 0, inward normal. gamma in (-5/6, 1/6].
double boundary_flux(double gamma, const ExcisionDomain& domain);

// Integrand building block of the quadrature route to C*:
// Delta_alpha(w) = U(-a,2/3;-w^3)U(-b,2/3;w^3) - U(-a,2/3;w^3)U(-b,2/3;-w^3).
double delta_alpha(const RestitutionConstants& constants, double w);

struct CStarQuadrature {
    double value = 0.0;      // 9^{2/3}[-(integral + tail) - 2cos(pi(b+1/3)) log r]
    double integral = 0.0;   // int_0^R w Delta_alpha(w) dw
    double tail = 0.0;       // fitted extrapolation of the integral beyond R
    double tail_exponent = 0.0;  // fitted decay power p of |w Delta|
};

// Quadrature route to C*; requires 0 < r < r_c.
CStarQuadrature c_star_quadrature(const RestitutionConstants& constants, double R);

}  // namespace kfp
