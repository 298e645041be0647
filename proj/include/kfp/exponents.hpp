#pragma once

namespace kfp {

// Every scalar derived from the restitution coefficient r, computed once and
// shared read-only by the rest of the code.
struct RestitutionConstants {
    double r;        // restitution coefficient, > 0
    double r_c;      // critical value exp(-pi/sqrt(3))
    double alpha;    // profile exponent, unique root in (-5/6,1/6) away from -2/3
    double beta;     // adjoint exponent, beta = -alpha - 2/3
    double k_alpha;  // 2 cos(pi (alpha + 1/3))
    double kappa;    // -9^{2/3} [log r + pi/sqrt(3)]
    double c_star;   // coupling constant; NaN for r >= r_c (not defined there)

    bool subcritical() const { return r < r_c; }
    static RestitutionConstants for_r(double r);
};

// exp(-pi/sqrt(3))
double critical_r();

// Root of (2+3a) log r + log(2 cos(pi(a+1/3))) = 0 in (-5/6,1/6), distinct
// from the universal root -2/3 (returned exactly at r = r_c, the double root).
double alpha_of_r(double r);

double beta_of_r(double r);

double kappa_of_r(double r);

// 9^{2/3} [ (pi/3)(sin(pi a) + sqrt(3) cos(pi a)) - 2 cos(pi(b+1/3)) log r ]
// with a = alpha(r), b = beta(r); defined for 0 < r < r_c only.
double c_star_closed_form(double r);

// y_r(x): residual of the exponent equation, exposed for root diagnostics.
double exponent_residual(double r, double x);

// residual of the beta equation -3 b log r + log(2 sin(pi(1/6 - b)))
double beta_equation_residual(double r, double b);

}  // namespace kfp
