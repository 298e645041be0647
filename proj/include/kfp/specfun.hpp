#pragma once

#include <stdexcept>

namespace kfp {

// Parameter triple of the confluent hypergeometric family used throughout:
// first parameter a, second parameter b restricted to {2/3, 4/3}, real argument z.
struct HypergeometricParams {
    double a = 0.0;
    double b = 2.0 / 3.0;
    double z = 0.0;
    bool b_supported() const;
};

struct LogGamma {
    double log_abs;  // log|Gamma(x)|
    int sign;        // sign of Gamma(x), +1 or -1
};

// log|Gamma| and sign; throws std::domain_error at the poles x = 0, -1, -2, ...
LogGamma ln_gamma(double x);

// Gamma(x) = sign * exp(log_abs); overflows to +-inf for large x.
double gamma_fn(double x);

// 1/Gamma(x), defined everywhere (0 at the poles).
double rgamma(double x);

// Kummer confluent hypergeometric M(a,b,z), real arguments.
// Power series below |z| = 30, asymptotic expansions beyond.
double kummer_m(double a, double b, double z);

// Tricomi confluent hypergeometric U(a,b,z) for b in {2/3, 4/3}, real z.
// For z <= 0 the value is the real analytic continuation obtained from the
// M-connection formula with the real cube-root branch of z^{1-b}.
double tricomi_u(double a, double b, double z);

namespace detail {

// Raw power series sum_n (a)_n/(b)_n z^n/n! with compensated summation.
double kummer_m_series(double a, double b, double z);

// Laplace-integral evaluation of U(a,b,z); requires a > 0, z > 0.
double tricomi_u_laplace(double a, double b, double z);

// Large-z expansion U(a,b,z) ~ z^{-a} sum_n (a)_n(a-b+1)_n/n! (-z)^{-n}.
double tricomi_u_asymptotic(double a, double b, double z);

bool is_nonpositive_integer(double x);

// sin(pi x) and cos(pi x) with argument reduction.
double sin_pi(double x);
double cos_pi(double x);

}  // namespace detail

}  // namespace kfp
