#pragma once

#include <complex>

namespace polyens {

using cplx = std::complex<double>;

/// Principal branch of log Gamma(z): analytic on C minus (-inf, 0], real on
/// the positive axis. On the negative real axis the value is the limit from
/// above, or from below when Im z is -0.0.
/// Throws PoleError at nonpositive integers (within 1e-12).
cplx log_gamma(cplx z);

/// log|Gamma(x)| for real x together with the sign of Gamma(x).
/// Throws PoleError at nonpositive integers.
double log_abs_gamma(double x, int* sign);

/// 1/Gamma(x) for real x, exactly 0 at nonpositive integers.
double rgamma(double x);

/// a (a+1) ... (a+k-1) by direct product.
cplx pochhammer(cplx a, unsigned k);
double pochhammer(double a, unsigned k);

/// True when x is within tol of an integer <= 0.
bool is_nonpositive_integer(double x, double tol = 1e-12);

struct WrightParams {
    double a = 1.0;
    double b = 1.0;  // > 0
};

struct WrightOptions {
    double x_max = 1e4;
    double rel_stop = 1e-16;  // term/partial-sum ratio treated as negligible
    int max_terms = 10000;
};

struct WrightResult {
    double value = 0.0;
    double abs_error = 0.0;  // rounding estimate from the largest term
    int terms = 0;
};

/// Wright's generalized Bessel function sum_j (-x)^j / (j! Gamma(a + j b)).
/// Throws DomainError for x < 0 or x > x_max, ConvergenceError when the
/// term cap is reached.
WrightResult wright_bessel_detail(const WrightParams& p, double x, const WrightOptions& opts = {});

double wright_bessel(const WrightParams& p, double x, const WrightOptions& opts = {});

}  // namespace polyens
