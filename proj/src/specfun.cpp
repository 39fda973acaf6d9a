#include "polyens/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "polyens/errors.hpp"

namespace polyens {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogPi = 1.1447298858494002;     // ln(pi)
constexpr double kHalfLog2Pi = 0.91893853320467274;  // ln(2 pi)/2
constexpr double kStirlingRadius = 12.0;

// B_{2k} / (2k (2k-1)) for k = 1..10
constexpr std::array<double, 10> kStirling = {
    1.0 / 12.0,          -1.0 / 360.0,       1.0 / 1260.0,        -1.0 / 1680.0,
    1.0 / 1188.0,        -691.0 / 360360.0,  1.0 / 156.0,         -3617.0 / 122400.0,
    43867.0 / 244188.0,  -174611.0 / 125400.0,
};

cplx stirling(cplx w) {
    const cplx inv = 1.0 / w;
    const cplx inv2 = inv * inv;
    cplx series = kStirling.back();
    for (int k = static_cast<int>(kStirling.size()) - 2; k >= 0; --k) series = series * inv2 + kStirling[k];
    return (w - 0.5) * std::log(w) - w + kHalfLog2Pi + series * inv;
}

// log Gamma for Re z >= 0.5: shift up until Stirling is accurate. The shift
// product is accumulated directly (its modulus stays below 12^12) and the
// phase as a sum of arguments, which keeps the principal branch.
cplx log_gamma_right(cplx z) {
    if (z.imag() == 0.0) return {std::lgamma(z.real()), 0.0};
    cplx prod = 1.0;
    double phase = 0.0;
    cplx w = z;
    while (std::abs(w) < kStirlingRadius) {
        prod *= w;
        phase += std::arg(w);
        w += 1.0;
    }
    return stirling(w) - cplx(std::log(std::abs(prod)), phase);
}

// exp(a + i b) - 1 without cancellation for small |a|, |b|.
cplx expm1_complex(double a, double b) {
    const double em1 = std::expm1(a);
    const double sh = std::sin(0.5 * b);
    const double re = em1 * std::cos(b) - 2.0 * sh * sh;
    const double im = (em1 + 1.0) * std::sin(b);
    return {re, im};
}

}  // namespace

bool is_nonpositive_integer(double x, double tol) {
    if (x > tol) return false;
    return std::abs(x - std::round(x)) <= tol;
}

cplx log_gamma(cplx z) {
    const double x = z.real();
    const double y = z.imag();
    if (!std::isfinite(x) || !std::isfinite(y)) throw DomainError("log_gamma: non-finite argument");
    if (std::abs(y) <= 1e-12 && is_nonpositive_integer(x)) {
        throw PoleError("log_gamma: pole at z = " + std::to_string(x));
    }
    if (x >= 0.5) return log_gamma_right(z);
    if (y < 0.0 || (y == 0.0 && std::signbit(y))) return std::conj(log_gamma(std::conj(z)));

    // Upper half-plane reflection with the continuous branch
    //   S(z) = -i pi z + Log(1 - e^{2 i pi z}) - ln 2 + i pi/2,
    // which vanishes at z = 1/2, so log Gamma(z) = ln pi - S(z) - log Gamma(1 - z).
    const double frac = x - std::round(x);
    const cplx one_minus = -expm1_complex(-2.0 * kPi * y, 2.0 * kPi * frac);
    const cplx s = cplx(kPi * y, -kPi * x) + std::log(one_minus) - std::numbers::ln2 + cplx(0.0, 0.5 * kPi);
    return kLogPi - s - log_gamma_right(1.0 - z);
}

double log_abs_gamma(double x, int* sign) {
    if (is_nonpositive_integer(x, 0.0)) throw PoleError("log_abs_gamma: pole at x = " + std::to_string(x));
    int sg = 1;
    const double v = ::lgamma_r(x, &sg);
    if (sign) *sign = sg;
    return v;
}

double rgamma(double x) {
    if (is_nonpositive_integer(x)) return 0.0;
    int sg = 1;
    const double lg = ::lgamma_r(x, &sg);
    return sg * std::exp(-lg);
}

cplx pochhammer(cplx a, unsigned k) {
    cplx p = 1.0;
    for (unsigned j = 0; j < k; ++j) p *= a + static_cast<double>(j);
    return p;
}

double pochhammer(double a, unsigned k) {
    double p = 1.0;
    for (unsigned j = 0; j < k; ++j) p *= a + static_cast<double>(j);
    return p;
}

WrightResult wright_bessel_detail(const WrightParams& p, double x, const WrightOptions& opts) {
    if (!(p.b > 0.0)) throw DomainError("wright_bessel: b must be positive");
    if (!(x >= 0.0)) throw DomainError("wright_bessel: x must be nonnegative");
    if (x > opts.x_max) {
        throw DomainError("wright_bessel: x = " + std::to_string(x) + " exceeds x_max = " +
                          std::to_string(opts.x_max));
    }
    WrightResult out;
    if (x == 0.0) {
        out.value = rgamma(p.a);
        out.terms = 1;
        return out;
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double log_x = std::log(x);

    // Integer b or integer 1/b admit an exact multiplicative recurrence with
    // lag 1 or lag 1/b; otherwise every term is formed in log space.
    int lag = 0;
    int b_int = 0;
    if (std::abs(p.b - std::round(p.b)) < 1e-14) {
        lag = 1;
        b_int = static_cast<int>(std::round(p.b));
    } else if (std::abs(1.0 / p.b - std::round(1.0 / p.b)) < 1e-12) {
        lag = static_cast<int>(std::round(1.0 / p.b));
    }
    std::vector<double> terms;
    std::vector<double> rel;  // relative error bound per term

    auto log_space = [&](int j, double* r) {
        const double arg = p.a + j * p.b;
        if (is_nonpositive_integer(arg)) {
            *r = 0.0;
            return 0.0;
        }
        int sg = 1;
        const double lg = ::lgamma_r(arg, &sg);
        const double lf = std::lgamma(j + 1.0);
        const double e = j * log_x - lf - lg;
        *r = eps * (std::abs(j * log_x) + std::abs(lf) + std::abs(lg) + 4.0);
        return ((j & 1) ? -1.0 : 1.0) * sg * std::exp(e);
    };

    double sum = 0.0;
    double comp = 0.0;
    double abs_sum = 0.0;
    double err = 0.0;
    double max_term = 0.0;
    double prev_mag = std::numeric_limits<double>::infinity();
    int small_run = 0;
    for (int j = 0; j < opts.max_terms; ++j) {
        double r = 0.0;
        double term = 0.0;
        const int k = j - lag;
        if (lag > 0 && k >= 0 && terms[k] != 0.0) {
            double factor = 1.0;
            if (lag == 1) {
                factor = -x / j;
                const double base = p.a + (j - 1) * p.b;
                for (int i = 0; i < b_int; ++i) factor /= base + i;
            } else {
                factor = ((lag & 1) ? -1.0 : 1.0);
                for (int i = 0; i < lag; ++i) factor *= x / (j - i);
                factor /= p.a + static_cast<double>(k) / lag;
            }
            term = terms[k] * factor;
            r = rel[k] + (2.0 * lag + 4.0) * eps;
        } else {
            term = log_space(j, &r);
        }
        terms.push_back(term);
        rel.push_back(r);
        out.terms = j + 1;

        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
        const double mag = std::abs(term);
        abs_sum += mag;
        err += mag * r;
        max_term = std::max(max_term, mag);
        if (mag == 0.0 && !(p.a + j * p.b > 0.0)) continue;

        const double total = std::abs(sum + comp);
        const bool decreasing = mag < prev_mag || mag == 0.0;
        prev_mag = mag;
        if (p.a + j * p.b > 0.0 && decreasing && mag <= opts.rel_stop * std::max(total, eps * max_term)) {
            if (++small_run >= 3) {
                out.value = sum + comp;
                out.abs_error = err + 2.0 * eps * abs_sum;
                return out;
            }
        } else {
            small_run = 0;
        }
    }
    throw ConvergenceError("wright_bessel: series did not terminate within " + std::to_string(opts.max_terms) +
                           " terms");
}

double wright_bessel(const WrightParams& p, double x, const WrightOptions& opts) {
    return wright_bessel_detail(p, x, opts).value;
}

}  // namespace polyens
