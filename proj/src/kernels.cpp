#include "polyens/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "polyens/errors.hpp"
#include "polyens/quad.hpp"

namespace polyens {

namespace {

constexpr double kPi = std::numbers::pi;

double lg(double x) {
    int sign = 0;
    const double v = log_abs_gamma(x, &sign);
    if (sign < 0) throw DomainError("gamma factor expected to be positive");
    return v;
}

// nu_0 = 0 followed by nu_1..nu_M.
std::vector<double> full_nu(const std::vector<int>& nu) {
    std::vector<double> out{0.0};
    for (int v : nu) out.push_back(v);
    return out;
}

std::vector<double> full_nu(const std::vector<double>& nu) {
    std::vector<double> out{0.0};
    out.insert(out.end(), nu.begin(), nu.end());
    return out;
}

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

void check_k(const TruncationModelParams& p, int k, int hi) {
    if (k < 0 || k > hi) throw DomainError("index k = " + std::to_string(k) + " out of range");
    (void)p;
}

}  // namespace

void HardEdgeParams::validate() const {
    if (nu.empty()) throw DomainError("hard-edge kernel needs M >= 1 parameters");
    for (double v : nu)
        if (!(v > -1.0)) throw DomainError("hard-edge parameters must exceed -1");
}

void BorodinParams::validate() const {
    if (!(alpha > -1.0)) throw DomainError("Borodin kernel needs alpha > -1");
    if (!(theta > 0.0)) throw DomainError("Borodin kernel needs theta > 0");
}

const char* to_string(KernelRoute r) {
    switch (r) {
        case KernelRoute::contour: return "contour";
        case KernelRoute::biorthogonal_sum: return "biorthogonal_sum";
        case KernelRoute::meijer_product: return "meijer_product";
    }
    return "?";
}

KernelRoute kernel_route_from_string(const std::string& s) {
    if (s == "contour") return KernelRoute::contour;
    if (s == "biorthogonal_sum") return KernelRoute::biorthogonal_sum;
    if (s == "meijer_product") return KernelRoute::meijer_product;
    throw DomainError("unknown kernel route '" + s + "'");
}

// ---------------------------------------------------------------------------
// Biorthogonal functions

namespace {

// Extended precision: P_k has alternating coefficients whose cancellation
// dominates the error of integrals against Q_j.
std::vector<long double> pk_coefficients_ld(const TruncationModelParams& params, int k) {
    params.validate();
    check_k(params, k, params.n);
    const long double L = params.l - 2.0L * params.n;
    const auto nu = full_nu(params.nu);
    // c_k = 1 and c_{t-1} / c_t = -prod_j (t + nu_j) / ((k - t + 1)(L + k + t)):
    // integer factors, one rounding per step.
    std::vector<long double> c(k + 1);
    c[k] = 1.0L;
    for (int t = k; t >= 1; --t) {
        long double num = -1.0L;
        for (double v : nu) num *= t + static_cast<long double>(v);
        c[t - 1] = c[t] * num / ((k - t + 1.0L) * (L + k + t));
    }
    return c;
}

long double horner(const std::vector<long double>& c, long double x) {
    long double s = 0.0L;
    for (std::size_t t = c.size(); t-- > 0;) s = s * x + c[t];
    return s;
}

}  // namespace

std::vector<double> pk_coefficients(const TruncationModelParams& params, int k) {
    const auto c = pk_coefficients_ld(params, k);
    return std::vector<double>(c.begin(), c.end());
}

double pk(const TruncationModelParams& params, int k, double x) {
    return static_cast<double>(horner(pk_coefficients_ld(params, k), x));
}

double pk_hypergeometric(const TruncationModelParams& params, int k, double x) {
    params.validate();
    check_k(params, k, params.n);
    const double L = params.l - 2.0 * params.n;
    double lpref = lg(L + k + 1.0) - lg(L + 2.0 * k + 1.0);
    for (int v : params.nu) lpref += lg(k + 1.0 + v) - lg(v + 1.0);
    // terminating 2F_M(-k, L+k+1; 1+nu_1..1+nu_M; x)
    double term = 1.0, sum = 1.0;
    for (int j = 0; j < k; ++j) {
        double den = j + 1.0;
        for (int v : params.nu) den *= 1.0 + v + j;
        term *= (-k + j) * (L + k + 1.0 + j) / den * x;
        sum += term;
    }
    return (k % 2 ? -1.0 : 1.0) * std::exp(lpref) * sum;
}

WeightFunction qk_function(const TruncationModelParams& params, int k) {
    params.validate();
    check_k(params, k, params.n - 1);
    const double L = params.l - 2.0 * params.n;
    const auto nu = full_nu(params.nu);
    double lpref = lg(L + 2.0 * k + 2.0);
    for (double v : nu) lpref -= lg(k + 1.0 + v);
    WeightFunction q;
    q.log_prefactor = lpref;
    q.spec = MeijerGSpec::make(params.M + 1, 0, {-double(k), L + k + 1.0}, nu);
    q.support = params.M == 1 ? Support::unit_interval : Support::positive_axis;
    return q;
}

MeijerValue qk_detail(const TruncationModelParams& params, int k, double y, const MeijerOptions& opts) {
    const WeightFunction q = qk_function(params, k);
    if (params.M != 1 || !(y > 0.0) || y >= 1.0) return q.evaluate(y, opts);
    // G^{2,0}_{2,2} on (0, 1) as a terminating series in 1 - y, summed in
    // extended precision. The residue sum in y cancels heavily near y = 1;
    // below 1/2 whichever form has the smaller error estimate wins.
    const double L = params.l - 2.0 * params.n;
    const double nu1 = params.nu[0];
    const double c = L + 1.0 - nu1;
    const double z = 1.0 - y;
    long double term = 1.0L, sum = 1.0L, abs_sum = 1.0L;
    for (int j = 0; j < k; ++j) {
        term *= (L + k + 1.0L + j) * (-k + j) / ((c + j) * (j + 1.0L)) * z;
        sum += term;
        abs_sum += std::fabs(term);
    }
    const double lpref = q.log_prefactor - lg(c) + nu1 * std::log(y) + (c - 1.0) * std::log(z);
    MeijerValue out;
    out.value = static_cast<double>(sum) * std::exp(lpref);
    out.est_error = static_cast<double>(16.0L * std::numeric_limits<long double>::epsilon() * abs_sum) * std::exp(lpref) +
                    4.0 * std::numeric_limits<double>::epsilon() * std::abs(out.value);
    out.route = "series_one_minus_x";
    out.converged = true;
    if (y >= 0.5) return out;
    MeijerValue alt = q.evaluate(y, opts);
    return alt.est_error < out.est_error ? alt : out;
}

double qk(const TruncationModelParams& params, int k, double y, const MeijerOptions& opts) {
    return qk_detail(params, k, y, opts).value;
}

namespace {

// Extended-precision pieces for the biorthogonality check. Entries of
// int P_j Q_k cancel across magnitudes up to ~1e9 for n = 8, M = 3, so Q_k and
// the quadrature sums are carried in long double.
using ld = long double;
using cld = std::complex<long double>;

// log Gamma(z) for Re z > 0 (principal branch), Stirling after upward shift.
cld log_gamma_ld(cld z) {
    static constexpr ld kB[] = {1.0L / 6, -1.0L / 30, 1.0L / 42, -1.0L / 30, 5.0L / 66, -691.0L / 2730,
                                7.0L / 6, -3617.0L / 510, 43867.0L / 798, -174611.0L / 330};
    cld shift = 0.0L;
    while (std::abs(z) < 20.0L) {
        shift += std::log(z);
        z += 1.0L;
    }
    const cld inv = 1.0L / z;
    const cld inv2 = inv * inv;
    cld series = 0.0L;
    cld p = inv;
    for (int m = 1; m <= 10; ++m) {
        series += kB[m - 1] / ld((2 * m) * (2 * m - 1)) * p;
        p *= inv2;
    }
    return (z - 0.5L) * std::log(z) - z + 0.5L * std::log(2.0L * std::numbers::pi_v<ld>) + series - shift;
}

// log of the Q_k prefactor Gamma(L + 2k + 2) / Prod_{j=0..M} Gamma(k + 1 + nu_j).
ld qk_log_prefactor_ld(const TruncationModelParams& p, int k) {
    const int L = p.l - 2 * p.n;
    ld v = 1.0L;
    for (int i = k + 1; i <= L + 2 * k + 1; ++i) v *= i;  // Gamma(L + 2k + 2) / Gamma(k + 1)
    for (int nu : p.nu)
        for (int i = 1; i <= k + nu; ++i) v /= i;
    return std::log(v);
}

// Q_k(y) for M >= 2 by the trapezoid rule on Re s = c, where the integrand
// Prod_{i=1..k}(s - i) Prod_j Gamma(s + nu_j) / Gamma(s + L + k + 1) y^{-s}
// is analytic for Re s > -min nu. Among a few abscissae around the real-axis
// minimum, the one with the smallest coarse L1 norm is used.
ld qk_line_ld(const TruncationModelParams& p, int k, ld log_pref, ld y) {
    const ld L = p.l - 2.0L * p.n;
    const ld ly = std::log(y);
    int nu_min = p.nu[0];
    for (int v : p.nu) nu_min = std::min(nu_min, v);
    auto phi = [&](ld c) {
        ld v = -std::lgamma(c + L + k + 1) - c * ly;
        for (int nu : p.nu) v += std::lgamma(c + nu);
        for (int i = 1; i <= k; ++i) v += std::log(c + i);
        return v;
    };
    ld d0 = 0.5L, best = std::numeric_limits<ld>::infinity();
    for (ld t = -3.0L; t <= 8.0L; t += 0.05L) {
        const ld d = std::exp(t);
        const ld v = phi(d - nu_min);
        if (v < best) {
            best = v;
            d0 = d;
        }
    }
    // Integer offsets: Gamma(s + a) = Gamma(s + nu_min) (s + nu_min)_{a - nu_min}.
    const int M = p.M;
    const int top = static_cast<int>(L) + k + 1 - nu_min;
    auto F = [&](ld c, ld t) {
        const cld s(c, t);
        const cld s0 = s + ld(nu_min);
        const cld lf = log_pref - s * ly + ld(M - 1) * log_gamma_ld(s0);
        cld num = 1.0L, den = 1.0L;
        for (int i = 1; i <= k; ++i) num *= s - ld(i);
        for (int nu : p.nu)
            for (int i = 0; i < nu - nu_min; ++i) num *= s0 + ld(i);
        for (int i = 0; i < top; ++i) den *= s0 + ld(i);
        return (num / den * std::exp(lf)).real();
    };
    auto trapezoid = [&](ld c, ld h, ld* l1) {
        ld sum = 0.5L * F(c, 0.0L);
        ld abs_sum = std::abs(sum);
        ld peak = abs_sum;
        int small = 0;
        for (int m = 1; m < 1000000; ++m) {
            const ld v = F(c, m * h);
            sum += v;
            abs_sum += std::abs(v);
            peak = std::max(peak, std::abs(v));
            if (std::abs(v) <= 1e-26L * peak) {
                if (++small >= 8) break;
            } else {
                small = 0;
            }
        }
        if (l1) *l1 = abs_sum * h;
        return sum * h / std::numbers::pi_v<ld>;
    };
    ld d_best = d0, l1_best = std::numeric_limits<ld>::infinity();
    for (ld f : {0.25L, 0.5L, 1.0L, 2.0L}) {
        const ld d = std::max(0.1L, d0 * f);
        ld l1 = 0.0L;
        trapezoid(d - nu_min, 0.25L, &l1);
        if (l1 < l1_best) {
            l1_best = l1;
            d_best = d;
        }
    }
    return trapezoid(d_best - nu_min, std::min<ld>(0.25L, d_best / 8.0L), nullptr);
}

// Q_k for M = 1 on (0, 1) from the terminating series in z = 1 - y.
ld qk_unit_ld(const TruncationModelParams& p, int k, ld log_pref, ld y, ld z) {
    const ld L = p.l - 2.0L * p.n;
    const ld nu1 = p.nu[0];
    const ld c = L + 1.0L - nu1;
    ld term = 1.0L, sum = 1.0L;
    for (int j = 0; j < k; ++j) {
        term *= (L + k + 1.0L + j) * (-k + j) / ((c + j) * (j + 1.0L)) * z;
        sum += term;
    }
    return sum * std::exp(log_pref - std::lgamma(c) + nu1 * std::log(y) + (c - 1.0L) * std::log(z));
}

}  // namespace

Eigen::MatrixXd biorthogonality_matrix(const TruncationModelParams& params, double tolerance) {
    params.validate();
    const int n = params.n;
    std::vector<std::vector<ld>> pc(n);
    for (int j = 0; j < n; ++j) pc[j] = pk_coefficients_ld(params, j);
    const bool unit = params.M == 1;

    // Double-exponential nodes: y = exp(pi/2 sinh t) on (0, inf), or the
    // tanh-sinh map on (0, 1) carrying z = 1 - y exactly.
    struct Node {
        ld y, z, w;
    };
    const ld half_pi = std::numbers::pi_v<ld> / 2;
    auto node = [&](ld t, ld h) {
        const ld u = half_pi * std::sinh(t);
        if (unit) {
            const ld y = 1.0L / (1.0L + std::exp(-2.0L * u));
            const ld z = 1.0L / (1.0L + std::exp(2.0L * u));
            const ld ch = std::cosh(u);
            return Node{y, z, h * half_pi * std::cosh(t) / (2.0L * ch * ch)};
        }
        const ld y = std::exp(u);
        return Node{y, 0.0L, h * y * half_pi * std::cosh(t)};
    };

    Eigen::MatrixXd out(n, n);
    for (int k = 0; k < n; ++k) {
        const ld log_pref = qk_log_prefactor_ld(params, k);
        auto q_at = [&](const Node& nd) {
            if (nd.y <= 0.0L || (unit && nd.z <= 0.0L)) return 0.0L;
            return unit ? qk_unit_ld(params, k, log_pref, nd.y, nd.z) : qk_line_ld(params, k, log_pref, nd.y);
        };
        // sums[level][j]; the finer level reuses the coarser nodes
        std::vector<ld> coarse(n, 0.0L), fine(n, 0.0L);
        const ld h = 1.0L / 64;
        auto sweep = [&](int dir) {
            ld peak = 0.0L;
            int small = 0;
            for (int m = (dir > 0 ? 0 : 1); m < 4000; ++m) {
                const ld t = dir * m * h;
                const Node nd = node(t, h);
                const ld q = q_at(nd);
                ld mag = 0.0L;
                for (int j = 0; j < n; ++j) {
                    const ld v = horner(pc[j], nd.y) * q * nd.w;
                    fine[j] += v;
                    if (m % 2 == 0) coarse[j] += 2.0L * v;
                    mag = std::max(mag, std::abs(v));
                }
                peak = std::max(peak, mag);
                if (mag <= 1e-30L * peak || nd.w == 0.0L) {
                    if (++small >= 6) break;
                } else {
                    small = 0;
                }
            }
        };
        sweep(+1);
        sweep(-1);
        for (int j = 0; j < n; ++j) {
            const ld diff = std::abs(fine[j] - coarse[j]);
            if (!(diff <= std::max<ld>(tolerance, 1e-6L * std::abs(fine[j]))))
                throw ConvergenceError("biorthogonality quadrature did not converge (entry " + std::to_string(j) + ", " +
                                       std::to_string(k) + ")");
            out(j, k) = static_cast<double>(fine[j]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Finite-n kernel

namespace {

KernelValue finite_biorthogonal(const TruncationModelParams& p, double x, double y, const KernelOptions& opts) {
    MeijerOptions mo;
    mo.tolerance = std::min(1e-12, opts.tolerance);
    KernelValue kv;
    kv.route = KernelRoute::biorthogonal_sum;
    kv.converged = true;
    double s = 0.0;
    for (int k = 0; k < p.n; ++k) {
        const double P = pk(p, k, x);
        const auto Q = qk_detail(p, k, y, mo);
        s += P * Q.value;
        kv.abs_imag_residual += std::fabs(P) * Q.imag_residual;
        kv.est_error += std::fabs(P) * Q.est_error;
        kv.converged = kv.converged && Q.converged;
    }
    kv.value = s;
    return kv;
}

// M >= 2. With nu_0 = 0 the factor Gamma(s + 1) / Gamma(s + 1 - n) is the
// polynomial s (s - 1) ... (s - n + 1), which cancels the pole of 1/(s - t0), so
//   K_n(x, y) = (1/y) (1/2 pi i) int prod_{j>=1} Gamma(s + 1 + nu_j) / Gamma(s + l - n + 1)
//                 * B(s) y^{-s} ds,   B(s) = sum_t0 R(t0) x^t0 prod_{i != t0} (s - i),
// and the integrand is analytic for Re s > -1 - min nu_j. The abscissa is
// placed at the real-axis minimum of the integrand so that small kernel
// values keep their relative accuracy.
KernelValue finite_contour_line(const TruncationModelParams& p, double x, double y, const KernelOptions& opts) {
    const int n = p.n;
    const double l = p.l;
    const auto nu = full_nu(p.nu);
    const double lx = std::log(x), ly = std::log(y);
    std::vector<double> R(n);
    for (int t0 = 0; t0 < n; ++t0) {
        const int r = n - 1 - t0;
        double lr = -std::lgamma(r + 1.0) + lg(t0 + l - n + 1.0);
        for (double v : nu) lr -= lg(t0 + 1.0 + v);
        R[t0] = (r % 2 ? -1.0 : 1.0) * std::exp(lr + t0 * lx);
    }
    double nu_min = p.nu[0];
    for (int v : p.nu) nu_min = std::min(nu_min, double(v));
    const double lower = -1.0 - nu_min;

    auto log_gamma_part = [&](double c) {
        double v = -std::lgamma(c + l - n + 1.0) - c * ly;
        for (int nj : p.nu) v += std::lgamma(c + 1.0 + nj);
        double b = 0.0;
        for (int t0 = 0; t0 < n; ++t0) {
            double pr = std::fabs(R[t0]);
            for (int i = 0; i < n; ++i)
                if (i != t0) pr *= std::fabs(c - i) + 1.0;
            b += pr;
        }
        return v + std::log(b);
    };
    double c = lower + 0.5, best = std::numeric_limits<double>::infinity();
    for (double u = -3.0; u <= 6.0; u += 0.05) {
        const double cc = lower + std::exp(u);
        const double v = log_gamma_part(cc);
        if (v < best) {
            best = v;
            c = cc;
        }
    }
    auto f = [&](cplx s) {
        cplx lf = -log_gamma(s + (l - n + 1.0)) - s * ly;
        for (int nj : p.nu) lf += log_gamma(s + (1.0 + nj));
        cplx b = 0.0;
        for (int t0 = 0; t0 < n; ++t0) {
            cplx pr = R[t0];
            for (int i = 0; i < n; ++i)
                if (i != t0) pr *= s - double(i);
            b += pr;
        }
        return b * std::exp(lf - best) / y;
    };
    ContourSpec cs;
    cs.anchor = c;
    cs.tolerance = std::min(1e-12, opts.tolerance);
    cs.truncation = 8.0;
    const QuadratureResult q = integrate_vertical_line(ComplexFn(f), cs);
    const double scale = std::exp(best);
    KernelValue kv;
    kv.route = KernelRoute::contour;
    kv.value = q.value.real() * scale;
    kv.abs_imag_residual = std::fabs(q.value.imag()) * scale;
    kv.est_error = q.est_error * scale;
    kv.converged = q.converged;
    return kv;
}

KernelValue finite_contour(const TruncationModelParams& p, double x, double y, const KernelOptions& opts) {
    // For tiny y the factor y^{-s} oscillates too fast along the line; the
    // per-term inverse Mellin transforms switch to residue series there.
    if (p.M >= 2 && std::log(y) >= -40.0) {
        try {
            return finite_contour_line(p, x, y, opts);
        } catch (const ConvergenceError&) {
        }
    }
    const int n = p.n;
    const double l = p.l;
    const auto nu = full_nu(p.nu);
    MBOptions mo;
    mo.tolerance = std::min(1e-12, opts.tolerance);
    KernelValue kv;
    kv.route = KernelRoute::contour;
    kv.converged = true;
    const double lx = std::log(x);
    double s = 0.0;
    for (int t0 = 0; t0 < n; ++t0) {
        // residue of Gamma(t+1-n) Gamma(t+l-n+1) / prod Gamma(t+1+nu_j) at t0
        const int r = n - 1 - t0;
        double lr = -std::lgamma(r + 1.0) + lg(t0 + l - n + 1.0);
        for (double v : nu) lr -= lg(t0 + 1.0 + v);
        const double R = (r % 2 ? -1.0 : 1.0) * std::exp(lr + t0 * lx);
        // (1/2 pi i) int Phi(s) y^{-s-1} / (s - t0) ds on Re s = -1/2, with
        // 1/(s - t0) = -Gamma(t0 - s) / Gamma(t0 + 1 - s)
        GammaRatio g;
        for (double v : nu) g.left_num.push_back(1.0 + v);
        g.left_den = {1.0 - n, l - n + 1.0};
        g.right_num = {double(t0)};
        g.right_den = {t0 + 1.0};
        if (g.two_delta() > 0) mo.abscissa = -0.5;
        MBResult im;
        try {
            im = inverse_mellin(g, y, mo);
        } catch (const ConvergenceError&) {
            mo.abscissa.reset();
            im = inverse_mellin(g, y, mo);
        }
        mo.abscissa.reset();
        const double f = -R / y;
        s += f * im.value;
        kv.abs_imag_residual += std::fabs(f) * im.imag_residual;
        kv.est_error += std::fabs(f) * im.est_error;
        kv.converged = kv.converged && im.converged;
    }
    kv.value = s;
    return kv;
}

KernelValue finite_meijer(const TruncationModelParams& p, double x, double y, const KernelOptions& opts) {
    const int n = p.n;
    const double l = p.l;
    const auto nu = full_nu(p.nu);
    std::vector<double> neg;
    for (double v : nu) neg.push_back(-v);
    const auto A = MeijerGSpec::make(0, 2, {double(n), n - l}, neg);
    const auto B = MeijerGSpec::make(p.M + 1, 0, {-double(n), l - n}, nu);
    MeijerOptions mo;
    mo.tolerance = std::min(1e-12, opts.tolerance);
    double imag = 0.0;
    auto f = [&](double u) {
        const auto a = meijer_g_detail(A, u * x, mo);
        const auto b = meijer_g_detail(B, u * y, mo);
        imag = std::max(imag, std::fabs(a.value) * b.imag_residual + std::fabs(b.value) * a.imag_residual);
        return a.value * b.value;
    };
    KernelValue kv;
    kv.route = KernelRoute::meijer_product;
    // For M = 1 every Q_k vanishes on y >= 1; the second factor is supported on
    // uy < 1 and for l = 2n + nu_1 carries a point mass at uy = 1.
    if (p.M == 1 && y >= 1.0) {
        kv.converged = true;
        return kv;
    }
    const double umax = p.M == 1 ? std::min(1.0, 1.0 / y) : 1.0;
    QuadratureResult q = umax < 1.0 ? integrate_interval(f, 0.0, umax, opts.tolerance)
                                    : integrate_unit_interval(RealFn(f), 0.0, 0.0, opts.tolerance);
    kv.value = -q.value.real();
    kv.est_error = q.est_error;
    kv.abs_imag_residual = imag;
    kv.converged = q.converged;
    return kv;
}

}  // namespace

KernelValue kernel_finite(const TruncationModelParams& params, double x, double y, KernelRoute route,
                          const KernelOptions& opts) {
    params.validate();
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("kernel_finite needs x, y > 0");
    auto eval = [&](KernelRoute r) {
        switch (r) {
            case KernelRoute::contour: return finite_contour(params, x, y, opts);
            case KernelRoute::biorthogonal_sum: return finite_biorthogonal(params, x, y, opts);
            case KernelRoute::meijer_product: return finite_meijer(params, x, y, opts);
        }
        throw DomainError("unknown route");
    };
    KernelValue main = eval(route);
    if (opts.cross_check) {
        for (KernelRoute r : {KernelRoute::contour, KernelRoute::biorthogonal_sum, KernelRoute::meijer_product}) {
            if (r == route) continue;
            const KernelValue other = eval(r);
            const double scale = std::max({std::fabs(main.value), std::fabs(other.value), 1e-12});
            if (std::fabs(main.value - other.value) > 1e-5 * scale)
                throw RouteDisagreementError(std::string("kernel routes disagree: ") + to_string(route) + " = " +
                                             std::to_string(main.value) + ", " + to_string(r) + " = " +
                                             std::to_string(other.value));
        }
    }
    return main;
}

// ---------------------------------------------------------------------------
// Generic reproducing kernel

GenericKernel::GenericKernel(PolynomialEnsemble ens) : ens_(std::move(ens)) {
    const int n = ens_.n;
    Eigen::MatrixXi S;
    Eigen::MatrixXd L = log_moment_matrix(ens_, &S);
    row_shift_ = L.rowwise().maxCoeff();
    for (int j = 0; j < n; ++j) L.row(j).array() -= row_shift_(j);
    col_shift_ = L.colwise().maxCoeff().transpose();
    for (int k = 0; k < n; ++k) L.col(k).array() -= col_shift_(k);
    Eigen::MatrixXd G(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) G(j, k) = S(j, k) * std::exp(L(j, k));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    if (!lu.isInvertible() || lu.rcond() < 1e-15) throw SingularityError("moment matrix is numerically singular");
    // K(x,y) = sum_{j,k} x^j e^{-r_j} [Ghat^{-1}]_{k,j} e^{-c_k} w_k(y)
    coef_ = lu.inverse().transpose();
}

double GenericKernel::operator()(double x, double y) const {
    const int n = ens_.n;
    if (!(y > 0.0)) throw DomainError("kernel_generic needs y > 0");
    Eigen::VectorXd px(n), wy(n);
    for (int j = 0; j < n; ++j) {
        if (x > 0)
            px(j) = std::exp(j * std::log(x) - row_shift_(j));
        else
            px(j) = ipow(x, j) * std::exp(-row_shift_(j));
    }
    for (int k = 0; k < n; ++k) {
        const auto& w = ens_.weights[k];
        if (w.support == Support::unit_interval && y >= 1.0) {
            wy(k) = 0.0;
            continue;
        }
        wy(k) = meijer_g(w.spec, y) * std::exp(w.log_prefactor - col_shift_(k));
    }
    return px.dot(coef_ * wy);
}

double kernel_generic(const PolynomialEnsemble& ens, double x, double y) {
    if (ens.n > 30) throw DomainError("kernel_generic supports n <= 30");
    return GenericKernel(ens)(x, y);
}

// ---------------------------------------------------------------------------
// Hard-edge kernel

namespace {

struct HardEdgeGeometry {
    double c_s;  // rightmost abscissa of the s contour
    double h_s;
    double h_t;  // t loop: semicircle of radius h_t around 0
};

HardEdgeGeometry hard_edge_geometry(const std::vector<double>& nu_all) {
    const double g = 1.0 + *std::min_element(nu_all.begin(), nu_all.end());
    if (g >= 0.8) return {-0.5, 0.3, 0.3};
    return {-2.0 * g / 3.0, g / 3.0, g / 3.0};
}

KernelValue hard_edge_contour(const std::vector<double>& nu_all, double x, double y, const KernelOptions& opts) {
    const int M = static_cast<int>(nu_all.size()) - 1;
    const auto geo = hard_edge_geometry(nu_all);
    const double lx = std::log(x), ly = std::log(y);

    auto A = [&](cplx s) {
        cplx lsum = -(s + 1.0) * ly;
        for (double v : nu_all) lsum += log_gamma(s + v + 1.0);
        return std::exp(lsum) * std::sin(kPi * s);
    };
    auto B = [&](cplx t) {
        cplx lsum = t * lx;
        for (double v : nu_all) lsum -= log_gamma(t + v + 1.0);
        return std::exp(lsum) / std::sin(kPi * t);
    };

    ContourSpec tc;
    tc.kind = ContourKind::positive_axis_loop;
    tc.anchor = 0.0;
    tc.half_height = geo.h_t;

    ContourSpec sc;
    sc.kind = ContourKind::positive_axis_loop;
    sc.opens_left = true;
    sc.half_height = geo.h_s;
    sc.anchor = geo.c_s - geo.h_s;
    const bool s_on_line = M >= 2;

    // truncations from tail decay
    double Tt = 8.0;
    {
        const double ref = std::abs(B(cplx(1.0, geo.h_t)));
        while (std::abs(B(cplx(Tt, geo.h_t))) > 1e-18 * ref) {
            Tt *= 1.5;
            if (Tt > 1e4) throw ConvergenceError("hard-edge t integrand does not decay");
        }
    }
    double Ts = 8.0;
    {
        if (s_on_line) {
            const double ref = std::abs(A(cplx(geo.c_s, 0.0)));
            while (std::abs(A(cplx(geo.c_s, Ts))) > 1e-18 * ref) {
                Ts *= 1.5;
                if (Ts > 1e4) throw ConvergenceError("hard-edge s integrand does not decay");
            }
        } else {
            const double ref = std::abs(A(cplx(geo.c_s, 0.0)));
            while (std::abs(A(cplx(sc.anchor - Ts, geo.h_s))) > 1e-18 * ref) {
                Ts *= 1.5;
                if (Ts > 1e4) throw ConvergenceError("hard-edge s integrand does not decay");
            }
        }
    }

    const double d = std::min(geo.h_t, std::fabs(geo.c_s) - geo.h_t + 1e-300);
    double step = std::min(0.1, d / 2);
    double panel = std::min(0.5, 2 * d);
    auto evaluate = [&](double st, double pn, double* l1) {
        ContourRule srule = s_on_line ? line_rule(geo.c_s, st, Ts) : loop_rule(sc, pn, Ts);
        ContourRule trule = loop_rule(tc, pn, Tt);
        std::vector<cplx> wa(srule.size()), wb(trule.size());
        for (std::size_t i = 0; i < srule.size(); ++i) wa[i] = srule.weights[i] * A(srule.nodes[i]);
        for (std::size_t j = 0; j < trule.size(); ++j) wb[j] = trule.weights[j] * B(trule.nodes[j]);
        cplx acc = 0.0;
        double mag = 0.0;
        for (std::size_t i = 0; i < srule.size(); ++i) {
            if (wa[i] == 0.0) continue;
            cplx inner = 0.0;
            double inner_mag = 0.0;
            for (std::size_t j = 0; j < trule.size(); ++j) {
                const cplx term = wb[j] / (srule.nodes[i] - trule.nodes[j]);
                inner += term;
                inner_mag += std::abs(term);
            }
            acc += wa[i] * inner;
            mag += std::abs(wa[i]) * inner_mag;
        }
        *l1 = mag / (4 * kPi * kPi);
        return -acc / (4 * kPi * kPi);
    };

    double l1 = 0.0;
    cplx prev = evaluate(step, panel, &l1);
    for (int level = 0; level < 8; ++level) {
        step *= 0.5;
        panel *= 0.5;
        const cplx cur = evaluate(step, panel, &l1);
        const double diff = std::abs(cur - prev);
        prev = cur;
        if (diff <= std::max(opts.tolerance * std::abs(cur), 64 * std::numeric_limits<double>::epsilon() * l1)) {
            KernelValue kv;
            kv.value = cur.real();
            kv.abs_imag_residual = std::fabs(cur.imag());
            kv.est_error = diff;
            kv.route = KernelRoute::contour;
            kv.converged = true;
            return kv;
        }
    }
    throw ConvergenceError("hard-edge double contour integral did not converge");
}

KernelValue hard_edge_meijer(const std::vector<double>& nu_all, double x, double y, const KernelOptions& opts) {
    const int M = static_cast<int>(nu_all.size()) - 1;
    std::vector<double> b1{0.0}, b2;
    for (int j = 1; j <= M; ++j) {
        b1.push_back(-nu_all[j]);
        b2.push_back(nu_all[j]);
    }
    b2.push_back(0.0);
    const auto G1 = MeijerGSpec::make(1, 0, {}, b1);
    const auto G2 = MeijerGSpec::make(M, 0, {}, b2);
    double g1_at_zero = 1.0;
    for (int j = 1; j <= M; ++j) g1_at_zero *= rgamma(1.0 + nu_all[j]);
    MeijerOptions mo;
    mo.tolerance = std::min(1e-12, opts.tolerance);
    double imag = 0.0;
    auto f = [&](double u) {
        double a = g1_at_zero, ai = 0.0;
        if (x > 0) {
            const auto r = meijer_g_detail(G1, u * x, mo);
            a = r.value;
            ai = r.imag_residual;
        }
        const auto b = meijer_g_detail(G2, u * y, mo);
        imag = std::max(imag, std::fabs(a) * b.imag_residual + std::fabs(b.value) * ai);
        return a * b.value;
    };
    const double nu_min = *std::min_element(nu_all.begin() + 1, nu_all.end());
    const auto q = integrate_unit_interval(RealFn(f), std::min(0.0, nu_min), 0.0, opts.tolerance);
    KernelValue kv;
    kv.value = q.value.real();
    kv.est_error = q.est_error;
    kv.abs_imag_residual = imag;
    kv.route = KernelRoute::meijer_product;
    kv.converged = q.converged;
    return kv;
}

}  // namespace

KernelValue kernel_hard_edge(const HardEdgeParams& params, double x, double y, KernelRoute route,
                             const KernelOptions& opts) {
    params.validate();
    if (!(y > 0.0)) throw DomainError("kernel_hard_edge needs y > 0");
    const auto nu_all = full_nu(params.nu);
    if (route == KernelRoute::meijer_product) {
        if (x < 0.0) throw DomainError("kernel_hard_edge needs x >= 0");
        if (x == 0.0 && *std::min_element(params.nu.begin(), params.nu.end()) < 0.0)
            throw DomainError("x = 0 needs all nu >= 0");
        return hard_edge_meijer(nu_all, x, y, opts);
    }
    if (route != KernelRoute::contour) throw DomainError("hard-edge kernel has routes contour and meijer_product");
    if (!(x > 0.0)) throw DomainError("contour route needs x > 0");
    return hard_edge_contour(nu_all, x, y, opts);
}

// ---------------------------------------------------------------------------
// Borodin kernel

double kernel_borodin(const BorodinParams& params, double x, double y, double tolerance) {
    params.validate();
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("Borodin kernel needs x, y > 0");
    const double a = params.alpha, th = params.theta;
    const WrightParams p1{(a + 1.0) / th, 1.0 / th};
    const WrightParams p2{a + 1.0, th};
    auto f = [&](double u) {
        return wright_bessel(p1, x * u) * wright_bessel(p2, std::pow(y * u, th)) * std::pow(u, a);
    };
    const auto q = integrate_unit_interval(RealFn(f), a, 0.0, tolerance);
    return th * std::pow(x, a) * q.value.real();
}

double scaled_borodin_theta_inverse_integer(int M, double alpha, double x, double y) {
    if (M < 1) throw DomainError("M must be positive");
    const double mm = std::pow(double(M), M);
    return mm * kernel_borodin({alpha, 1.0 / M}, mm * x, mm * y);
}

double scaled_borodin_theta_integer(int M, double alpha, double x, double y) {
    if (M < 1) throw DomainError("M must be positive");
    return std::pow(x, 1.0 / M - 1.0) *
           kernel_borodin({alpha, double(M)}, M * std::pow(x, 1.0 / M), M * std::pow(y, 1.0 / M));
}

HardEdgeParams borodin_inverse_integer_params(int M, double alpha) {
    HardEdgeParams p;
    for (int j = 1; j <= M; ++j) p.nu.push_back(alpha + (j - 1.0) / M);
    return p;
}

HardEdgeParams borodin_integer_params(int M, double alpha) {
    HardEdgeParams p;
    for (int j = 1; j <= M; ++j) p.nu.push_back(alpha / M - 1.0 + double(j) / M);
    return p;
}

// ---------------------------------------------------------------------------
// Telescoping identity

namespace {

// sign * exp(value) of prod Gamma(num) / prod Gamma(den)
double gamma_ratio(std::initializer_list<double> num, std::initializer_list<double> den) {
    double acc = 0.0;
    int sign = 1;
    for (double v : num) {
        int s = 0;
        acc += log_abs_gamma(v, &s);
        sign *= s;
    }
    for (double v : den) {
        if (is_nonpositive_integer(v)) return 0.0;
        int s = 0;
        acc -= log_abs_gamma(v, &s);
        sign *= s;
    }
    return sign * std::exp(acc);
}

}  // namespace

double telescoping_lhs(int n, double l, double s, double t) {
    double sum = 0.0;
    for (int k = 0; k < n; ++k)
        sum += (l - 2.0 * n + 2.0 * k + 1.0) *
               gamma_ratio({t - k, t + l - 2.0 * n + k + 1.0}, {s - k, s + l - 2.0 * n + k + 1.0});
    return (s - t - 1.0) * sum;
}

double telescoping_rhs(int n, double l, double s, double t) {
    return gamma_ratio({t - n + 1.0, t + l - n + 1.0}, {s - n, s + l - n}) -
           gamma_ratio({t + 1.0, t + l - 2.0 * n + 1.0}, {s, s + l - 2.0 * n});
}

}  // namespace polyens
