#include "polyens/meijer.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "polyens/errors.hpp"

namespace polyens {

MeijerGSpec MeijerGSpec::make(int m, int n, std::vector<double> a, std::vector<double> b) {
    MeijerGSpec s;
    s.m = m;
    s.n = n;
    s.p = static_cast<int>(a.size());
    s.q = static_cast<int>(b.size());
    s.a = std::move(a);
    s.b = std::move(b);
    s.validate();
    return s;
}

void MeijerGSpec::validate() const {
    if (p != static_cast<int>(a.size()) || q != static_cast<int>(b.size())) {
        throw SpecError("parameter list sizes do not match (p, q) in " + describe());
    }
    if (n < 0 || n > p || m < 0 || m > q) throw SpecError("need 0 <= n <= p and 0 <= m <= q in " + describe());
    for (double v : a)
        if (!std::isfinite(v)) throw SpecError("non-finite parameter in " + describe());
    for (double v : b)
        if (!std::isfinite(v)) throw SpecError("non-finite parameter in " + describe());
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < m; ++j) {
            const double d = a[k] - b[j];
            if (d > 0.5 && std::abs(d - std::round(d)) <= 1e-12) {
                throw SpecError("a_k - b_j is a positive integer (pole collision) in " + describe());
            }
        }
    }
}

std::string MeijerGSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "G^{" << m << "," << n << "}_{" << p << "," << q << "}(";
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
    if (a.empty()) os << "-";
    os << "; ";
    for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << b[i];
    if (b.empty()) os << "-";
    os << ")";
    return os.str();
}

GammaRatio to_gamma_ratio(const MeijerGSpec& s) {
    GammaRatio g;
    for (int j = 0; j < s.m; ++j) g.left_num.push_back(s.b[j]);
    for (int j = s.m; j < s.q; ++j) g.right_den.push_back(1.0 - s.b[j]);
    for (int j = 0; j < s.n; ++j) g.right_num.push_back(1.0 - s.a[j]);
    for (int j = s.n; j < s.p; ++j) g.left_den.push_back(s.a[j]);
    return g;
}

namespace {

// Coefficients of t^{rho - q + i}, i = 0..q+1, in L t^rho for the Meijer operator
// L = x prod(theta - a_j + 1) - prod(theta - b_j), x = 1 - t, theta = x d/dx.
std::vector<long double> operator_image(const MeijerGSpec& s, long double rho) {
    const int q = s.q;
    auto apply = [&](std::vector<long double> v, long double c) {
        std::vector<long double> w(v.size(), 0.0L);
        for (int i = 0; i <= q; ++i) {
            if (v[i] == 0.0L) continue;
            const long double e = rho - q + i;
            if (i > 0) w[i - 1] -= e * v[i];
            w[i] += (e - c) * v[i];
        }
        return w;
    };
    std::vector<long double> top(q + 1, 0.0L), bottom(q + 1, 0.0L);
    top[q] = bottom[q] = 1.0L;
    for (double a : s.a) top = apply(top, a - 1.0L);
    for (double b : s.b) bottom = apply(bottom, b);
    std::vector<long double> out(q + 2, 0.0L);
    for (int i = 0; i <= q; ++i) out[i] = top[i] - (i > 0 ? top[i - 1] : 0.0L) - bottom[i];
    out[q + 1] = -top[q];
    return out;
}

}  // namespace

// G^{q,0}_{q,q} on (0, 1] as the Frobenius solution at x = 1 with exponent
// mu - 1, mu = sum a - sum b; leading coefficient 1 / Gamma(mu).
MeijerValue meijer_g_near_one(const MeijerGSpec& spec, double x, double tolerance) {
    spec.validate();
    if (!(spec.n == 0 && spec.m == spec.q && spec.p == spec.q && spec.q >= 1)) {
        throw SpecError("the expansion at x = 1 needs G^{q,0}_{q,q}, got " + spec.describe());
    }
    if (!(x > 0.0 && x <= 1.0)) throw DomainError("the expansion at x = 1 needs 0 < x <= 1");
    long double mu = 0.0L;
    for (double a : spec.a) mu += a;
    for (double b : spec.b) mu -= b;
    if (mu <= 0.0L && std::abs(mu - std::round(mu)) < 1e-12L) {
        throw SingularityError("G^{q,0}_{q,q} has a point mass at x = 1 when sum a - sum b is a non-positive integer");
    }
    const int q = spec.q;
    const long double t = 1.0L - static_cast<long double>(x);
    MeijerValue res;
    res.route = "expansion_at_one";
    res.converged = true;
    std::vector<long double> c{1.0L / std::tgamma(mu)};
    if (t == 0.0L) {
        if (mu < 1.0L) throw DomainError("G^{q,0}_{q,q} is unbounded at x = 1 when sum a - sum b < 1");
        res.value = mu == 1.0L ? static_cast<double>(c[0]) : 0.0;
        return res;
    }
    long double sum = c[0], abs_sum = std::abs(c[0]), tk = 1.0L;
    int small = 0;
    constexpr int kMaxTerms = 4000;
    for (int k = 1; k < kMaxTerms; ++k) {
        // the coefficient of t^{mu - 2 - q + k} in L G vanishes
        const long double p1 = operator_image(spec, mu - 1.0L + k)[1];
        if (std::abs(p1) < 1e-14L) throw SingularityError("resonant exponent in the expansion at x = 1");
        long double acc = 0.0L;
        for (int i = 2; i <= q + 1 && k + 1 - i >= 0; ++i) acc += c[k + 1 - i] * operator_image(spec, mu - 1.0L + k + 1 - i)[i];
        c.push_back(-acc / p1);
        tk *= t;
        const long double term = c[k] * tk;
        sum += term;
        abs_sum += std::abs(term);
        if (!std::isfinite(static_cast<double>(sum))) throw NumericalError("expansion at x = 1 overflowed");
        if (std::abs(term) <= 0.1L * tolerance * std::abs(sum)) {
            if (++small >= 3) break;
        } else {
            small = 0;
        }
        if (k == kMaxTerms - 1) throw ConvergenceError("expansion at x = 1 did not converge");
        res.nodes = k;
    }
    const long double scale = std::exp((mu - 1.0L) * std::log(t));
    res.value = static_cast<double>(scale * sum);
    res.est_error = static_cast<double>(scale * (abs_sum * 8.0L * std::numeric_limits<double>::epsilon()));
    return res;
}

MeijerValue meijer_g_detail(const MeijerGSpec& spec, double x, const MeijerOptions& opts) {
    spec.validate();
    if (!(x > 0.0)) throw DomainError("meijer_g needs x > 0");
    if (opts.route == MBRoute::automatic && spec.n == 0 && spec.m == spec.q && spec.p == spec.q && x >= 0.25 &&
        x <= 1.0) {
        try {
            return meijer_g_near_one(spec, x, opts.tolerance);
        } catch (const Error&) {
        }
    }
    MBOptions mb;
    mb.route = opts.route;
    mb.tolerance = opts.tolerance;
    mb.abscissa = opts.abscissa;
    return inverse_mellin(to_gamma_ratio(spec), x, mb);
}

double meijer_g(const MeijerGSpec& spec, double x, const MeijerOptions& opts) {
    return meijer_g_detail(spec, x, opts).value;
}

MeijerValue meijer_g(const MeijerGSpec& spec, double x, const ContourSpec& contour) {
    contour.validate();
    MeijerOptions opts;
    opts.tolerance = contour.tolerance;
    switch (contour.kind) {
        case ContourKind::vertical_line:
            opts.route = MBRoute::line;
            opts.abscissa = contour.anchor;
            break;
        case ContourKind::positive_axis_loop: opts.route = MBRoute::loop; break;
        case ContourKind::unit_interval: throw SpecError("a unit-interval contour cannot evaluate a Meijer G-function");
    }
    return meijer_g_detail(spec, x, opts);
}

double log_meijer_mellin_moment(const MeijerGSpec& spec, double s, int* sign) {
    spec.validate();
    for (int j = 0; j < spec.m; ++j) {
        if (!(s + spec.b[j] > 0.0)) throw StripError("Mellin moment outside the strip: s + b_j <= 0");
    }
    for (int j = 0; j < spec.n; ++j) {
        if (!(1.0 - spec.a[j] - s > 0.0)) throw StripError("Mellin moment outside the strip: 1 - a_j - s <= 0");
    }
    const GammaRatio g = to_gamma_ratio(spec);
    double acc = 0.0;
    int sg = 1, total = 1;
    for (double a : g.left_den)
        if (is_nonpositive_integer(s + a)) {
            *sign = 0;
            return -std::numeric_limits<double>::infinity();
        }
    for (double a : g.right_den)
        if (is_nonpositive_integer(a - s)) {
            *sign = 0;
            return -std::numeric_limits<double>::infinity();
        }
    for (double a : g.left_num) acc += log_abs_gamma(s + a, &sg), total *= sg;
    for (double a : g.right_num) acc += log_abs_gamma(a - s, &sg), total *= sg;
    for (double a : g.left_den) acc -= log_abs_gamma(s + a, &sg), total *= sg;
    for (double a : g.right_den) acc -= log_abs_gamma(a - s, &sg), total *= sg;
    *sign = total;
    return acc;
}

cplx meijer_mellin_moment(const MeijerGSpec& spec, cplx s) {
    spec.validate();
    for (int j = 0; j < spec.m; ++j) {
        if (!((s + spec.b[j]).real() > 0.0)) throw StripError("Mellin moment outside the strip: Re(s + b_j) <= 0");
    }
    for (int j = 0; j < spec.n; ++j) {
        if (!((1.0 - spec.a[j] - s).real() > 0.0)) {
            throw StripError("Mellin moment outside the strip: Re(1 - a_j - s) <= 0");
        }
    }
    return to_gamma_ratio(spec).value(s, 0.0);
}

MeijerGSpec shift_parameters(const MeijerGSpec& spec, double alpha) {
    MeijerGSpec out = spec;
    for (double& v : out.a) v += alpha;
    for (double& v : out.b) v += alpha;
    out.validate();
    return out;
}

MeijerGSpec invert_argument(const MeijerGSpec& spec) {
    MeijerGSpec out;
    out.m = spec.n;
    out.n = spec.m;
    out.p = spec.q;
    out.q = spec.p;
    for (double v : spec.b) out.a.push_back(1.0 - v);
    for (double v : spec.a) out.b.push_back(1.0 - v);
    return out;
}

MeijerGSpec convolve_exp_power(const MeijerGSpec& spec, double nu) {
    MeijerGSpec out = spec;
    out.b.insert(out.b.begin(), nu);
    out.m += 1;
    out.q += 1;
    return out;
}

WrightMeijer wright_to_meijer(double a, int M, WrightMode mode) {
    if (M < 1) throw DomainError("wright_to_meijer needs M >= 1");
    const double dM = M;
    WrightMeijer w;
    std::vector<double> b{0.0};
    if (mode == WrightMode::b_equals_M) {
        for (int j = 1; j <= M; ++j) b.push_back((j - a) / dM);
        w.spec = MeijerGSpec::make(1, 0, {}, b);
        w.prefactor = std::pow(2.0 * std::numbers::pi, 0.5 * (dM - 1.0)) * std::pow(dM, 0.5 - a);
        w.argument_power = 1;
    } else {
        for (int j = 1; j < M; ++j) b.push_back(j / dM);
        b.push_back(1.0 - a);
        w.spec = MeijerGSpec::make(M, 0, {}, b);
        w.prefactor = std::pow(2.0 * std::numbers::pi, -0.5 * (dM - 1.0)) * std::sqrt(dM);
        w.argument_power = M;
    }
    w.argument_scale = std::pow(dM, -dM);
    return w;
}

double evaluate(const WrightMeijer& w, double x, const MeijerOptions& opts) {
    return w.prefactor * meijer_g(w.spec, w.argument_scale * std::pow(x, w.argument_power), opts);
}

}  // namespace polyens
