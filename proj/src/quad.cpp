#include "polyens/quad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "polyens/errors.hpp"

namespace polyens {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx kTwoPiI{0.0, kTwoPi};

bool accept(double diff, double value_abs, double l1, double tol) {
    return diff <= std::max(tol * value_abs, std::min(tol, 64.0 * kEps * l1));
}

cplx checked(cplx v) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError("integrand returned a non-finite value");
    return v;
}

}  // namespace

void ContourSpec::validate() const {
    if (!(truncation > 0.0)) throw DomainError("contour truncation must be positive");
    if (initial_nodes < 16) throw DomainError("contour needs at least 16 initial nodes");
    if (!(tolerance > 0.0)) throw DomainError("contour tolerance must be positive");
    if (kind == ContourKind::positive_axis_loop) {
        if (!(half_height > 0.0)) throw GeometryError("loop half-height must be positive");
        if (!opens_left && anchor - half_height <= -0.5) {
            throw GeometryError("loop reaches Re t <= -1/2 (anchor - half_height = " +
                                std::to_string(anchor - half_height) + ")");
        }
    }
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(order, 0.0);
    weights.assign(order, 0.0);
    for (int i = 0; i < (order + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
}

// ---------------------------------------------------------------------------
// Vertical line

ContourRule line_rule(double c, double step, double truncation) {
    ContourRule rule;
    const int n = static_cast<int>(std::ceil(truncation / step));
    for (int k = -n; k <= n; ++k) {
        rule.nodes.emplace_back(c, k * step);
        rule.weights.emplace_back(0.0, step);
    }
    return rule;
}

QuadratureResult integrate_vertical_line(const ComplexFn& f, const ContourSpec& contour) {
    contour.validate();
    const double c = contour.anchor;
    double step = contour.truncation / contour.initial_nodes;
    int n = contour.initial_nodes;  // nodes run over k = -n..n with tau = k*step
    std::vector<cplx> vals;         // index k + n
    auto at = [&](double tau) { return checked(f(cplx(c, tau))); };

    vals.resize(2 * n + 1);
    for (int k = -n; k <= n; ++k) vals[k + n] = at(k * step);
    int evaluations = 2 * n + 1;

    auto l1 = [&]() {
        double s = 0.0;
        for (const auto& v : vals) s += std::abs(v);
        return s * step / kTwoPi;
    };
    auto tail_small = [&]() {
        const int band = std::max(2, n / 16);
        double tail = 0.0;
        for (int k = n - band; k <= n; ++k) {
            tail = std::max({tail, std::abs(vals[k + n]), std::abs(vals[n - k])});
        }
        return tail * step / kTwoPi <= 1e-17 * l1() || tail == 0.0;
    };

    // Extend the truncation until the tails are negligible.
    while (!tail_small()) {
        if (n * step * 2.0 > contour.max_truncation) {
            throw ConvergenceError("vertical line integrand does not decay by |Im s| = " +
                                   std::to_string(n * step));
        }
        std::vector<cplx> grown(4 * n + 1);
        for (int k = -2 * n; k <= 2 * n; ++k) {
            grown[k + 2 * n] = (std::abs(k) <= n) ? vals[k + n] : at(k * step);
        }
        evaluations += 2 * n;
        vals.swap(grown);
        n *= 2;
    }

    auto total = [&]() {
        cplx s = 0.0;
        for (const auto& v : vals) s += v;
        return s * step / kTwoPi;
    };

    QuadratureResult res;
    cplx prev = total();
    for (int level = 0; level < contour.max_doublings; ++level) {
        std::vector<cplx> fine(4 * n + 1);
        for (int k = -2 * n; k <= 2 * n; ++k) {
            fine[k + 2 * n] = (k % 2 == 0) ? vals[k / 2 + n] : at(k * step * 0.5);
        }
        evaluations += 2 * n;
        vals.swap(fine);
        n *= 2;
        step *= 0.5;
        const cplx cur = total();
        const double diff = std::abs(cur - prev);
        res.history.push_back(diff);
        prev = cur;
        if (level >= 1 && accept(diff, std::abs(cur), l1(), contour.tolerance)) {
            res.value = cur;
            res.est_error = diff;
            res.nodes_used = evaluations;
            res.converged = true;
            return res;
        }
    }
    throw ConvergenceError("vertical line quadrature did not converge after " +
                           std::to_string(contour.max_doublings) + " refinements");
}

// ---------------------------------------------------------------------------
// Loop around the positive (or negative) axis

ContourRule loop_rule(const ContourSpec& contour, double panel, double truncation) {
    static thread_local std::vector<double> gx, gw;
    constexpr int kOrder = 20;
    if (gx.size() != kOrder) gauss_legendre(kOrder, gx, gw);

    const double a = contour.anchor;
    const double h = contour.half_height;
    ContourRule rule;
    auto segment = [&](cplx z0, cplx z1) {
        const double len = std::abs(z1 - z0);
        const int panels = std::max(1, static_cast<int>(std::ceil(len / panel)));
        const cplx dz = (z1 - z0) / static_cast<double>(panels);
        for (int p = 0; p < panels; ++p) {
            const cplx mid = z0 + (p + 0.5) * dz;
            for (int i = 0; i < kOrder; ++i) {
                rule.nodes.push_back(mid + 0.5 * gx[i] * dz);
                rule.weights.push_back(0.5 * gw[i] * dz);
            }
        }
    };
    // upper ray leftward, left semicircle, lower ray rightward
    segment(cplx(a + truncation, h), cplx(a, h));
    {
        const double arc = std::numbers::pi * h;
        const int panels = std::max(2, static_cast<int>(std::ceil(arc / panel)));
        const double dth = std::numbers::pi / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = 0.5 * std::numbers::pi + (p + 0.5) * dth;
            for (int i = 0; i < kOrder; ++i) {
                const double th = mid + 0.5 * gx[i] * dth;
                const cplx e = std::polar(1.0, th);
                rule.nodes.push_back(a + h * e);
                rule.weights.push_back(cplx(0.0, 1.0) * h * e * (0.5 * gw[i] * dth));
            }
        }
    }
    segment(cplx(a, -h), cplx(a + truncation, -h));
    if (contour.close_at_truncation) segment(cplx(a + truncation, -h), cplx(a + truncation, h));

    if (contour.opens_left) {
        for (auto& z : rule.nodes) z = 2.0 * a - z;
        for (auto& w : rule.weights) w = -w;
    }
    return rule;
}

QuadratureResult integrate_loop(const ComplexFn& f, const ContourSpec& contour) {
    contour.validate();
    double panel = 1.6 * contour.half_height;
    double truncation = contour.truncation;
    int evaluations = 0;

    auto run = [&](const ContourRule& rule, double* l1) {
        cplx s = 0.0;
        double a = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const cplx v = checked(f(rule.nodes[i])) * rule.weights[i];
            s += v;
            a += std::abs(v);
        }
        evaluations += static_cast<int>(rule.size());
        if (l1) *l1 = a / kTwoPi;
        return s / kTwoPiI;
    };

    if (!contour.close_at_truncation) {
        // grow the rays until the integrand at their ends is negligible
        for (;;) {
            double l1 = 0.0;
            run(loop_rule(contour, panel, truncation), &l1);
            const double sign = contour.opens_left ? -1.0 : 1.0;
            const double a = contour.anchor;
            const double h = contour.half_height;
            const double end = std::max(std::abs(f(cplx(a + sign * truncation, h))),
                                        std::abs(f(cplx(a + sign * truncation, -h))));
            if (end * panel <= 1e-17 * l1 || end == 0.0) break;
            truncation *= 2.0;
            if (truncation > contour.max_truncation) {
                throw ConvergenceError("loop integrand does not decay along the rays");
            }
        }
    }

    QuadratureResult res;
    double l1 = 0.0;
    cplx prev = run(loop_rule(contour, panel, truncation), &l1);
    for (int level = 0; level < contour.max_doublings; ++level) {
        panel *= 0.5;
        const cplx cur = run(loop_rule(contour, panel, truncation), &l1);
        const double diff = std::abs(cur - prev);
        res.history.push_back(diff);
        prev = cur;
        if (accept(diff, std::abs(cur), l1, contour.tolerance)) {
            res.value = cur;
            res.est_error = diff;
            res.nodes_used = evaluations;
            res.converged = true;
            return res;
        }
    }
    throw ConvergenceError("loop quadrature did not converge");
}

// ---------------------------------------------------------------------------
// Double-exponential rules

namespace {

// Sum h * g(t) over a DE grid. g returns the already-weighted contribution.
QuadratureResult de_sum(const std::function<double(double)>& g, double t_lo, double t_hi, double tol,
                        int max_level = 9) {
    double h = 0.5;
    double l1 = 0.0;
    double sum = g(0.0);
    l1 += std::abs(sum);
    int evaluations = 1;

    // find extents at the base spacing: stop after a run of negligible terms
    auto scan = [&](double dir, double bound) {
        int run = 0;
        double t = 0.0;
        double last = 0.0;
        for (int k = 1;; ++k) {
            t = dir * k * h;
            if (std::abs(t) > bound) break;
            const double v = g(t);
            ++evaluations;
            sum += v;
            l1 += std::abs(v);
            last = std::abs(t);
            if (std::abs(v) <= 1e-18 * l1) {
                if (++run >= 4) break;
            } else {
                run = 0;
            }
        }
        return last;
    };
    const double hi = scan(1.0, t_hi);
    const double lo = scan(-1.0, t_lo);

    QuadratureResult res;
    double prev = sum * h;
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        for (double t = h; t <= hi; t += 2.0 * h) {
            const double v = g(t);
            sum += v;
            l1 += std::abs(v);
            ++evaluations;
        }
        for (double t = -h; t >= -lo; t -= 2.0 * h) {
            const double v = g(t);
            sum += v;
            l1 += std::abs(v);
            ++evaluations;
        }
        const double cur = sum * h;
        const double diff = std::abs(cur - prev);
        res.history.push_back(diff);
        prev = cur;
        if (level >= 3 && accept(diff, std::abs(cur), l1 * h, tol)) {
            res.value = cur;
            res.est_error = diff;
            res.nodes_used = evaluations;
            res.converged = true;
            return res;
        }
    }
    throw ConvergenceError("double-exponential quadrature did not converge");
}

double finite_or_throw(double v) {
    if (!std::isfinite(v)) throw NumericalError("integrand returned a non-finite value");
    return v;
}

// tanh-sinh on [0, len]; f receives (distance from 0, distance from len).
QuadratureResult tanh_sinh(const std::function<double(double, double)>& f, double len, double tol) {
    const double half_pi = 0.5 * std::numbers::pi;
    auto g = [&](double t) {
        const double u = half_pi * std::sinh(t);
        const double left = len / (1.0 + std::exp(-2.0 * u));
        const double right = len / (1.0 + std::exp(2.0 * u));
        if (left <= 0.0 || right <= 0.0) return 0.0;
        const double e = std::exp(-2.0 * std::abs(u));
        const double sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
        const double w = 0.5 * len * half_pi * std::cosh(t) * sech2;
        if (w == 0.0) return 0.0;
        return finite_or_throw(f(left, right)) * w;
    };
    return de_sum(g, 4.5, 4.5, tol);
}

}  // namespace

QuadratureResult integrate_interval(const RealFn& f, double a, double b, double tolerance) {
    if (!(b > a)) throw DomainError("integrate_interval: need a < b");
    return tanh_sinh([&](double l, double r) { return f(l < r ? a + l : b - r); }, b - a, tolerance);
}

QuadratureResult integrate_unit_interval(const UnitFn& f, double p0, double p1, double tolerance) {
    if (!(p0 > -1.0) || !(p1 > -1.0)) throw DomainError("endpoint powers must exceed -1");
    // Left half: u = v^q removes u^p0 when p0 < 0.
    QuadratureResult left;
    if (p0 < 0.0) {
        const double q = 1.0 / (1.0 + p0);
        const double len = std::pow(0.5, 1.0 + p0);
        left = tanh_sinh(
            [&](double v, double) {
                const double u = std::pow(v, q);
                if (u <= 0.0) return 0.0;
                return f(u, 1.0 - u) * q * std::pow(v, q - 1.0);
            },
            len, tolerance);
    } else {
        left = tanh_sinh([&](double u, double) { return f(u, 1.0 - u); }, 0.5, tolerance);
    }
    QuadratureResult right;
    if (p1 < 0.0) {
        const double q = 1.0 / (1.0 + p1);
        const double len = std::pow(0.5, 1.0 + p1);
        right = tanh_sinh(
            [&](double v, double) {
                const double w = std::pow(v, q);
                if (w <= 0.0) return 0.0;
                return f(1.0 - w, w) * q * std::pow(v, q - 1.0);
            },
            len, tolerance);
    } else {
        right = tanh_sinh([&](double w, double) { return f(1.0 - w, w); }, 0.5, tolerance);
    }
    QuadratureResult res;
    res.value = left.value + right.value;
    res.est_error = left.est_error + right.est_error;
    res.nodes_used = left.nodes_used + right.nodes_used;
    res.converged = left.converged && right.converged;
    res.history = left.history;
    for (std::size_t i = 0; i < res.history.size() && i < right.history.size(); ++i) res.history[i] += right.history[i];
    return res;
}

QuadratureResult integrate_unit_interval(const RealFn& f, double p0, double p1, double tolerance) {
    return integrate_unit_interval(UnitFn([&](double u, double) { return f(u); }), p0, p1, tolerance);
}

QuadratureResult integrate_half_line(const RealFn& f, double tolerance, double scale) {
    if (!(scale > 0.0)) throw DomainError("integrate_half_line: scale must be positive");
    const double half_pi = 0.5 * std::numbers::pi;
    auto g = [&](double t) {
        const double x = scale * std::exp(half_pi * std::sinh(t));
        if (x <= 0.0 || !std::isfinite(x)) return 0.0;
        return finite_or_throw(f(x)) * x * half_pi * std::cosh(t);
    };
    return de_sum(g, 6.5, 6.5, tolerance);
}

}  // namespace polyens
