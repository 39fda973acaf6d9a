#include "polyens/mellin_barnes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "polyens/errors.hpp"
#include "polyens/quad.hpp"

namespace polyens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPoleTol = 1e-9;

bool is_pole(cplx z) { return std::abs(z.imag()) <= 1e-12 && is_nonpositive_integer(z.real(), kPoleTol); }

double frac_key(double a) {
    double f = a - std::floor(a);
    if (f > 1.0 - kPoleTol) f = 0.0;
    return std::round(f * 1e8) / 1e8;
}

struct Neumaier {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// Left pole set is finite when every residue class mod 1 has at least as many
// denominator factors as numerator factors. `levels` bounds how far to walk.
bool left_poles_finite(const GammaRatio& g, int* levels) {
    std::map<double, int> balance;
    for (double a : g.left_num) balance[frac_key(a)] += 1;
    for (double a : g.left_den) balance[frac_key(a)] -= 1;
    for (const auto& [k, v] : balance) {
        if (v > 0) return false;
    }
    double hi = -kInf, lo = kInf;
    for (double a : g.left_num) lo = std::min(lo, a);
    for (double a : g.left_num) hi = std::max(hi, a);
    for (double a : g.left_den) hi = std::max(hi, a);
    *levels = g.left_num.empty() ? 0 : static_cast<int>(std::ceil(hi - lo)) + 2;
    return true;
}

struct ResidueTerm {
    double value = 0.0;
    double error = 0.0;
};

// Sum of the residues inside the circle |s - center| = r, by the trapezoid rule.
ResidueTerm circle_residue(const GammaRatio& g, double center, double r, int nodes, double log_x) {
    cplx acc = 0.0;
    double scale = 0.0;
    for (int j = 0; j < nodes; ++j) {
        const cplx e = std::polar(r, 2.0 * std::numbers::pi * (j + 0.5) / nodes);
        const cplx v = g.value(center + e, log_x) * e;
        acc += v;
        scale = std::max(scale, std::abs(v));
    }
    acc /= static_cast<double>(nodes);
    return {acc.real(), 64.0 * kEps * scale + std::abs(acc.imag())};
}

// Left poles within kClusterRadius of s0 but not equal to it. Their separate
// residues carry a factor 1/distance and cancel in pairs, so they are summed
// with one circle. Empty when another pole sits too close to the circle.
constexpr double kClusterRadius = 0.02;
constexpr double kClusterGuard = 0.1;
std::vector<double> pole_cluster(const GammaRatio& g, double s0) {
    std::vector<double> members{s0};
    for (double a : g.left_num) {
        const double k = std::round(-s0 - a);
        if (k < 0.0) continue;
        const double d = std::abs(-a - k - s0);
        if (d <= kPoleTol) continue;
        if (d > kClusterGuard) continue;
        if (d > kClusterRadius) return {};
        members.push_back(-a - k);
    }
    for (double a : g.right_num) {
        const double k = std::max(0.0, std::round(s0 - a));
        if (std::abs(a + k - s0) <= kClusterGuard) return {};
    }
    if (members.size() == 1) return {};
    return members;
}

// Residue of ratio(s) x^{-s} at the real point s0.
ResidueTerm residue_at(const GammaRatio& g, double s0, double log_x) {
    int ln = 0, rn = 0, dn = 0;
    int pole_index = -1;
    for (std::size_t i = 0; i < g.left_num.size(); ++i) {
        if (is_nonpositive_integer(s0 + g.left_num[i], kPoleTol)) {
            ++ln;
            pole_index = static_cast<int>(i);
        }
    }
    for (double a : g.right_num) rn += is_nonpositive_integer(a - s0, kPoleTol);
    for (double a : g.left_den) dn += is_nonpositive_integer(s0 + a, kPoleTol);
    for (double a : g.right_den) dn += is_nonpositive_integer(a - s0, kPoleTol);
    const int order = ln + rn - dn;
    if (order <= 0) return {};

    if (order == 1 && ln == 1 && rn == 0 && dn == 0) {
        // simple pole of Gamma(s + a) at s + a = -k: residue (-1)^k / k!
        const double k = std::round(-(s0 + g.left_num[pole_index]));
        double log_mag = -std::lgamma(k + 1.0) - s0 * log_x;
        int sign = (static_cast<long long>(k) % 2 == 0) ? 1 : -1;
        int sg = 1;
        for (std::size_t i = 0; i < g.left_num.size(); ++i) {
            if (static_cast<int>(i) == pole_index) continue;
            log_mag += log_abs_gamma(s0 + g.left_num[i], &sg);
            sign *= sg;
        }
        for (double a : g.right_num) {
            log_mag += log_abs_gamma(a - s0, &sg);
            sign *= sg;
        }
        for (double a : g.left_den) {
            log_mag -= log_abs_gamma(s0 + a, &sg);
            sign *= sg;
        }
        for (double a : g.right_den) {
            log_mag -= log_abs_gamma(a - s0, &sg);
            sign *= sg;
        }
        const double v = sign * std::exp(log_mag);
        return {v, 8.0 * kEps * std::abs(v)};
    }

    // Higher order or partially cancelled: trapezoid on a small circle.
    double nearest = 1.0;
    auto consider = [&](double d) {
        d = std::abs(d - std::round(d));
        if (d > kPoleTol) nearest = std::min(nearest, d);
    };
    for (double a : g.left_num) consider(s0 + a);
    for (double a : g.right_num) consider(a - s0);
    // |x^{-s}| varies by exp(r |log x|) around the circle; keep that bounded.
    const double r = std::min({0.25, 0.4 * nearest, 1.0 / std::max(1.0, std::abs(log_x))});
    return circle_residue(g, s0, r, 48, log_x);
}

// With asymptotic set the series may diverge: it is cut before the first level
// that grows, and the last level kept joins the error estimate.
MBResult residue_sum_left(const GammaRatio& g, double log_x, const MBOptions& opts, bool asymptotic = false) {
    MBResult res;
    res.route = "residue";
    res.converged = true;
    if (g.left_num.empty()) return res;

    int finite_levels = 0;
    const bool finite = left_poles_finite(g, &finite_levels);
    std::set<long long> seen;
    Neumaier sum;
    double abs_sum = 0.0;
    double err = 0.0;
    double prev_level = kInf;
    int small_run = 0;
    std::vector<ResidueTerm> level;
    for (int k = 0; k < opts.max_levels; ++k) {
        level.clear();
        double level_max = 0.0;
        for (double a : g.left_num) {
            const double s0 = -a - k;
            const long long key = std::llround(s0 * 1e8);
            if (!seen.insert(key).second) continue;
            ResidueTerm t;
            const auto cluster = pole_cluster(g, s0);
            const double r = 0.05;
            if (!cluster.empty() && r * std::abs(log_x) <= 1.0) {
                double lo = s0, hi = s0;
                for (double c : cluster) {
                    lo = std::min(lo, c);
                    hi = std::max(hi, c);
                    seen.insert(std::llround(c * 1e8));
                }
                t = circle_residue(g, 0.5 * (lo + hi), r, 128, log_x);
            } else {
                t = residue_at(g, s0, log_x);
            }
            if (!std::isfinite(t.value)) throw NumericalError("residue term overflowed");
            level.push_back(t);
            level_max = std::max(level_max, std::abs(t.value));
        }
        if (asymptotic && !finite && k >= 1 && level_max > prev_level) {
            err += prev_level;
            break;
        }
        for (const auto& t : level) {
            sum.add(t.value);
            abs_sum += std::abs(t.value);
            err += t.error;
            ++res.nodes;
        }
        if (finite) {
            if (k >= finite_levels) break;
            continue;
        }
        const double total = std::abs(sum.value());
        if (k >= 2 && level_max <= prev_level && level_max <= 1e-17 * std::max(total, kEps * abs_sum)) {
            if (++small_run >= 3) break;
        } else {
            small_run = 0;
        }
        prev_level = level_max;
        if (k == opts.max_levels - 1) throw ConvergenceError("residue series did not converge");
    }
    res.value = sum.value();
    res.est_error = err + 4.0 * kEps * abs_sum;
    return res;
}

MBResult residue_route(const GammaRatio& g, double x, const MBOptions& opts) {
    const int kappa = g.kappa();
    int levels = 0;
    bool right = false;
    if (g.left_num.empty() && left_poles_finite(g.mirrored(), &levels)) {
        right = true;
    } else if (kappa > 0 || (kappa == 0 && x < 1.0)) {
        right = false;
    } else if (kappa < 0 || x > 1.0) {
        right = true;
    }
    if (right) {
        MBResult r = residue_sum_left(g.mirrored(), -std::log(x), opts);
        r.route = "residue_right";
        return r;
    }
    MBResult r = residue_sum_left(g, std::log(x), opts);
    r.route = "residue_left";
    return r;
}

struct Strip {
    double lo;
    double hi;
    double margin;
};

// Vertical strip between the pole sets. When one side is unbounded the search
// range grows with |log x| so that the saddle stays reachable.
std::optional<Strip> separating_strip(const GammaRatio& g, double x = 1.0) {
    const double L = g.left_bound();
    const double R = g.right_bound();
    if (!(L < R)) return std::nullopt;
    const double width = std::min(1e5, 40.0 + 2.0 * std::max(x, 1.0 / x));
    if (std::isinf(L) && std::isinf(R)) return Strip{-width, width, 0.5};
    if (std::isinf(L)) return Strip{R - width, R - 0.5, 0.5};
    if (std::isinf(R)) return Strip{L + 0.5, L + 0.5 + width, 0.5};
    const double margin = std::min(0.5, (R - L) / 4.0);
    return Strip{L + margin, R - margin, margin};
}

MBResult line_route(const GammaRatio& g, double x, const MBOptions& opts) {
    const auto strip = separating_strip(g, x);
    if (!strip) throw SpecError("no vertical line separates the left and right poles");
    const double log_x = std::log(x);
    double c = 0.0;
    if (opts.abscissa) {
        c = *opts.abscissa;
        if (!(c > g.left_bound() && c < g.right_bound())) {
            throw SpecError("abscissa " + std::to_string(c) + " does not separate the poles");
        }
    } else {
        c = saddle_abscissa(g, log_x, strip->lo, strip->hi);
    }
    // keep the line away from numerator poles
    auto near_pole = [&](double s) {
        for (double a : g.left_num)
            if (is_nonpositive_integer(s + a, 1e-8)) return true;
        for (double a : g.right_num)
            if (is_nonpositive_integer(a - s, 1e-8)) return true;
        return false;
    };
    double dist = strip->margin;
    if (opts.abscissa) {
        dist = 1.0;
        for (double a : g.left_num) dist = std::min(dist, std::abs(c + a - std::round(c + a)));
        for (double a : g.right_num) dist = std::min(dist, std::abs(a - c - std::round(a - c)));
        dist = std::max(dist, 1e-3);
    }
    if (near_pole(c)) c += 0.5 * dist;

    ContourSpec contour;
    contour.kind = ContourKind::vertical_line;
    contour.anchor = c;
    contour.initial_nodes = 32;
    contour.truncation = 32.0 * std::min(0.5, dist);
    contour.tolerance = opts.tolerance;
    const QuadratureResult q = integrate_vertical_line([&](cplx s) { return g.value(s, log_x); }, contour);
    MBResult res;
    res.value = q.value.real();
    res.imag_residual = std::abs(q.value.imag());
    res.est_error = q.est_error;
    res.route = "line";
    res.nodes = q.nodes_used;
    res.converged = q.converged;
    return res;
}

MBResult loop_route(const GammaRatio& g, double x, const MBOptions& opts) {
    const auto strip = separating_strip(g);
    double crossing = 0.0;
    double h = opts.half_height;
    if (opts.abscissa) {
        crossing = *opts.abscissa;
    } else if (strip) {
        crossing = 0.5 * (g.left_bound() + std::min(g.right_bound(), g.left_bound() + 1.0));
        if (std::isinf(g.left_bound())) crossing = g.right_bound() - 0.5;
        h = std::min(h, strip->margin);
    } else {
        throw SpecError("loop route needs the left poles separated from the right poles");
    }
    const double log_x = std::log(x);
    ContourSpec contour;
    contour.kind = ContourKind::positive_axis_loop;
    contour.opens_left = true;
    contour.half_height = h;
    contour.anchor = crossing - h;
    contour.truncation = 8.0;
    contour.tolerance = opts.tolerance;
    const QuadratureResult q = integrate_loop([&](cplx s) { return g.value(s, log_x); }, contour);
    MBResult res;
    res.value = q.value.real();
    res.imag_residual = std::abs(q.value.imag());
    res.est_error = q.est_error;
    res.route = "loop";
    res.nodes = q.nodes_used;
    res.converged = q.converged;
    return res;
}

}  // namespace

bool GammaRatio::log_value(cplx s, cplx& out) const {
    cplx acc = 0.0;
    for (double a : left_den)
        if (is_pole(s + a)) return false;
    for (double a : right_den)
        if (is_pole(a - s)) return false;
    for (double a : left_num) acc += log_gamma(s + a);
    for (double a : right_num) acc += log_gamma(a - s);
    for (double a : left_den) acc -= log_gamma(s + a);
    for (double a : right_den) acc -= log_gamma(a - s);
    out = acc;
    return true;
}

cplx GammaRatio::value(cplx s, double log_x) const {
    cplx lv;
    if (!log_value(s, lv)) return 0.0;
    const cplx e = lv - s * log_x;
    if (e.real() > 700.0) throw NumericalError("gamma ratio overflows at s = " + std::to_string(s.real()));
    return std::exp(e);
}

int GammaRatio::two_delta() const {
    return static_cast<int>(left_num.size() + right_num.size()) - static_cast<int>(left_den.size() + right_den.size());
}

int GammaRatio::kappa() const {
    return (static_cast<int>(left_num.size()) - static_cast<int>(left_den.size())) -
           (static_cast<int>(right_num.size()) - static_cast<int>(right_den.size()));
}

double GammaRatio::left_bound() const {
    double b = -kInf;
    for (double a : left_num) b = std::max(b, -a);
    return b;
}

double GammaRatio::right_bound() const {
    double b = kInf;
    for (double a : right_num) b = std::min(b, a);
    return b;
}

GammaRatio GammaRatio::mirrored() const { return {right_num, left_num, right_den, left_den}; }

const char* to_string(MBRoute r) {
    switch (r) {
        case MBRoute::automatic: return "auto";
        case MBRoute::line: return "line";
        case MBRoute::residue: return "residue";
        case MBRoute::loop: return "loop";
    }
    return "?";
}

double saddle_abscissa(const GammaRatio& g, double log_x, double lo, double hi) {
    static constexpr double kTaus[] = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
    auto objective = [&](double sigma) {
        double best = -kInf;
        double acc = 0.0;
        double vals[6];
        int n = 0;
        for (double tau : kTaus) {
            cplx lv;
            if (!g.log_value(cplx(sigma, tau), lv)) continue;
            vals[n] = lv.real() - sigma * log_x;
            best = std::max(best, vals[n]);
            ++n;
        }
        if (n == 0) return kInf;
        for (int i = 0; i < n; ++i) acc += std::exp(vals[i] - best);
        return best + std::log(acc);
    };
    constexpr int kGrid = 64;
    const double step = (hi - lo) / kGrid;
    double best_s = lo;
    double best_v = kInf;
    for (int i = 0; i <= kGrid; ++i) {
        const double s = lo + i * step;
        const double v = objective(s);
        if (v < best_v) {
            best_v = v;
            best_s = s;
        }
    }
    double a = std::max(lo, best_s - step);
    double b = std::min(hi, best_s + step);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = objective(c1), f2 = objective(c2);
    for (int it = 0; it < 40 && (b - a) > 1e-3; ++it) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = objective(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = objective(c2);
        }
    }
    const double s = 0.5 * (a + b);
    return objective(s) <= best_v ? s : best_s;
}

MBResult inverse_mellin(const GammaRatio& g, double x, const MBOptions& opts) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("inverse Mellin transform needs x > 0");
    switch (opts.route) {
        case MBRoute::line: return line_route(g, x, opts);
        case MBRoute::residue: return residue_route(g, x, opts);
        case MBRoute::loop: return loop_route(g, x, opts);
        case MBRoute::automatic: break;
    }
    // Residue series converge fastest far from x = 1 on the side where they are
    // valid; the line handles the middle range. Either falls back to the other.
    const bool line_ok = g.two_delta() > 0 && separating_strip(g).has_value();
    const int kappa = g.kappa();
    const bool left_ok = kappa > 0 || (kappa == 0 && x < 1.0);
    const bool right_ok = kappa < 0 || (kappa == 0 && x > 1.0);
    const bool prefer_residue = !line_ok || (left_ok && x <= 0.1) || (right_ok && x >= 10.0);
    // On the other side the residue series is only asymptotic, yet far from
    // x = 1 its smallest term is below the tolerance where the line integral
    // loses everything to the size of x^{-s}.
    if (!prefer_residue && ((kappa < 0 && x <= 1e-3) || (kappa > 0 && x >= 1e3))) {
        try {
            const bool right = kappa > 0;
            MBResult r = right ? residue_sum_left(g.mirrored(), -std::log(x), opts, true)
                               : residue_sum_left(g, std::log(x), opts, true);
            r.route = right ? "residue_right_asymptotic" : "residue_left_asymptotic";
            if (r.nodes > 0 && r.est_error <= opts.tolerance * std::abs(r.value)) return r;
        } catch (const Error&) {
        }
    }
    if (prefer_residue) {
        try {
            return residue_route(g, x, opts);
        } catch (const ConvergenceError&) {
            if (!line_ok) throw;
        }
        return line_route(g, x, opts);
    }
    try {
        return line_route(g, x, opts);
    } catch (const ConvergenceError&) {
        if (!left_ok && !right_ok) throw;
    }
    return residue_route(g, x, opts);
}

}  // namespace polyens
