#include "polyens/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

#include "polyens/ensembles.hpp"
#include "polyens/errors.hpp"
#include "polyens/kernels.hpp"
#include "polyens/meijer.hpp"
#include "polyens/quad.hpp"
#include "polyens/rmt_sim.hpp"
#include "polyens/specfun.hpp"

namespace polyens {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double rel(double a, double b) {
    const double m = std::max(std::fabs(a), std::fabs(b));
    return m == 0.0 ? 0.0 : std::fabs(a - b) / m;
}

std::string list(const std::vector<int>& v) {
    std::ostringstream o;
    o << '(';
    for (std::size_t i = 0; i < v.size(); ++i) o << (i ? "," : "") << v[i];
    o << ')';
    return o.str();
}

TruncationModelParams trunc(int n, std::vector<int> nu, int l) {
    TruncationModelParams p;
    p.n = n;
    p.M = static_cast<int>(nu.size());
    p.nu = std::move(nu);
    p.l = l;
    return p;
}

class Builder {
public:
    Builder(std::string suite, std::string metric_name) {
        r_.suite = std::move(suite);
        r_.metric_name = std::move(metric_name);
    }

    // Library errors count as a failed case with an infinite metric.
    void add(const std::string& name, double threshold, const std::function<double()>& metric, bool upper = true) {
        VerifyCase c;
        c.name = name;
        c.threshold = threshold;
        c.upper_bound = upper;
        try {
            c.metric = metric();
        } catch (const Error&) {
            c.metric = inf;
        }
        c.pass = std::isfinite(c.metric) && (upper ? c.metric <= threshold : c.metric >= threshold);
        r_.cases.push_back(c);
    }

    VerifyReport finish() {
        r_.pass = !r_.cases.empty();
        for (const auto& c : r_.cases) {
            r_.pass = r_.pass && c.pass;
            if (c.upper_bound) r_.max_metric = std::max(r_.max_metric, c.metric);
        }
        return std::move(r_);
    }

private:
    VerifyReport r_;
};

// ---------------------------------------------------------------------------

VerifyReport suite_gamma(const VerifyOptions&) {
    Builder b("gamma", "max relative error");
    b.add("recurrence Gamma(z+1) = z Gamma(z), 1000 points", 1e-11, [] {
        std::mt19937_64 rng(101);
        std::uniform_real_distribution<double> u(-50.0, 50.0);
        double worst = 0.0;
        for (int i = 0; i < 1000;) {
            const cplx z(u(rng), u(rng));
            if (std::abs(z.imag()) < 1e-3 && std::abs(z.real() - std::round(z.real())) < 1e-3) continue;
            worst = std::max(worst, std::abs(std::exp(log_gamma(z + 1.0) - log_gamma(z) - std::log(z)) - 1.0));
            ++i;
        }
        return worst;
    });
    b.add("reflection Gamma(z) Gamma(1-z) = pi / sin(pi z), 1000 points", 1e-11, [] {
        std::mt19937_64 rng(103);
        std::uniform_real_distribution<double> u(-50.0, 50.0);
        double worst = 0.0;
        for (int i = 0; i < 1000;) {
            const cplx z(u(rng), 0.5 * u(rng));
            if (std::abs(z.imag()) < 1e-3 && std::abs(z.real() - std::round(z.real())) < 1e-3) continue;
            const cplx lhs = log_gamma(z) + log_gamma(1.0 - z);
            const cplx rhs = std::log(std::numbers::pi / std::sin(std::numbers::pi * z));
            worst = std::max(worst, std::abs(std::exp(lhs - rhs) - 1.0));
            ++i;
        }
        return worst;
    });
    return b.finish();
}

VerifyReport suite_mellin(const VerifyOptions&) {
    Builder b("mellin", "max relative error of the Mellin round trip");
    std::vector<std::pair<std::string, WeightFunction>> specs;
    auto take = [&](const std::string& model, const PolynomialEnsemble& ens, std::vector<int> ks) {
        for (int k : ks) specs.push_back({model + " w_" + std::to_string(k), ens.weights[k]});
    };
    take("ginibre n=3 nu=(0,1)", ginibre_chain_ensemble(3, {0, 1}), {0, 1, 2});
    take("ginibre n=2 nu=(1,0,2)", ginibre_chain_ensemble(2, {1, 0, 2}), {0, 1});
    take("truncated n=2 nu=(0,1) l=7", truncated_unitary_chain_ensemble(trunc(2, {0, 1}, 7)), {0, 1});
    take("truncated n=2 nu=(1) l=6", truncated_unitary_chain_ensemble(trunc(2, {1}, 6)), {1});
    take("inverse n=2 nu=(1) tilde_nu=(1,0)", inverse_chain_ensemble(2, {1}, {1, 0}), {0, 1});
    std::mt19937_64 rng(107);
    for (const auto& [name, w] : specs) {
        const auto& g = w.spec;
        double lo = -inf, hi = inf;
        for (int j = 0; j < g.m; ++j) lo = std::max(lo, -g.b[j]);
        for (int j = 0; j < g.n; ++j) hi = std::min(hi, 1.0 - g.a[j]);
        const double b_min = -lo;  // G(x) ~ x^{b_min} at 0
        lo += 0.2;
        hi = std::min(hi, lo + 4.0) - 0.2;
        std::uniform_real_distribution<double> us(lo, hi), ut(-2.0, 2.0);
        std::vector<cplx> pts;
        for (int i = 0; i < 10; ++i) pts.emplace_back(us(rng), ut(rng));
        b.add(name + " (" + g.describe() + "), 10 strip points", 1e-6, [&, pts, b_min] {
            double worst = 0.0;
            // the quadrature nodes do not depend on s
            std::unordered_map<double, double> cache;
            auto G = [&](double x) {
                const auto it = cache.find(x);
                return it != cache.end() ? it->second : cache.emplace(x, meijer_g(g, x)).first->second;
            };
            for (const cplx s : pts) {
                auto part = [&](bool imag) {
                    RealFn f = [&](double x) {
                        // in log form: x^{s-1} alone overflows near 0
                        const double gx = G(x);
                        if (gx == 0.0) return 0.0;
                        const cplx v = std::exp((s - 1.0) * std::log(x) + std::log(std::fabs(gx)));
                        return (gx < 0 ? -1.0 : 1.0) * (imag ? v.imag() : v.real());
                    };
                    if (w.support == Support::unit_interval)
                        return integrate_unit_interval(f, s.real() - 1.0 + b_min, 0.0, 1e-10).value.real();
                    return integrate_half_line(f, 1e-10).value.real();
                };
                const cplx num(part(false), part(true));
                const cplx exact = meijer_mellin_moment(g, s);
                worst = std::max(worst, std::abs(num - exact) / std::abs(exact));
            }
            return worst;
        });
    }
    return b.finish();
}

VerifyReport suite_meijer_identities(const VerifyOptions&) {
    Builder b("meijer_identities", "max relative error of the pointwise contract");
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> ub(0.0, 2.0), ux(0.2, 3.0), ua(-0.9, 0.9), unu(0.5, 2.5), ugap(1.0, 3.0);
    std::uniform_int_distribution<int> um(1, 3), uint(0, 2);
    for (int i = 0; i < 10; ++i) {
        const int M = um(rng);
        std::vector<double> bl;
        for (int j = 0; j < M; ++j) bl.push_back(j == 0 ? double(uint(rng)) : ub(rng));
        MeijerGSpec g;
        std::string family;
        switch (i % 3) {
            case 0:
                family = "ginibre";
                g = MeijerGSpec::make(M, 0, {}, bl);
                break;
            case 1: {
                family = "truncation";
                const double a = *std::max_element(bl.begin(), bl.end()) + ugap(rng);
                g = MeijerGSpec::make(M, 0, {a}, bl);
                break;
            }
            default:
                family = "inverse";
                g = MeijerGSpec::make(M, 1, {-2.0 - uint(rng)}, bl);
        }
        const double alpha = ua(rng), nu = unu(rng);
        std::vector<double> xs;
        for (int k = 0; k < 5; ++k) xs.push_back(ux(rng));
        const std::string tag = family + " " + g.describe();
        b.add("shift by " + std::to_string(alpha) + ": " + tag, 1e-7, [&, xs, alpha] {
            const auto h = shift_parameters(g, alpha);
            double worst = 0.0;
            for (double x : xs) worst = std::max(worst, rel(meijer_g(h, x), std::pow(x, alpha) * meijer_g(g, x)));
            return worst;
        });
        b.add("invert: " + tag, 1e-7, [&, xs] {
            const auto h = invert_argument(g);
            double worst = 0.0;
            for (double x : xs) worst = std::max(worst, rel(meijer_g(h, x), meijer_g(g, 1.0 / x)));
            return worst;
        });
        b.add("convolve with x^" + std::to_string(nu - 1) + " e^-x: " + tag, 1e-7, [&, xs, nu] {
            const auto h = convolve_exp_power(g, nu);
            double worst = 0.0;
            for (double y : xs) {
                double direct;
                if (g.n == 0 && g.p == g.q) {
                    // G vanishes beyond 1: integrate over x = y + u, singular at u = 0
                    RealFn f = [&](double u) {
                        const double x = y + u;
                        return std::pow(x, nu - 1.0) * std::exp(-x) * meijer_g(g, y / x);
                    };
                    direct = integrate_half_line(f, 1e-11, 1.0).value.real();
                } else {
                    RealFn f = [&](double x) { return std::pow(x, nu - 1.0) * std::exp(-x) * meijer_g(g, y / x); };
                    direct = integrate_half_line(f, 1e-11, std::max(y, 0.5)).value.real();
                }
                worst = std::max(worst, rel(meijer_g(h, y), direct));
            }
            return worst;
        });
    }
    return b.finish();
}

VerifyReport suite_biorthogonality(const VerifyOptions& opts) {
    Builder b("biorthogonality", "max_abs_delta_deviation");
    std::vector<int> ns = opts.n > 0 ? std::vector<int>{opts.n} : std::vector<int>{4, 8};
    for (int n : ns)
        for (int M = 1; M <= 3; ++M)
            for (int variant = 0; variant < 2; ++variant) {
                std::vector<int> nu(M, 0);
                if (variant)
                    for (int j = 0; j < M; ++j) nu[j] = j + 1;
                const auto p = trunc(n, nu, 2 * n + nu[0] + 2);
                b.add("n=" + std::to_string(n) + " M=" + std::to_string(M) + " nu=" + list(nu) +
                          " l=" + std::to_string(p.l),
                      1e-8, [p] {
                          const Eigen::MatrixXd B = biorthogonality_matrix(p);
                          return (B - Eigen::MatrixXd::Identity(B.rows(), B.cols())).cwiseAbs().maxCoeff();
                      });
            }
    return b.finish();
}

VerifyReport suite_kernel_routes(const VerifyOptions&) {
    Builder b("kernel_routes", "max relative difference");
    struct Case {
        TruncationModelParams p;
        std::vector<double> grid;
    };
    const std::vector<Case> cases{
        {trunc(2, {0}, 5), {0.1, 0.4, 0.8}},
        {trunc(6, {1}, 15), {0.05, 0.3, 0.7}},
        {trunc(4, {0, 1}, 11), {0.3, 1.0, 2.5}},
        {trunc(6, {1, 2}, 16), {0.5, 2.0, 5.0}},
    };
    auto label = [](const TruncationModelParams& p) {
        return "n=" + std::to_string(p.n) + " M=" + std::to_string(p.M) + " nu=" + list(p.nu) +
               " l=" + std::to_string(p.l);
    };
    for (const auto& c : cases) {
        b.add("contour vs biorthogonal_sum vs meijer_product, 3x3 grid, " + label(c.p), 1e-5, [&c] {
            double worst = 0.0;
            for (double x : c.grid)
                for (double y : c.grid) {
                    const double a = kernel_finite(c.p, x, y, KernelRoute::contour).value;
                    const double s = kernel_finite(c.p, x, y, KernelRoute::biorthogonal_sum).value;
                    const double m = kernel_finite(c.p, x, y, KernelRoute::meijer_product).value;
                    worst = std::max({worst, rel(a, s), rel(a, m), rel(s, m)});
                }
            return worst;
        });
    }
    for (const auto& c : {cases[0], cases[2]}) {
        b.add("kernel_generic vs kernel_finite, 3x3 grid, " + label(c.p), 1e-5, [&c] {
            const GenericKernel K(truncated_unitary_chain_ensemble(c.p));
            double worst = 0.0;
            for (double x : c.grid)
                for (double y : c.grid) worst = std::max(worst, rel(K(x, y), kernel_finite(c.p, x, y, KernelRoute::contour).value));
            return worst;
        });
    }
    b.add("trace of K_n equals n, " + label(cases[2].p), 1e-4, [&] {
        const auto& p = cases[2].p;
        RealFn f = [&](double x) { return kernel_finite(p, x, x, KernelRoute::contour).value; };
        return rel(integrate_half_line(f, 1e-8).value.real(), p.n);
    });
    b.add("trace of K_n equals n, " + label(cases[1].p), 1e-4, [&] {
        const auto& p = cases[1].p;
        RealFn f = [&](double x) { return kernel_finite(p, x, x, KernelRoute::biorthogonal_sum).value; };
        return rel(integrate_unit_interval(f, 0.0, 0.0, 1e-9).value.real(), p.n);
    });
    return b.finish();
}

VerifyReport suite_telescoping(const VerifyOptions&) {
    Builder b("telescoping", "max relative difference");
    b.add("100 random (s, t, n <= 6, l)", 1e-10, [] {
        std::mt19937_64 rng(113);
        std::uniform_real_distribution<double> st(-2.7, 3.9);
        std::uniform_int_distribution<int> nd(1, 6), ld(0, 5);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const int n = nd(rng);
            const double l = 2 * n + ld(rng);
            const double s = st(rng) + 0.013, t = st(rng) + 0.029;
            worst = std::max(worst, rel(telescoping_lhs(n, l, s, t), telescoping_rhs(n, l, s, t)));
        }
        return worst;
    });
    return b.finish();
}

VerifyReport suite_hard_edge_convergence(const VerifyOptions&) {
    Builder b("hard_edge_convergence", "sup deviation on the grid, or the n=40 to n=10 ratio");
    const HardEdgeParams hp{{0.0, 1.0}};
    const std::vector<double> grid{0.5, 1.0, 2.0, 4.0};
    auto dev = [&](int n) {
        const auto p = trunc(n, {0, 1}, 2 * n + 3);
        const double c = double(p.l - n) * n;
        double worst = 0.0;
        for (double x : grid)
            for (double y : grid) {
                const double fin = kernel_finite(p, x / c, y / c, KernelRoute::contour).value / c;
                worst = std::max(worst, std::fabs(fin - kernel_hard_edge(hp, x, y, KernelRoute::contour).value));
            }
        return worst;
    };
    double d10 = inf, d40 = inf;
    b.add("n=10, l=23", inf, [&] { return d10 = dev(10); });
    b.add("n=40, l=83", 5e-2, [&] { return d40 = dev(40); });
    b.add("ratio of the n=40 to the n=10 deviation", 1.0, [&] {
        const double r = d40 / d10;
        return r < 1.0 ? r : inf;
    });
    return b.finish();
}

// Classical M = 1 hard-edge kernel from the power series of the Bessel functions:
// y^nu sum_{j,k} (-x)^j (-y)^k / (j! k! Gamma(j+nu+1) Gamma(k+nu+1) (j+k+nu+1)).
double bessel_series_kernel(double nu, double x, double y) {
    double s = 0.0;
    for (int j = 0; j < 80; ++j)
        for (int k = 0; k < 80; ++k) {
            const double lt = j * std::log(x) + k * std::log(y) - std::lgamma(j + 1.0) - std::lgamma(k + 1.0) -
                              std::lgamma(j + nu + 1.0) - std::lgamma(k + nu + 1.0);
            s += ((j + k) % 2 ? -1.0 : 1.0) * std::exp(lt) / (j + k + nu + 1.0);
        }
    return std::pow(y, nu) * s;
}

VerifyReport suite_bessel(const VerifyOptions&) {
    Builder b("bessel", "max relative error against the Bessel series");
    const std::vector<double> grid{0.5, 1.5, 4.0};
    for (double nu : {0.0, 1.0, 2.5}) {
        for (auto route : {KernelRoute::contour, KernelRoute::meijer_product}) {
            std::ostringstream name;
            name << "nu=" << nu << ", route " << to_string(route) << ", 3x3 grid";
            b.add(name.str(), 1e-6, [&, nu, route] {
                double worst = 0.0;
                for (double x : grid)
                    for (double y : grid)
                        worst = std::max(worst, rel(kernel_hard_edge(HardEdgeParams{{nu}}, x, y, route).value,
                                                    bessel_series_kernel(nu, x, y)));
                return worst;
            });
        }
    }
    return b.finish();
}

VerifyReport suite_borodin(const VerifyOptions&) {
    Builder b("borodin", "max relative difference");
    const std::vector<std::pair<double, double>> pts{{0.3, 0.7}, {1.0, 1.0}, {2.5, 0.8}};
    for (int M : {2, 3})
        for (double alpha : {0.0, 0.5, 1.0}) {
            std::ostringstream name;
            name << "theta = 1/M identity, M=" << M << " alpha=" << alpha;
            b.add(name.str(), 1e-5, [&, M, alpha] {
                const auto hp = borodin_inverse_integer_params(M, alpha);
                double worst = 0.0;
                for (auto [x, y] : pts) {
                    const double lhs = scaled_borodin_theta_inverse_integer(M, alpha, x, y);
                    const double rhs = std::pow(x / y, alpha) * kernel_hard_edge(hp, x, y, KernelRoute::contour).value;
                    worst = std::max(worst, rel(lhs, rhs));
                }
                return worst;
            });
        }
    for (double alpha : {0.0, 0.5, 1.0}) {
        std::ostringstream name;
        name << "theta = M identity, M=2 alpha=" << alpha;
        b.add(name.str(), 1e-5, [&, alpha] {
            const auto hp = borodin_integer_params(2, alpha);
            double worst = 0.0;
            for (auto [x, y] : pts) {
                const double lhs = scaled_borodin_theta_integer(2, alpha, x, y);
                const double rhs = kernel_hard_edge(hp, y, x, KernelRoute::contour).value;
                worst = std::max(worst, rel(lhs, rhs));
            }
            return worst;
        });
    }
    for (double alpha : {0.0, 0.5, 1.0}) {
        std::ostringstream name;
        name << "alpha' reflection at theta=2, alpha=" << alpha;
        b.add(name.str(), 1e-5, [&, alpha] {
            const double th = 2.0, ap = (alpha + 1) / th - 1;
            double worst = 0.0;
            for (auto [x, y] : pts) {
                const double lhs = (1 / th) * std::pow(x, 1 / th - 1) *
                                   kernel_borodin({alpha, th}, std::pow(x, 1 / th), std::pow(y, 1 / th));
                const double rhs = std::pow(x / y, ap) * kernel_borodin({ap, 1 / th}, y, x);
                worst = std::max(worst, rel(lhs, rhs));
            }
            return worst;
        });
    }
    return b.finish();
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct McMetrics {
    double ks_ginibre = inf, ks_truncated = inf, fixed_x_p = 0.0, fixed_x_ks = inf, charpoly_z = inf,
           charpoly_z_jacobi = inf;
    long rejections = 0;
};

// Largest |estimate - exact| / standard error over the non-leading coefficients.
double charpoly_zscore(const SampleBatch& batch, const TruncationModelParams& p) {
    const auto est = average_char_poly(batch);
    const auto exact = pk_coefficients(p, p.n);
    double z = 0.0;
    for (int k = 0; k < p.n; ++k) z = std::max(z, std::fabs(est.coefficients[k] - exact[k]) / est.std_errors[k]);
    return z;
}

McMetrics monte_carlo_metrics(const VerifyOptions& opts, int threads) {
    McMetrics m;
    const int N = opts.samples;
    {
        const auto spec = MatrixChainSpec::ginibre_chain(3, {0, 1});
        const auto batch = sample_chain(spec, opts.seed, N, threads);
        m.ks_ginibre = empirical_vs_density(batch, pooled_density(chain_ensemble(spec)), 0.02).ks_distance;
        m.rejections += batch.rejections;
    }
    {
        const auto p = trunc(2, {0, 1}, 7);
        const auto spec = MatrixChainSpec::truncated_chain(p);
        const auto batch = sample_chain(spec, opts.seed + 1, N, threads);
        m.ks_truncated = empirical_vs_density(batch, pooled_density(chain_ensemble(spec)), 0.02).ks_distance;
        m.charpoly_z = charpoly_zscore(batch, p);
        m.rejections += batch.rejections;
    }
    {
        Eigen::MatrixXcd x0 = Eigen::MatrixXcd::Zero(2, 2);
        x0(0, 0) = 1.0;
        x0(1, 1) = std::sqrt(2.0);
        const MatrixChainSpec spec{2, {FixedFactor{x0}, GinibreFactor{0}}};
        const auto batch = sample_chain(spec, opts.seed + 2, N, threads);
        const std::vector<double> xs{1.0, 2.0};
        DensityModel marginal{[&](double y) {
            if (!(y > 0)) return 0.0;
            RealFn f = [&](double t) { return t == y ? 0.0 : fixed_x_transition_density(xs, 0.0, {y, t}); };
            return integrate_half_line(f, 1e-10).value.real();
        }};
        const auto rep = empirical_vs_density(batch, marginal, 0.02);
        m.fixed_x_p = rep.chi2_p_value;
        m.fixed_x_ks = rep.ks_distance;
    }
    {
        const auto p = trunc(2, {0}, 4);
        const auto batch = sample_chain(MatrixChainSpec::truncated_chain(p), opts.seed + 3, N, threads);
        m.charpoly_z_jacobi = charpoly_zscore(batch, p);
    }
    return m;
}

VerifyReport suite_monte_carlo(const VerifyOptions& opts) {
    Builder b("monte_carlo", "KS distance, chi-square p-value or coefficient z-score");
    McMetrics m;
    try {
        m = monte_carlo_metrics(opts, opts.threads);
    } catch (const Error&) {
    }
    const std::string draws = std::to_string(opts.samples) + " draws";
    b.add("(a) Ginibre chain n=3 nu=(0,1): pooled KS vs K_n(x,x)/n, " + draws, 0.02, [&] { return m.ks_ginibre; });
    b.add("(b) truncated chain n=2 nu=(0,1) l=7: pooled KS vs K_n(x,x)/n, " + draws, 0.02,
          [&] { return m.ks_truncated; });
    b.add("(c) G X0 with X0 = diag(1, sqrt 2): binned chi-square p-value, " + draws, 1e-3, [&] { return m.fixed_x_p; },
          false);
    b.add("(c) G X0 with X0 = diag(1, sqrt 2): pooled KS, " + draws, 0.02, [&] { return m.fixed_x_ks; });
    b.add("(d) average characteristic polynomial vs P_n, chain (b): max |z|", 3.0, [&] { return m.charpoly_z; });
    b.add("(d) average characteristic polynomial vs P_n, n=2 nu=(0) l=4: max |z|", 3.0,
          [&] { return m.charpoly_z_jacobi; });
    return b.finish();
}

VerifyReport suite_determinism(const VerifyOptions& opts) {
    Builder b("determinism", "number of metrics that differ in any bit");
    b.add("Monte Carlo metrics, 1 worker vs several, same seed", 0.0, [&] {
        const McMetrics a = monte_carlo_metrics(opts, 1);
        const McMetrics c = monte_carlo_metrics(opts, std::max(2, default_thread_count()));
        const double va[] = {a.ks_ginibre, a.ks_truncated, a.fixed_x_p, a.fixed_x_ks, a.charpoly_z, a.charpoly_z_jacobi};
        const double vc[] = {c.ks_ginibre, c.ks_truncated, c.fixed_x_p, c.fixed_x_ks, c.charpoly_z, c.charpoly_z_jacobi};
        int differ = a.rejections != c.rejections;
        for (int i = 0; i < 6; ++i) differ += std::memcmp(&va[i], &vc[i], sizeof(double)) != 0;
        return double(differ);
    });
    return b.finish();
}

using SuiteFn = VerifyReport (*)(const VerifyOptions&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
    static const std::vector<std::pair<std::string, SuiteFn>> r{
        {"gamma", suite_gamma},
        {"mellin", suite_mellin},
        {"meijer_identities", suite_meijer_identities},
        {"biorthogonality", suite_biorthogonality},
        {"kernel_routes", suite_kernel_routes},
        {"telescoping", suite_telescoping},
        {"hard_edge_convergence", suite_hard_edge_convergence},
        {"bessel", suite_bessel},
        {"borodin", suite_borodin},
        {"monte_carlo", suite_monte_carlo},
        {"determinism", suite_determinism},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, fn] : registry()) v.push_back(name);
        return v;
    }();
    return names;
}

VerifyReport run_verify_suite(const std::string& suite, const VerifyOptions& opts) {
    for (const auto& [name, fn] : registry()) {
        if (name != suite) continue;
        const auto t0 = std::chrono::steady_clock::now();
        VerifyReport r = fn(opts);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }
    std::string known;
    for (const auto& n : verify_suite_names()) known += (known.empty() ? "" : ", ") + n;
    throw DomainError("unknown verify suite '" + suite + "' (known: " + known + ")");
}

}  // namespace polyens
