#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "polyens/errors.hpp"
#include "polyens/meijer.hpp"

using namespace polyens;

namespace {

// int_0^inf x^{nu-1} e^{-x} G(y/x) dx by direct quadrature.
double convolution_oracle(const MeijerGSpec& g, double nu, double y) {
    return integrate_half_line(
               [&](double x) { return std::pow(x, nu - 1.0) * std::exp(-x) * meijer_g(g, y / x); }, 1e-11,
               std::max(y, 0.5))
        .value.real();
}

std::vector<MeijerGSpec> model_specs() {
    return {
        MeijerGSpec::make(1, 0, {}, {0.0}),
        MeijerGSpec::make(2, 0, {}, {0.0, 1.0}),
        MeijerGSpec::make(3, 0, {}, {1.0, 0.0, 2.0}),
        MeijerGSpec::make(2, 0, {4.0}, {0.0, 1.0}),
        MeijerGSpec::make(3, 0, {6.0}, {1.0, 0.0, 2.0}),
        MeijerGSpec::make(1, 1, {-2.0}, {0.0}),
        MeijerGSpec::make(2, 1, {-3.0}, {1.0, 0.0}),
    };
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(MeijerGSpec::make(2, 0, {}, {0.0}), SpecError);
    CHECK_THROWS_AS(MeijerGSpec::make(0, 2, {1.0}, {}), SpecError);
    CHECK_THROWS_AS(MeijerGSpec::make(1, 1, {2.0}, {0.0}), SpecError);  // a - b = 2
    CHECK_NOTHROW(MeijerGSpec::make(1, 1, {-2.0}, {0.0}));
    MeijerGSpec bad;
    bad.m = 1;
    bad.q = 2;
    bad.b = {0.0};
    CHECK_THROWS_AS(bad.validate(), SpecError);
}

TEST_CASE("meijer_g examples") {
    CHECK(meijer_g(MeijerGSpec::make(1, 0, {}, {0.0}), 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
    CHECK(meijer_g(MeijerGSpec::make(1, 0, {2.0}, {0.0}), 0.25) == doctest::Approx(0.75).epsilon(1e-13));
    const double oracle = integrate_half_line([](double t) { return std::exp(-t - 1.0 / t) / t; }, 1e-14).value.real();
    const auto v = meijer_g_detail(MeijerGSpec::make(2, 0, {}, {0.0, 0.0}), 1.0);
    CHECK(v.value == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(v.imag_residual <= 1e-8 * std::abs(v.value));
}

TEST_CASE("meijer_g closed forms") {
    // x^nu e^{-x}
    CHECK(meijer_g(MeijerGSpec::make(1, 0, {}, {1.5}), 2.0) ==
          doctest::Approx(std::pow(2.0, 1.5) * std::exp(-2.0)).epsilon(1e-12));
    // Jacobi weight x^b (1-x)^{a-b-1} / Gamma(a-b), zero beyond 1
    CHECK(meijer_g(MeijerGSpec::make(1, 0, {4.0}, {1.0}), 0.3) ==
          doctest::Approx(0.3 * 0.49 / 2.0).epsilon(1e-13));
    CHECK(meijer_g(MeijerGSpec::make(1, 0, {4.0}, {1.0}), 1.7) == 0.0);
    // Gamma(1+N) / (1+x)^{1+N}
    CHECK(meijer_g(MeijerGSpec::make(1, 1, {-1.0}, {0.0}), 0.5) == doctest::Approx(1.0 / 2.25).epsilon(1e-12));
    // Bessel: G^{1,0}_{0,2}(-; 0, 0 | x) = J_0(2 sqrt x)
    CHECK(meijer_g(MeijerGSpec::make(1, 0, {}, {0.0, 0.0}), 4.0) ==
          doctest::Approx(std::cyl_bessel_j(0.0, 4.0)).epsilon(1e-13));
    // 2 K_0(2 sqrt x) at large argument via the saddle abscissa
    CHECK(meijer_g(MeijerGSpec::make(2, 0, {}, {0.0, 0.0}), 300.0) ==
          doctest::Approx(2.0 * std::cyl_bessel_k(0.0, 2.0 * std::sqrt(300.0))).epsilon(1e-11));
}

TEST_CASE("meijer_g on explicit contours") {
    const auto g = MeijerGSpec::make(2, 0, {}, {0.0, 1.0});
    ContourSpec line;
    line.kind = ContourKind::vertical_line;
    line.anchor = 1.0;
    const auto a = meijer_g(g, 0.8, line);
    CHECK(a.route == "line");
    ContourSpec loop;
    loop.kind = ContourKind::positive_axis_loop;
    const auto b = meijer_g(g, 0.8, loop);
    CHECK(b.route == "loop");
    CHECK(rel(a.value, b.value) < 1e-10);
    line.anchor = -0.5;
    CHECK_THROWS_AS(meijer_g(g, 0.8, line), SpecError);
    ContourSpec bad;
    bad.kind = ContourKind::unit_interval;
    CHECK_THROWS_AS(meijer_g(g, 0.8, bad), SpecError);
}

TEST_CASE("meijer_mellin_moment examples") {
    CHECK(meijer_mellin_moment(MeijerGSpec::make(1, 0, {}, {0.0}), 3.0).real() == doctest::Approx(2.0));
    CHECK(meijer_mellin_moment(MeijerGSpec::make(1, 0, {}, {2.0}), 1.0).real() == doctest::Approx(2.0));
    // truncation weight w_0, M = 1, nu_1 = 0, l - 2n = 1: Gamma(s) / Gamma(s + 2) up to the prefactor
    const auto w0 = MeijerGSpec::make(1, 0, {2.0}, {0.0});
    const double quad = integrate_unit_interval([&](double x) { return meijer_g(w0, x); }, 0.0, 0.0, 1e-12).value.real();
    CHECK(meijer_mellin_moment(w0, 1.0).real() == doctest::Approx(quad).epsilon(1e-11));
    CHECK_THROWS_AS(meijer_mellin_moment(MeijerGSpec::make(1, 0, {}, {0.0}), -0.5), StripError);
    CHECK_THROWS_AS(meijer_mellin_moment(MeijerGSpec::make(1, 1, {-2.0}, {0.0}), 3.5), StripError);
}

TEST_CASE("shift_parameters") {
    const auto e = MeijerGSpec::make(1, 0, {}, {0.0});
    CHECK(shift_parameters(e, 2.5) == MeijerGSpec::make(1, 0, {}, {2.5}));
    CHECK(shift_parameters(e, 0.0) == e);
    const auto g = MeijerGSpec::make(2, 0, {}, {0.0, 0.0});
    CHECK(meijer_g(shift_parameters(g, 1.5), 0.7) == doctest::Approx(std::pow(0.7, 1.5) * meijer_g(g, 0.7)).epsilon(1e-12));
}

TEST_CASE("invert_argument") {
    for (const auto& g : model_specs()) CHECK(invert_argument(invert_argument(g)) == g);
    const auto e = MeijerGSpec::make(1, 0, {}, {0.0});
    CHECK(meijer_g(invert_argument(e), 2.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    // inversion followed by a shift of -n-1 maps (a; b) to (-b-n; -a-n)
    const int n = 3;
    const auto phi = MeijerGSpec::make(2, 1, {-4.0}, {1.0, 0.0});
    const auto psi = shift_parameters(invert_argument(phi), -n - 1.0);
    CHECK(psi.m == phi.n);
    CHECK(psi.n == phi.m);
    CHECK(psi.a == std::vector<double>{-1.0 - n, 0.0 - n});
    CHECK(psi.b == std::vector<double>{4.0 - n});
}

TEST_CASE("convolve_exp_power") {
    const auto g1 = MeijerGSpec::make(1, 0, {}, {1.0});
    CHECK(convolve_exp_power(g1, 2.0) == MeijerGSpec::make(2, 0, {}, {2.0, 1.0}));
    const auto e = MeijerGSpec::make(1, 0, {}, {0.0});
    const double oracle = integrate_half_line([](double t) { return std::exp(-t - 1.0 / t) / t; }, 1e-14).value.real();
    CHECK(meijer_g(convolve_exp_power(e, 0.0), 1.0) == doctest::Approx(oracle).epsilon(1e-12));
    // M - 1 applications reproduce the Ginibre chain parameter list
    auto w = e;
    for (double nu : {1.0, 2.0, 3.0}) w = convolve_exp_power(w, nu);
    CHECK(w == MeijerGSpec::make(4, 0, {}, {3.0, 2.0, 1.0, 0.0}));
}

TEST_CASE("wright_to_meijer") {
    const auto a1 = wright_to_meijer(1.0, 1, WrightMode::b_equals_1_over_M);
    CHECK(a1.spec == MeijerGSpec::make(1, 0, {}, {0.0, 0.0}));
    CHECK(evaluate(a1, 1.0) == doctest::Approx(wright_bessel({1.0, 1.0}, 1.0)).epsilon(1e-13));
    for (double a : {0.5, 1.0, 2.5}) {
        for (double x : {0.2, 1.3}) {
            CHECK(evaluate(wright_to_meijer(a, 1, WrightMode::b_equals_M), x) ==
                  doctest::Approx(evaluate(wright_to_meijer(a, 1, WrightMode::b_equals_1_over_M), x)).epsilon(1e-13));
        }
    }
    CHECK(evaluate(wright_to_meijer(1.0, 2, WrightMode::b_equals_M), 0.5) ==
          doctest::Approx(wright_bessel({1.0, 2.0}, 0.5)).epsilon(1e-12));
    for (int M : {2, 3}) {
        for (double a : {0.5, 1.75}) {
            for (double x : {0.3, 2.0}) {
                CHECK(evaluate(wright_to_meijer(a, M, WrightMode::b_equals_M), x) ==
                      doctest::Approx(wright_bessel({a, double(M)}, x)).epsilon(1e-11));
                CHECK(evaluate(wright_to_meijer(a, M, WrightMode::b_equals_1_over_M), x) ==
                      doctest::Approx(wright_bessel({a, 1.0 / M}, x)).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("property: Mellin round trip for model weights") {
    std::mt19937_64 rng(5);
    for (const auto& g : model_specs()) {
        double lo = -1e300, hi = 1e300;
        for (int j = 0; j < g.m; ++j) lo = std::max(lo, -g.b[j]);
        for (int j = 0; j < g.n; ++j) hi = std::min(hi, 1.0 - g.a[j]);
        lo = std::max(lo, 0.0) + 0.1;
        hi = std::min(hi, lo + 3.0) - 0.1;
        std::uniform_real_distribution<double> u(lo, hi);
        for (int i = 0; i < 3; ++i) {
            const double s = u(rng);
            const double num = integrate_half_line([&](double x) { return std::pow(x, s - 1.0) * meijer_g(g, x); }, 1e-10)
                                   .value.real();
            CHECK(rel(num, meijer_mellin_moment(g, s).real()) < 1e-6);
        }
    }
}

TEST_CASE("property: identity algebra pointwise contracts") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ux(0.1, 3.0), ua(-0.9, 0.9), unu(0.0, 2.0);
    for (const auto& g : model_specs()) {
        const double alpha = ua(rng);
        const double nu = unu(rng) + 0.5;
        for (int i = 0; i < 3; ++i) {
            const double x = ux(rng);
            CHECK(rel(meijer_g(shift_parameters(g, alpha), x), std::pow(x, alpha) * meijer_g(g, x)) < 1e-7);
            CHECK(rel(meijer_g(invert_argument(g), x), meijer_g(g, 1.0 / x)) < 1e-7);
        }
        const double y = ux(rng);
        CHECK(rel(meijer_g(convolve_exp_power(g, nu), y), convolution_oracle(g, nu, y)) < 1e-7);
    }
}

TEST_CASE("property: loop and line routes agree") {
    MeijerOptions line, loop;
    line.route = MBRoute::line;
    loop.route = MBRoute::loop;
    for (const auto& g : model_specs()) {
        for (double x : {0.2, 1.0, 3.0}) {
            if (g.q == g.p && x >= 1.0) continue;  // the left loop needs decay to the left
            CHECK(rel(meijer_g(g, x, loop), meijer_g(g, x, line)) < 1e-7);
        }
    }
}

TEST_CASE("p > q at tiny argument: leading power behavior") {
    // G^{1,2}_{2,1}(-2, -3; 1 | x) = Gamma(4) Gamma(5) x (1 + O(x))
    const auto g = MeijerGSpec::make(1, 2, {-2.0, -3.0}, {1.0});
    for (double x : {1e-300, 1e-200, 1e-50, 1e-20}) CHECK(rel(meijer_g(g, x), 144.0 * x) < 1e-12);
    const auto r = meijer_g_detail(g, 1e-8);
    CHECK(r.est_error <= 1e-12 * std::abs(r.value));
}

TEST_CASE("residue and line routes agree") {
    MeijerOptions res, line;
    res.route = MBRoute::residue;
    line.route = MBRoute::line;
    for (const auto& g : {MeijerGSpec::make(2, 0, {}, {0.0, 0.0}), MeijerGSpec::make(3, 0, {}, {0.0, 0.5, 1.0}),
                          MeijerGSpec::make(2, 0, {3.0}, {0.0, 1.0})}) {
        for (double x : {0.3, 2.0}) CHECK(rel(meijer_g(g, x, res), meijer_g(g, x, line)) < 1e-10);
    }
}

TEST_CASE("nearly coincident left poles") {
    // G^{2,0}_{2,2}(1, 1 + d; 0, d | x) = (1 - x^d) / d on (0, 1)
    MeijerOptions res;
    res.route = MBRoute::residue;
    for (double d : {1e-3, 1e-5, 1e-7}) {
        const auto g = MeijerGSpec::make(2, 0, {1.0, 1.0 + d}, {0.0, d});
        for (double x : {0.01, 0.1, 0.3, 0.6, 0.9, 0.999}) {
            const double exact = -std::expm1(d * std::log(x)) / d;
            CHECK(rel(meijer_g(g, x), exact) < 1e-12);
            if (x <= 0.3) CHECK(rel(meijer_g(g, x, res), exact) < 1e-12);
        }
    }
}

TEST_CASE("expansion at x = 1") {
    // G^{1,0}_{1,1}(a; b | x) = x^b (1 - x)^{a-b-1} / Gamma(a - b)
    const auto g1 = MeijerGSpec::make(1, 0, {1.65}, {0.3});
    for (double x : {0.3, 0.75, 0.999, 1.0 - 1e-9}) {
        const double exact = std::pow(x, 0.3) * std::pow(1.0 - x, 0.35) / std::tgamma(1.35);
        CHECK(rel(meijer_g_near_one(g1, x).value, exact) < 1e-13);
        CHECK(rel(meijer_g(g1, x), exact) < 1e-13);
    }
    CHECK(meijer_g_near_one(MeijerGSpec::make(2, 0, {2.5, 2.0}, {0.0, 0.0}), 1.0).value == 0.0);
    CHECK_THROWS_AS(meijer_g_near_one(MeijerGSpec::make(1, 0, {0.5}, {0.0}), 1.0), DomainError);
    CHECK_THROWS_AS(meijer_g_near_one(MeijerGSpec::make(2, 0, {}, {0.0, 0.0}), 0.5), SpecError);
    CHECK_THROWS_AS(meijer_g_near_one(MeijerGSpec::make(1, 0, {1.0}, {1.0}), 0.5), SingularityError);

    // against the residue series where that converges quickly
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ub(0.0, 2.0), ugap(0.2, 3.0);
    MeijerOptions res;
    res.route = MBRoute::residue;
    for (int it = 0; it < 40; ++it) {
        const int q = 1 + it % 4;
        std::vector<double> a, b;
        for (int j = 0; j < q; ++j) {
            b.push_back(ub(rng));
            a.push_back(b.back() + ugap(rng));
        }
        const auto g = MeijerGSpec::make(q, 0, a, b);
        for (double x : {0.3, 0.5}) {
            const auto r = meijer_g_detail(g, x, res);
            const auto e = meijer_g_near_one(g, x);
            CHECK(std::abs(r.value - e.value) <= r.est_error + e.est_error + 1e-12 * std::abs(r.value));
        }
    }
}
