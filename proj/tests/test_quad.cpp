#include <cmath>
#include <numbers>

#include "doctest.h"
#include "polyens/errors.hpp"
#include "polyens/quad.hpp"

using namespace polyens;

namespace {

// int_0^inf t^{-1} e^{-t} e^{-1/t} dt = 2 K_0(2), by brute force on (0,inf).
double convolution_oracle() {
    return integrate_half_line([](double t) { return std::exp(-t - 1.0 / t) / t; }, 1e-14).value.real();
}

ContourSpec line(double c) {
    ContourSpec s;
    s.kind = ContourKind::vertical_line;
    s.anchor = c;
    s.tolerance = 1e-12;
    return s;
}

ContourSpec loop() {
    ContourSpec s;
    s.kind = ContourKind::positive_axis_loop;
    s.anchor = 0.0;
    s.half_height = 0.3;
    s.tolerance = 1e-12;
    s.truncation = 8.0;
    return s;
}

}  // namespace

TEST_CASE("vertical line: inverse Mellin transform of Gamma") {
    for (double x : {1.0, 2.0}) {
        const auto r = integrate_vertical_line([&](cplx s) { return std::exp(log_gamma(s) - s * std::log(x)); }, line(1.0));
        CHECK(r.converged);
        CHECK(r.value.real() == doctest::Approx(std::exp(-x)).epsilon(1e-12));
        CHECK(std::abs(r.value.imag()) < 1e-14);
    }
}

TEST_CASE("vertical line: Gamma squared matches the convolution oracle") {
    const auto r = integrate_vertical_line([](cplx s) { return std::exp(2.0 * log_gamma(s)); }, line(1.0));
    const double oracle = convolution_oracle();
    CHECK(oracle == doctest::Approx(2.0 * std::cyl_bessel_k(0.0, 2.0)).epsilon(1e-12));
    CHECK(r.value.real() == doctest::Approx(oracle).epsilon(1e-11));
}

TEST_CASE("vertical line: non-decaying integrand is reported") {
    auto spec = line(0.5);
    spec.max_truncation = 500.0;
    CHECK_THROWS_AS(integrate_vertical_line([](cplx s) { return 1.0 / s; }, spec), ConvergenceError);
}

TEST_CASE("property: refinement error estimates are non-increasing at the end") {
    for (double x : {0.2, 1.0, 3.0}) {
        const auto r = integrate_vertical_line(
            [&](cplx s) { return std::exp(log_gamma(s) + log_gamma(s + 0.5) - s * std::log(x)); }, line(0.75));
        REQUIRE(r.history.size() >= 2);
        CHECK(r.history[r.history.size() - 1] <= r.history[r.history.size() - 2]);
        CHECK(r.est_error <= r.history.back());
        CHECK(r.est_error <= 1e-12 * std::max(1.0, std::abs(r.value)));
    }
}

TEST_CASE("loop: residue of 1/t with the rays closed at the truncation") {
    auto spec = loop();
    spec.close_at_truncation = true;
    const auto r = integrate_loop([](cplx t) { return 1.0 / t; }, spec);
    CHECK(r.value.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(r.value.imag()) < 1e-12);
}

TEST_CASE("loop: analytic integrand gives zero") {
    auto spec = loop();
    spec.close_at_truncation = true;
    const auto r = integrate_loop([](cplx t) { return std::exp(t); }, spec);
    CHECK(std::abs(r.value) < 1e-12);
}

TEST_CASE("loop: Gamma(t - 1/2)/Gamma(t + 1) x^t encloses only the pole at 1/2") {
    const double x = 0.5;
    const auto r = integrate_loop(
        [&](cplx t) { return std::exp(log_gamma(t - 0.5) - log_gamma(t + 1.0) + t * std::log(x)); }, loop());
    const double oracle = std::sqrt(x) / std::tgamma(1.5);
    CHECK(r.value.real() == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("loop: route equivalence with a vertical line") {
    // (1/2 pi i) int Gamma(s) x^{-s} ds over the line equals the loop around the
    // negative axis (all poles of Gamma enclosed).
    const double x = 0.7;
    auto f = [&](cplx s) { return std::exp(log_gamma(s) - s * std::log(x)); };
    auto spec = loop();
    spec.opens_left = true;
    spec.anchor = 0.5 - spec.half_height;
    const auto a = integrate_loop(f, spec);
    const auto b = integrate_vertical_line(f, line(0.5));
    CHECK(a.value.real() == doctest::Approx(b.value.real()).epsilon(1e-10));
}

TEST_CASE("loop geometry is validated") {
    auto spec = loop();
    spec.anchor = -0.3;
    CHECK_THROWS_AS(integrate_loop([](cplx t) { return 1.0 / t; }, spec), GeometryError);
    spec = loop();
    spec.initial_nodes = 4;
    CHECK_THROWS_AS(spec.validate(), DomainError);
}

TEST_CASE("unit interval: algebraic endpoint singularities") {
    CHECK(integrate_unit_interval([](double u) { return 1.0 / std::sqrt(u); }, -0.5, 0.0, 1e-13).value.real() ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(integrate_unit_interval([](double u) { return std::log(u); }, 0.0, 0.0, 1e-13).value.real() ==
          doctest::Approx(-1.0).epsilon(1e-12));
    double series = 0.0;  // sum (-1)^k / ((2k)! (2k + 0.1))
    for (int k = 0; k < 12; ++k) series += ((k & 1) ? -1.0 : 1.0) / (std::tgamma(2.0 * k + 1.0) * (2.0 * k + 0.1));
    CHECK(integrate_unit_interval([](double u) { return std::pow(u, -0.9) * std::cos(u); }, -0.9, 0.0, 1e-12)
              .value.real() == doctest::Approx(series).epsilon(1e-12));
    const auto beta = integrate_unit_interval(
        UnitFn([](double u, double w) { return std::pow(u, -0.7) * std::pow(w, -0.6); }), -0.7, -0.6, 1e-13);
    CHECK(beta.value.real() == doctest::Approx(std::tgamma(0.3) * std::tgamma(0.4) / std::tgamma(0.7)).epsilon(1e-11));
}

TEST_CASE("property: unit interval is exact for polynomials up to degree 20") {
    for (int d = 0; d <= 20; ++d) {
        const auto r = integrate_unit_interval([&](double u) { return (d + 1) * std::pow(u, d); }, 0.0, 0.0, 1e-15);
        CHECK(std::abs(r.value.real() - 1.0) <= 1e-14);
    }
}

TEST_CASE("half line") {
    CHECK(integrate_half_line([](double x) { return std::exp(-x); }, 1e-14).value.real() ==
          doctest::Approx(1.0).epsilon(1e-13));
    CHECK(integrate_half_line([](double x) { return std::pow(x, -0.5) * std::exp(-x); }, 1e-14).value.real() ==
          doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    std::vector<double> x, w;
    gauss_legendre(20, x, w);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 38);
    CHECK(s == doctest::Approx(2.0 / 39.0).epsilon(1e-14));
}
