#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "polyens/errors.hpp"
#include "polyens/kernels.hpp"
#include "polyens/quad.hpp"
#include "polyens/rmt_sim.hpp"

using namespace polyens;

namespace {

struct Moments {
    double mean = 0.0, se = 0.0;
};

Moments moments(const std::vector<double>& v) {
    double m = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - m;
        m += d / (i + 1);
        m2 += d * (v[i] - m);
    }
    return {m, std::sqrt(m2 / (v.size() - 1) / v.size())};
}

// KS distance against an exact CDF.
template <class Cdf>
double ks_exact(std::vector<double> x, Cdf F) {
    std::sort(x.begin(), x.end());
    const double N = x.size();
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = F(x[i]);
        d = std::max({d, (i + 1) / N - f, f - i / N});
    }
    return d;
}

TruncationModelParams trunc(int n, std::vector<int> nu, int l) {
    TruncationModelParams p;
    p.n = n;
    p.M = static_cast<int>(nu.size());
    p.nu = std::move(nu);
    p.l = l;
    return p;
}

}  // namespace

TEST_CASE("sample_ginibre: unit second moment and exponential modulus") {
    RandomStream rng = derive_stream(1, 0);
    std::vector<double> a;
    a.reserve(1000000);
    for (int i = 0; i < 1000000; ++i) a.push_back(std::norm(sample_ginibre(1, 1, rng)(0, 0)));
    const auto m = moments(a);
    CHECK(std::fabs(m.mean - 1.0) <= 3 * m.se);
    CHECK(ks_exact(a, [](double x) { return 1.0 - std::exp(-x); }) <= 0.002);

    std::vector<double> tr;
    for (int i = 0; i < 100000; ++i) tr.push_back(sample_ginibre(2, 3, rng).squaredNorm());
    const auto t = moments(tr);
    CHECK(std::fabs(t.mean - 6.0) <= 3 * t.se);
}

TEST_CASE("sample_haar_truncation: unitarity and Beta(1, 3) corner") {
    RandomStream rng = derive_stream(2, 0);
    const Eigen::MatrixXcd u = sample_haar_unitary(7, rng);
    CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(7, 7)).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::MatrixXcd full = sample_haar_truncation(5, 5, 5, rng);
    CHECK((full.adjoint() * full - Eigen::MatrixXcd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-12);

    std::vector<double> a;
    for (int i = 0; i < 200000; ++i) a.push_back(std::norm(sample_haar_truncation(4, 1, 1, rng)(0, 0)));
    const auto m = moments(a);
    CHECK(std::fabs(m.mean - 0.25) <= 3 * m.se);
    CHECK(ks_exact(a, [](double x) { return 1.0 - std::pow(1.0 - x, 3); }) <= 0.005);

    CHECK_THROWS_AS(sample_haar_truncation(3, 4, 1, rng), DomainError);
}

TEST_CASE("squared_singular_values") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = std::complex<double>(0.0, 3.0);
    const auto s = squared_singular_values(d);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(s[1] == doctest::Approx(4.0).epsilon(1e-15));

    RandomStream rng = derive_stream(3, 0);
    for (double v : squared_singular_values(sample_haar_unitary(6, rng))) CHECK(std::fabs(v - 1.0) <= 1e-13);

    // Gram-matrix eigenvalue oracle
    const Eigen::MatrixXcd a = sample_ginibre(3, 2, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.adjoint() * a);
    const auto g = squared_singular_values(a);
    CHECK(std::fabs(g[0] - es.eigenvalues()(1)) <= 1e-13 * g[0]);
    CHECK(std::fabs(g[1] - es.eigenvalues()(0)) <= 1e-13 * g[0]);

    // Exactly stored matrix with known spectrum and condition number 1e8: a
    // graded diagonal times a Hadamard matrix with unit phases (entries +-1/2, +-i/2).
    Eigen::MatrixXcd had(4, 4);
    const std::complex<double> I(0.0, 1.0);
    had << 0.5, 0.5, 0.5, 0.5,  //
        0.5 * I, -0.5 * I, 0.5 * I, -0.5 * I,  //
        0.5, 0.5, -0.5, -0.5,  //
        -0.5, 0.5, 0.5, -0.5;
    const Eigen::Vector4d sv(1e-3, 1.0, 1e-8, 1e-6);
    const Eigen::MatrixXcd b = sv.cast<std::complex<double>>().asDiagonal() * had;
    const auto h = squared_singular_values(b);
    const double expect[] = {1.0, 1e-6, 1e-12, 1e-16};
    for (int i = 0; i < 4; ++i) CHECK(std::fabs(h[i] - expect[i]) <= 1e-10 * expect[i]);
    const auto ht = squared_singular_values(b.transpose());
    for (int i = 0; i < 4; ++i) CHECK(std::fabs(ht[i] - expect[i]) <= 1e-10 * expect[i]);

    // wide matrix: A* A has cols - rows zero eigenvalues
    const auto w = squared_singular_values(sample_ginibre(2, 3, rng));
    REQUIRE(w.size() == 3);
    CHECK(w[2] == 0.0);

    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(squared_singular_values(bad), NumericalError);
}

TEST_CASE("MatrixChainSpec: dimension bookkeeping and errors") {
    const auto g = MatrixChainSpec::ginibre_chain(3, {0, 2, 1});
    CHECK(g.output_rows() == 4);
    CHECK(MatrixChainSpec::truncated_chain(trunc(2, {1, 3}, 7)).output_rows() == 5);
    CHECK(MatrixChainSpec::inverse_chain(2, {1}, {2, 0}).output_rows() == 3);

    CHECK_THROWS_AS(MatrixChainSpec::truncated_chain(trunc(2, {1}, 4)), TruncationError);
    MatrixChainSpec bad{2, {GinibreFactor{0}, TruncatedUnitaryFactor{0, 6}}};
    CHECK_THROWS_AS(bad.validate(), DomainError);
    MatrixChainSpec nonsquare{2, {InverseGinibreChainFactor{{1, 1}}}};
    CHECK_THROWS_AS(nonsquare.validate(), DomainError);
    MatrixChainSpec after{2, {GinibreFactor{1}, InverseGinibreChainFactor{{0}}}};
    CHECK_THROWS_AS(after.validate(), DomainError);
    MatrixChainSpec fixed{2, {FixedFactor{Eigen::MatrixXcd::Identity(3, 3)}}};
    CHECK_THROWS_AS(fixed.validate(), DomainError);
    CHECK_THROWS_AS(MatrixChainSpec::ginibre_chain(2, {-1}), DomainError);
    CHECK_THROWS_AS(MatrixChainSpec{}.validate(), DomainError);
}

TEST_CASE("sample_chain: product of two scalars has unit mean") {
    const auto b = sample_chain(MatrixChainSpec::ginibre_chain(1, {0, 0}), 11, 200000);
    REQUIRE(b.samples.size() == 200000);
    const auto m = moments(pooled_points(b));
    CHECK(std::fabs(m.mean - 1.0) <= 3 * m.se);
    CHECK(b.rejections == 0);
}

TEST_CASE("sample_chain: batch invariants and seed determinism") {
    const auto spec = MatrixChainSpec::ginibre_chain(3, {0, 1});
    const auto a = sample_chain(spec, 42, 2000, 1);
    const auto b = sample_chain(spec, 42, 2000, 4);
    const auto c = sample_chain(spec, 43, 2000, 3);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
    for (const auto& s : a.samples) {
        REQUIRE(s.size() == 3);
        CHECK(s[2] > 0.0);
        CHECK(s[0] > s[1]);
        CHECK(s[1] > s[2]);
    }

    setenv("POLYENS_THREADS", "3", 1);
    CHECK(default_thread_count() == 3);
    const auto d = sample_chain(spec, 42, 2000);
    CHECK(a.samples == d.samples);
    setenv("POLYENS_THREADS", "zero", 1);
    CHECK(default_thread_count() >= 1);
    unsetenv("POLYENS_THREADS");
}

TEST_CASE("sample_chain: single truncation is the Jacobi ensemble") {
    // n = 2, nu = 0, l = 6: jpdf proportional to (y1 - y2)^2 (1 - y1)^2 (1 - y2)^2 on (0, 1)^2,
    // whose one-point marginal integrates in closed form.
    auto marginal = [](double x) { return (1 - x) * (1 - x) * (40 * x * x - 20 * x + 4); };
    auto cdf = [](double x) {
        // antiderivative of the marginal, expanded
        const double p[] = {4.0, -28.0, 84.0, -100.0, 40.0};  // coefficients of x^0..x^4 in the marginal
        double s = 0.0;
        for (int k = 0; k < 5; ++k) s += p[k] * std::pow(x, k + 1) / (k + 1);
        return s;
    };
    CHECK(cdf(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(marginal(0.3) == doctest::Approx(4 - 28 * 0.3 + 84 * 0.09 - 100 * 0.027 + 40 * 0.0081).epsilon(1e-14));

    const auto spec = MatrixChainSpec::truncated_chain(trunc(2, {0}, 6));
    const auto batch = sample_chain(spec, 5, 100000);
    CHECK(ks_exact(pooled_points(batch), cdf) <= 0.02);

    const auto dens = pooled_density(chain_ensemble(spec));
    CHECK(dens.upper == 1.0);
    for (double x : {0.05, 0.3, 0.7, 0.95}) CHECK(dens.pdf(x) == doctest::Approx(marginal(x)).epsilon(1e-9));
    const auto rep = empirical_vs_density(batch, dens, 0.02);
    CHECK(rep.pass);
    CHECK(rep.density_mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::fabs(rep.ks_distance - ks_exact(pooled_points(batch), cdf)) <= 1e-6);
}

TEST_CASE("sample_chain: Ginibre pair matches the kernel density") {
    const auto spec = MatrixChainSpec::ginibre_chain(2, {0, 1});
    const auto batch = sample_chain(spec, 9, 100000);
    const auto rep = empirical_vs_density(batch, pooled_density(chain_ensemble(spec)), 0.02);
    CHECK(rep.ks_distance <= 0.02);
    CHECK(rep.sample_count == 200000);
    CHECK(rep.density_mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sample_chain: inverse factor gives the ratio law") {
    // n = 1: y = |g|^2 / |g~|^2 has CDF y / (1 + y)
    const auto spec = MatrixChainSpec::inverse_chain(1, {0}, {0});
    const auto batch = sample_chain(spec, 17, 100000);
    CHECK(batch.rejections == 0);
    const auto pts = pooled_points(batch);
    CHECK(ks_exact(pts, [](double y) { return y / (1 + y); }) <= 0.01);
    const auto rep = empirical_vs_density(batch, pooled_density(chain_ensemble(spec)), 0.01);
    CHECK(rep.pass);

    // n = 2 inverse of a two-factor product, followed by a rectangular factor
    const auto spec2 = MatrixChainSpec::inverse_chain(2, {1}, {1, 0});
    const auto b2 = sample_chain(spec2, 18, 20000);
    const auto r2 = empirical_vs_density(b2, pooled_density(chain_ensemble(spec2)), 0.03);
    CHECK(r2.pass);
}

TEST_CASE("empirical_vs_density: self-consistency and mismatch detection") {
    RandomStream rng = derive_stream(21, 0);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> pts(1000000);
    for (auto& v : pts) v = e(rng);
    DensityModel expo{[](double x) { return std::exp(-x); }};
    const auto good = empirical_vs_density(pts, expo, 0.002);
    CHECK(good.pass);
    CHECK(good.ks_distance <= 0.002);
    CHECK(std::fabs(good.ks_distance - ks_exact(pts, [](double x) { return 1 - std::exp(-x); })) <= 1e-9);
    CHECK(good.chi2_dof == 49);
    CHECK(good.chi2_p_value > 1e-4);

    DensityModel unif{[](double x) { return x < 1.0 ? 1.0 : 0.0; }, 0.0, 1.0};
    const auto bad = empirical_vs_density(pts, unif, 0.002);
    CHECK_FALSE(bad.pass);
    CHECK(bad.chi2_p_value < 1e-10);

    DensityModel unnormalized{[](double x) { return 2 * std::exp(-x); }};
    CHECK_THROWS_AS(empirical_vs_density(pts, unnormalized, 0.01), DomainError);
}

TEST_CASE("ks_two_sample") {
    CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_two_sample({1, 2}, {3, 4}) == 1.0);
    CHECK(ks_two_sample({1, 3}, {2, 4}) == doctest::Approx(0.5));
}

TEST_CASE("unitary invariance of the squared singular values") {
    const int n = 2;
    auto spec = MatrixChainSpec::ginibre_chain(n, {1, 0});
    RandomStream rng = derive_stream(99, 0);
    auto rotated = spec;
    rotated.factors.push_back(FixedFactor{sample_haar_unitary(n, rng)});
    const auto a = sample_chain(spec, 31, 100000);
    const auto b = sample_chain(rotated, 32, 100000);
    CHECK(ks_two_sample(pooled_points(a), pooled_points(b)) <= 0.01);
}

TEST_CASE("Ginibre transform of a truncation matches Monte Carlo") {
    MatrixChainSpec spec{2, {TruncatedUnitaryFactor{0, 6}, GinibreFactor{0}}};
    const auto batch = sample_chain(spec, 41, 100000);
    const auto ens = apply_ginibre_transform(jacobi_truncation_ensemble(2, 0, 6), 0);
    const auto rep = empirical_vs_density(batch, pooled_density(ens), 0.02);
    CHECK(rep.pass);
}

TEST_CASE("fixed-X transition density matches Monte Carlo") {
    Eigen::MatrixXcd x0 = Eigen::MatrixXcd::Zero(2, 2);
    x0(0, 0) = 1.0;
    x0(1, 1) = std::sqrt(2.0);
    MatrixChainSpec spec{2, {FixedFactor{x0}, GinibreFactor{0}}};
    const auto batch = sample_chain(spec, 51, 100000);
    const std::vector<double> xs{1.0, 2.0};
    DensityModel marginal{[&](double y) {
        if (!(y > 0)) return 0.0;
        auto f = [&](double t) { return t == y ? 0.0 : fixed_x_transition_density(xs, 0.0, {y, t}); };
        return integrate_half_line(f, 1e-10).value.real();
    }};
    const auto rep = empirical_vs_density(batch, marginal, 0.02);
    CHECK(rep.chi2_p_value > 1e-3);
    CHECK(rep.pass);
}

TEST_CASE("average_char_poly") {
    const auto g = sample_chain(MatrixChainSpec::ginibre_chain(1, {0}), 61, 100000);
    const auto e = average_char_poly(g);
    REQUIRE(e.coefficients.size() == 2);
    CHECK(e.coefficients[1] == 1.0);
    CHECK(e.std_errors[1] == 0.0);
    CHECK(std::fabs(e.coefficients[0] + 1.0) <= 3 * e.std_errors[0]);

    // n = 2, M = 1, nu = 0, l = 4: uniform weight on (0, 1), so P_2 = x^2 - x + 1/6
    const auto p = trunc(2, {0}, 4);
    const auto c = pk_coefficients(p, 2);
    CHECK(c[0] == doctest::Approx(1.0 / 6).epsilon(1e-13));
    CHECK(c[1] == doctest::Approx(-1.0).epsilon(1e-13));
    const auto t = average_char_poly(sample_chain(MatrixChainSpec::truncated_chain(p), 62, 100000));
    for (int k = 0; k <= 2; ++k) CHECK(std::fabs(t.coefficients[k] - c[k]) <= 3 * t.std_errors[k] + 1e-15);
}
