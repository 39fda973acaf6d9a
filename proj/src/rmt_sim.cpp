#include "polyens/rmt_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>

#include "polyens/errors.hpp"
#include "polyens/kernels.hpp"
#include "polyens/quad.hpp"

namespace polyens {

namespace {

template <class... F>
struct overloaded : F... {
    using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

// Runs body(i) for i in [0, count) on `threads` workers with a static split.
template <class Body>
void parallel_for(int count, int threads, Body body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < count; i += threads) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

constexpr double max_inverse_condition = 1e14;

}  // namespace

RandomStream derive_stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index), std::uint32_t(index >> 32),
                      0x706f6c79u};
    return RandomStream(seq);
}

Eigen::MatrixXcd sample_ginibre(int rows, int cols, RandomStream& rng) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            const double re = g(rng);
            m(i, j) = {re, g(rng)};
        }
    return m;
}

Eigen::MatrixXcd sample_haar_unitary(int l, RandomStream& rng) {
    if (l < 1) throw DomainError("unitary size must be positive");
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(sample_ginibre(l, l, rng));
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(l, l);
    // Q diag(r_jj / |r_jj|) is the factor with positive-diagonal R, which is Haar.
    for (int j = 0; j < l; ++j) {
        const std::complex<double> r = qr.matrixQR()(j, j);
        const double a = std::abs(r);
        if (a > 0) q.col(j) *= r / a;
    }
    return q;
}

Eigen::MatrixXcd sample_haar_truncation(int l, int rows, int cols, RandomStream& rng) {
    if (rows < 1 || cols < 1 || rows > l || cols > l) throw DomainError("truncation block must fit inside the unitary");
    return sample_haar_unitary(l, rng).topLeftCorner(rows, cols);
}

std::vector<double> squared_singular_values(const Eigen::MatrixXcd& a) {
    if (a.rows() < 1 || a.cols() < 1) throw DomainError("empty matrix");
    if (!a.allFinite()) throw NumericalError("matrix has non-finite entries");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    const auto& s = svd.singularValues();
    std::vector<double> out(a.cols(), 0.0);
    for (Eigen::Index i = 0; i < s.size(); ++i) out[i] = s(i) * s(i);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

void MatrixChainSpec::validate() const {
    output_rows();
}

int MatrixChainSpec::output_rows() const {
    if (n < 1) throw DomainError("n must be positive");
    if (factors.empty()) throw DomainError("chain needs at least one factor");
    int d = n;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        std::visit(overloaded{
                       [&](const GinibreFactor& f) {
                           if (f.nu < 0) throw DomainError("Ginibre nu must be nonnegative");
                           d = n + f.nu;
                       },
                       [&](const InverseGinibreChainFactor& f) {
                           if (f.tilde_nu.empty() || f.tilde_nu.back() != 0)
                               throw DomainError("inverse chain needs tilde_nu_K = 0 (square product)");
                           for (int v : f.tilde_nu)
                               if (v < 0) throw DomainError("tilde_nu entries must be nonnegative");
                           if (d != n) throw DomainError("inverse chain acts on an n x n matrix");
                       },
                       [&](const TruncatedUnitaryFactor& f) {
                           if (i != 0) throw DomainError("a truncated unitary factor must come first");
                           if (f.nu < 0) throw DomainError("truncation nu must be nonnegative");
                           if (f.l < 2 * n + f.nu)
                               throw TruncationError("l must be at least 2n + nu_1; below that the truncation has 1 as a "
                                                     "singular value and no density");
                           d = n + f.nu;
                       },
                       [&](const FixedFactor& f) {
                           if (f.matrix.cols() != d) throw DomainError("fixed factor has the wrong column count");
                           if (f.matrix.rows() < n) throw DomainError("fixed factor needs at least n rows");
                           d = static_cast<int>(f.matrix.rows());
                       },
                   },
                   factors[i]);
    }
    return d;
}

MatrixChainSpec MatrixChainSpec::ginibre_chain(int n, const std::vector<int>& nu) {
    MatrixChainSpec s{n, {}};
    for (int v : nu) s.factors.push_back(GinibreFactor{v});
    s.validate();
    return s;
}

MatrixChainSpec MatrixChainSpec::inverse_chain(int n, const std::vector<int>& nu, const std::vector<int>& tilde_nu) {
    MatrixChainSpec s{n, {InverseGinibreChainFactor{tilde_nu}}};
    for (int v : nu) s.factors.push_back(GinibreFactor{v});
    s.validate();
    return s;
}

MatrixChainSpec MatrixChainSpec::truncated_chain(const TruncationModelParams& params) {
    params.validate();
    MatrixChainSpec s{params.n, {TruncatedUnitaryFactor{params.nu[0], params.l}}};
    for (std::size_t j = 1; j < params.nu.size(); ++j) s.factors.push_back(GinibreFactor{params.nu[j]});
    s.validate();
    return s;
}

PolynomialEnsemble chain_ensemble(const MatrixChainSpec& spec) {
    spec.validate();
    std::vector<int> nu;
    for (std::size_t i = 1; i < spec.factors.size(); ++i) {
        const auto* g = std::get_if<GinibreFactor>(&spec.factors[i]);
        if (!g) throw DomainError("no closed-form ensemble for this chain");
        nu.push_back(g->nu);
    }
    const auto& first = spec.factors.front();
    if (const auto* g = std::get_if<GinibreFactor>(&first)) {
        nu.insert(nu.begin(), g->nu);
        return ginibre_chain_ensemble(spec.n, nu);
    }
    if (const auto* inv = std::get_if<InverseGinibreChainFactor>(&first))
        return inverse_chain_ensemble(spec.n, nu, inv->tilde_nu);
    if (const auto* t = std::get_if<TruncatedUnitaryFactor>(&first)) {
        TruncationModelParams p;
        p.n = spec.n;
        p.nu = {t->nu};
        p.nu.insert(p.nu.end(), nu.begin(), nu.end());
        p.M = static_cast<int>(p.nu.size());
        p.l = t->l;
        return truncated_unitary_chain_ensemble(p);
    }
    throw DomainError("no closed-form ensemble for this chain");
}

Eigen::MatrixXcd sample_product(const MatrixChainSpec& spec, RandomStream& rng, long* rejections) {
    const int n = spec.n;
    Eigen::MatrixXcd y;
    bool has = false;
    auto apply = [&](const Eigen::MatrixXcd& f) {
        y = has ? Eigen::MatrixXcd(f * y) : f;
        has = true;
    };
    for (const auto& factor : spec.factors) {
        const int d = has ? static_cast<int>(y.rows()) : n;
        std::visit(overloaded{
                       [&](const GinibreFactor& f) { apply(sample_ginibre(n + f.nu, d, rng)); },
                       [&](const TruncatedUnitaryFactor& f) { apply(sample_haar_truncation(f.l, n + f.nu, n, rng)); },
                       [&](const FixedFactor& f) { apply(f.matrix); },
                       [&](const InverseGinibreChainFactor& f) {
                           for (;;) {
                               Eigen::MatrixXcd p = sample_ginibre(n + f.tilde_nu[0], n, rng);
                               for (std::size_t j = 1; j < f.tilde_nu.size(); ++j)
                                   p = sample_ginibre(n + f.tilde_nu[j], n + f.tilde_nu[j - 1], rng) * p;
                               const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXcd>(p).singularValues();
                               if (!(s(n - 1) > 0.0) || s(0) / s(n - 1) > max_inverse_condition) {
                                   if (rejections) ++*rejections;
                                   continue;
                               }
                               Eigen::PartialPivLU<Eigen::MatrixXcd> lu(p);
                               y = has ? Eigen::MatrixXcd(lu.solve(y)) : Eigen::MatrixXcd(lu.inverse());
                               has = true;
                               break;
                           }
                       },
                   },
                   factor);
    }
    return y;
}

int default_thread_count() {
    if (const char* env = std::getenv("POLYENS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SampleBatch sample_chain(const MatrixChainSpec& spec, std::uint64_t seed, int count, int threads) {
    spec.validate();
    if (count < 1) throw DomainError("count must be positive");
    if (threads <= 0) threads = default_thread_count();
    SampleBatch batch;
    batch.spec = spec;
    batch.seed = seed;
    batch.samples.resize(count);
    std::vector<long> rejected(count, 0);
    parallel_for(count, threads, [&](int i) {
        RandomStream rng = derive_stream(seed, static_cast<std::uint64_t>(i));
        const Eigen::MatrixXcd y = sample_product(spec, rng, &rejected[i]);
        auto sv = squared_singular_values(y);
        sv.resize(spec.n);
        batch.samples[i] = std::move(sv);
    });
    for (long r : rejected) batch.rejections += r;
    return batch;
}

std::vector<double> pooled_points(const SampleBatch& batch) {
    std::vector<double> out;
    out.reserve(batch.samples.size() * batch.spec.n);
    for (const auto& s : batch.samples) out.insert(out.end(), s.begin(), s.end());
    return out;
}

namespace {

// CDF of a density tabulated on panels; inside a panel the density is replaced
// by its degree-7 Legendre interpolant at the Gauss nodes, integrated exactly.
class TabulatedCdf {
public:
    static constexpr int order = 8;

    TabulatedCdf(const DensityModel& d, std::vector<double> edges) : edges_(std::move(edges)) {
        std::vector<double> gx, gw;
        gauss_legendre(order, gx, gw);
        const int panels = static_cast<int>(edges_.size()) - 1;
        coef_.assign(panels, {});
        std::vector<double> fvals(std::size_t(panels) * order);
        parallel_for(panels, default_thread_count(), [&](int p) {
            const double a = edges_[p], b = edges_[p + 1];
            for (int i = 0; i < order; ++i) {
                const double v = d.pdf(0.5 * (a + b) + 0.5 * (b - a) * gx[i]);
                fvals[std::size_t(p) * order + i] = std::isfinite(v) ? v : 0.0;
            }
        });
        cum_.assign(panels + 1, 0.0);
        for (int p = 0; p < panels; ++p) {
            auto& c = coef_[p];
            for (int k = 0; k < order; ++k) {
                double s = 0.0;
                for (int i = 0; i < order; ++i) s += gw[i] * fvals[std::size_t(p) * order + i] * legendre(k, gx[i]);
                c[k] = 0.5 * (2 * k + 1) * s;
            }
            cum_[p + 1] = cum_[p] + c[0] * (edges_[p + 1] - edges_[p]);
        }
    }

    double total() const { return cum_.back(); }
    double upper() const { return edges_.back(); }

    double operator()(double x) const {
        if (x <= edges_.front()) return 0.0;
        if (x >= edges_.back()) return cum_.back();
        const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
        const int p = static_cast<int>(it - edges_.begin()) - 1;
        const double a = edges_[p], b = edges_[p + 1];
        const double u = (2.0 * x - a - b) / (b - a);
        const auto& c = coef_[p];
        // int_{-1}^u P_0 = u + 1, int_{-1}^u P_k = (P_{k+1} - P_{k-1}) / (2k + 1)
        double s = c[0] * (u + 1.0);
        for (int k = 1; k < order; ++k) s += c[k] * (legendre(k + 1, u) - legendre(k - 1, u)) / (2 * k + 1);
        return cum_[p] + 0.5 * (b - a) * s;
    }

private:
    static double legendre(int k, double x) {
        double p0 = 1.0, p1 = x;
        if (k == 0) return p0;
        for (int j = 1; j < k; ++j) {
            const double p2 = ((2 * j + 1) * x * p1 - j * p0) / (j + 1);
            p0 = p1;
            p1 = p2;
        }
        return p1;
    }

    std::vector<double> edges_;
    std::vector<std::array<double, order>> coef_;
    std::vector<double> cum_;
};

}  // namespace

GoodnessReport empirical_vs_density(const std::vector<double>& points, const DensityModel& density, double threshold) {
    if (points.empty()) throw DomainError("no sample points");
    if (!(threshold > 0.0)) throw DomainError("threshold must be positive");
    if (!(density.upper > density.lower)) throw DomainError("empty density support");
    std::vector<double> x = points;
    std::sort(x.begin(), x.end());
    const double lo = density.lower, hi = density.upper;

    // Panels: one from the lower end to just below the smallest point, then
    // geometric in the distance from the lower end up to past the largest point.
    double a = x.front() - lo, b = x.back() - lo;
    if (std::isfinite(hi)) b = std::min(b + 0.5 * (hi - x.back()), hi - lo);
    else b *= 2.0;
    a = std::max(a * 0.25, 1e-300);
    if (!(a < b)) a = b * 1e-3;
    if (!(b > 0.0)) throw DomainError("sample points lie below the density support");
    constexpr int panels = 800;
    std::vector<double> edges{lo};
    const double ratio = std::pow(b / a, 1.0 / panels);
    double e = a;
    for (int i = 0; i <= panels; ++i, e *= ratio) edges.push_back(lo + (i == panels ? b : e));
    TabulatedCdf cdf(density, std::move(edges));

    // remaining mass beyond the table
    double tail = 0.0;
    const double top = cdf.upper();
    if (std::isfinite(hi)) {
        if (top < hi) tail = integrate_interval(density.pdf, top, hi, 1e-8).value.real();
    } else {
        tail = integrate_half_line([&](double t) { return density.pdf(top + t); }, 1e-8, top - lo).value.real();
    }
    GoodnessReport r;
    r.density_mass = cdf.total() + tail;
    if (!(std::fabs(r.density_mass - 1.0) <= 1e-3))
        throw DomainError("density integrates to " + std::to_string(r.density_mass) + ", not 1");

    const std::size_t N = x.size();
    constexpr int bins = 50;
    std::vector<long> counts(bins, 0);
    double ks = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double F = x[i] >= hi ? 1.0 : (x[i] <= lo ? 0.0 : cdf(x[i]));
        ks = std::max({ks, double(i + 1) / N - F, F - double(i) / N});
        const int bin = std::clamp(static_cast<int>(F * bins), 0, bins - 1);
        ++counts[bin];
    }
    const double expected = double(N) / bins;
    double chi2 = 0.0;
    for (long c : counts) chi2 += (c - expected) * (c - expected) / expected;
    r.ks_distance = ks;
    r.sample_count = static_cast<long>(N);
    r.bin_chi2 = chi2;
    r.chi2_dof = bins - 1;
    r.chi2_p_value = boost::math::gamma_q(0.5 * r.chi2_dof, 0.5 * chi2);
    r.pass = ks <= threshold;
    return r;
}

GoodnessReport empirical_vs_density(const SampleBatch& batch, const DensityModel& density, double threshold) {
    return empirical_vs_density(pooled_points(batch), density, threshold);
}

DensityModel pooled_density(const PolynomialEnsemble& ens) {
    auto k = std::make_shared<GenericKernel>(ens);
    DensityModel d;
    const int n = ens.n;
    d.pdf = [k, n](double x) { return x > 0.0 ? (*k)(x, x) / n : 0.0; };
    if (ens.weights.front().support == Support::unit_interval) d.upper = 1.0;
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = a.size(), nb = b.size();
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::fabs(i / na - j / nb));
    }
    return d;
}

CharPolyEstimate average_char_poly(const SampleBatch& batch) {
    if (batch.samples.empty()) throw DomainError("empty batch");
    const int n = batch.spec.n;
    std::vector<double> mean(n + 1, 0.0), m2(n + 1, 0.0);
    std::vector<double> e(n + 1);
    long count = 0;
    for (const auto& s : batch.samples) {
        // elementary symmetric polynomials e_0..e_n of the draw
        std::fill(e.begin(), e.end(), 0.0);
        e[0] = 1.0;
        for (double v : s)
            for (int j = n; j >= 1; --j) e[j] += v * e[j - 1];
        ++count;
        for (int k = 0; k <= n; ++k) {
            const double c = ((n - k) % 2 ? -1.0 : 1.0) * e[n - k];
            const double dlt = c - mean[k];
            mean[k] += dlt / count;
            m2[k] += dlt * (c - mean[k]);
        }
    }
    CharPolyEstimate out;
    out.coefficients = mean;
    out.std_errors.resize(n + 1);
    for (int k = 0; k <= n; ++k)
        out.std_errors[k] = count > 1 ? std::sqrt(m2[k] / (count - 1) / count) : 0.0;
    return out;
}

}  // namespace polyens
