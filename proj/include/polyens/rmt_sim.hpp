#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "polyens/ensembles.hpp"

namespace polyens {

using RandomStream = std::mt19937_64;

/// Independent stream for draw `index` of a run with the given seed.
RandomStream derive_stream(std::uint64_t seed, std::uint64_t index);

/// Entries iid complex Gaussian with density exp(-|g|^2) / pi, so E|g|^2 = 1.
Eigen::MatrixXcd sample_ginibre(int rows, int cols, RandomStream& rng);

/// Upper-left rows x cols block of a Haar unitary of size l.
Eigen::MatrixXcd sample_haar_unitary(int l, RandomStream& rng);
Eigen::MatrixXcd sample_haar_truncation(int l, int rows, int cols, RandomStream& rng);

/// Eigenvalues of A* A in descending order.
std::vector<double> squared_singular_values(const Eigen::MatrixXcd& a);

struct GinibreFactor {
    int nu = 0;
};
/// (G~_K ... G~_1)^{-1} with tilde_nu = (tilde_nu_1, ..., tilde_nu_K), tilde_nu_K = 0.
struct InverseGinibreChainFactor {
    std::vector<int> tilde_nu;
};
/// Upper-left (n + nu) x n block of an l x l Haar unitary.
struct TruncatedUnitaryFactor {
    int nu = 0;
    int l = 0;
};
/// A deterministic matrix, e.g. the fixed X of a transition check.
struct FixedFactor {
    Eigen::MatrixXcd matrix;
};
using FactorSpec = std::variant<GinibreFactor, InverseGinibreChainFactor, TruncatedUnitaryFactor, FixedFactor>;

/// Factors are applied in list order: Y = F_last ... F_first.
struct MatrixChainSpec {
    int n = 1;
    std::vector<FactorSpec> factors;

    /// DomainError on dimension mismatch, TruncationError when l < 2n + nu.
    void validate() const;
    /// Row count of the final product.
    int output_rows() const;

    static MatrixChainSpec ginibre_chain(int n, const std::vector<int>& nu);
    static MatrixChainSpec inverse_chain(int n, const std::vector<int>& nu, const std::vector<int>& tilde_nu);
    static MatrixChainSpec truncated_chain(const TruncationModelParams& params);
};

/// Polynomial ensemble of the squared singular values; DomainError for chains
/// without a closed form (fixed factors, inverse factors after the first).
PolynomialEnsemble chain_ensemble(const MatrixChainSpec& spec);

struct SampleBatch {
    MatrixChainSpec spec;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> samples;  // per draw, descending
    long rejections = 0;
};

/// Worker count from POLYENS_THREADS, else the hardware concurrency.
int default_thread_count();

/// Draw i uses derive_stream(seed, i), so the batch does not depend on the
/// number of workers. threads <= 0 selects default_thread_count().
SampleBatch sample_chain(const MatrixChainSpec& spec, std::uint64_t seed, int count, int threads = 0);

/// One realization of the product; rejections counts resampled inverse factors.
Eigen::MatrixXcd sample_product(const MatrixChainSpec& spec, RandomStream& rng, long* rejections = nullptr);

std::vector<double> pooled_points(const SampleBatch& batch);

struct GoodnessReport {
    double ks_distance = 0.0;
    long sample_count = 0;
    double bin_chi2 = 0.0;
    int chi2_dof = 0;
    double chi2_p_value = 0.0;
    double density_mass = 0.0;  // numerical integral of the density over the support
    bool pass = false;
};

struct DensityModel {
    std::function<double(double)> pdf;
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
};

/// KS distance of the points against the CDF of the density, plus a 50-bin
/// chi-square on bins of equal model probability. pass <=> ks <= threshold.
/// DomainError when the density mass differs from 1 by more than 1e-3.
GoodnessReport empirical_vs_density(const std::vector<double>& points, const DensityModel& density, double threshold);
GoodnessReport empirical_vs_density(const SampleBatch& batch, const DensityModel& density, double threshold);

/// One-point density K_n(x, x) / n of an ensemble, via the moment-matrix kernel.
DensityModel pooled_density(const PolynomialEnsemble& ens);

/// Two-sample KS statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct CharPolyEstimate {
    std::vector<double> coefficients;  // c_0 .. c_n of E prod (x - x_j)
    std::vector<double> std_errors;
};

CharPolyEstimate average_char_poly(const SampleBatch& batch);

}  // namespace polyens
