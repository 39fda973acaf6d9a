#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyens/meijer.hpp"

namespace polyens {

enum class Support { positive_axis, unit_interval };
enum class ModelTag { ginibre_chain, inverse_chain, truncated_chain, transformed };

const char* to_string(Support s);
const char* to_string(ModelTag t);

/// w(x) = exp(log_prefactor) * G(spec | x), set to zero outside the support.
struct WeightFunction {
    double log_prefactor = 0.0;
    MeijerGSpec spec;
    Support support = Support::positive_axis;

    double operator()(double x, const MeijerOptions& opts = {}) const;
    MeijerValue evaluate(double x, const MeijerOptions& opts = {}) const;
    /// int x^{s-1} w(x) dx in log form; sign written to *sign.
    double log_moment(double s, int* sign) const;
};

struct PolynomialEnsemble {
    int n = 0;
    std::vector<WeightFunction> weights;
    ModelTag model_tag = ModelTag::transformed;

    /// Checks list length and shared support; for n <= 30 also that the
    /// moment matrix is nonsingular (SingularityError).
    void validate() const;
};

struct TruncationModelParams {
    int n = 1;
    int M = 1;
    std::vector<int> nu;  // nu_1 .. nu_M
    int l = 2;

    /// DomainError on malformed input, TruncationError when l < 2n + nu_1.
    void validate() const;
};

PolynomialEnsemble ginibre_chain_ensemble(int n, const std::vector<int>& nu);
/// tilde_nu = (tilde_nu_1, ..., tilde_nu_K) with tilde_nu_K = 0.
PolynomialEnsemble inverse_chain_ensemble(int n, const std::vector<int>& nu, const std::vector<int>& tilde_nu);
PolynomialEnsemble truncated_unitary_chain_ensemble(const TruncationModelParams& params);
/// Jacobi ensemble of a single truncation (M = 1 part of the chain).
PolynomialEnsemble jacobi_truncation_ensemble(int n, int nu1, int l);

/// Effect of multiplying by an (n + nu) x (rows of X) Ginibre matrix.
PolynomialEnsemble apply_ginibre_transform(const PolynomialEnsemble& ens, double nu);
/// Effect of inverting the matrix: w_k(y) -> y^{-n-1} w_k(1/y).
PolynomialEnsemble apply_inversion(const PolynomialEnsemble& ens);

/// Entry (j, k) = int x^j w_k(x) dx.
Eigen::MatrixXd moment_matrix(const PolynomialEnsemble& ens);
/// Entry (j, k) = log |int x^j w_k(x) dx|, signs in *signs when non-null.
Eigen::MatrixXd log_moment_matrix(const PolynomialEnsemble& ens, Eigen::MatrixXi* signs = nullptr);

struct NormalizationDetail {
    double log_z = 0.0;  // log |Z_n|
    int sign = 1;  // sign of Z_n; negative for some orderings, e.g. inverted chains with n = 2, 3 mod 4
    double condition = 1.0;  // condition estimate of the scaled moment matrix
    bool ill_conditioned = false;  // condition > 1e12
};

NormalizationDetail normalization_detail(const PolynomialEnsemble& ens);
/// log |Z_n| with Z_n = n! det(moment matrix); the sign of Z_n goes to *sign.
double normalization_constant(const PolynomialEnsemble& ens, int* sign = nullptr);

/// Delta(y) det[w_{k-1}(y_j)] / Z_n.
double jpdf(const PolynomialEnsemble& ens, const std::vector<double>& points, const MeijerOptions& opts = {});
/// Same with a precomputed log |Z_n| and sign.
double jpdf(const PolynomialEnsemble& ens, const std::vector<double>& points, double log_z, int z_sign,
            const MeijerOptions& opts = {});

/// Normalized density of the squared singular values of G X for fixed X with
/// squared singular values x and G of size (n + nu) x n.
double fixed_x_transition_density(const std::vector<double>& x, double nu, const std::vector<double>& y);

/// log |det A| with sign, by full-pivot LU after row and column scaling.
double log_abs_det(const Eigen::MatrixXd& a, int* sign);
/// log |Delta(x)| with Delta(x) = prod_{j<k} (x_k - x_j); sign in *sign.
double log_abs_vandermonde(const std::vector<double>& x, int* sign);

}  // namespace polyens
