#pragma once

#include <string>
#include <vector>

#include "polyens/ensembles.hpp"

namespace polyens {

/// Hard-edge parameters nu_1..nu_M, each > -1 (nu_0 = 0 is implicit).
struct HardEdgeParams {
    std::vector<double> nu;
    void validate() const;
};

struct BorodinParams {
    double alpha = 0.0;  // > -1
    double theta = 1.0;  // > 0
    void validate() const;
};

enum class KernelRoute { contour, biorthogonal_sum, meijer_product };

const char* to_string(KernelRoute r);
KernelRoute kernel_route_from_string(const std::string& s);

struct KernelValue {
    double value = 0.0;
    double abs_imag_residual = 0.0;
    double est_error = 0.0;
    KernelRoute route = KernelRoute::contour;
    bool converged = false;
};

struct KernelOptions {
    double tolerance = 1e-9;
    /// Evaluate every finite-n route and raise RouteDisagreementError when
    /// they differ by more than 1e-5 relative.
    bool cross_check = false;
};

/// Monic biorthogonal polynomial P_k of the truncated chain, explicit finite sum.
double pk(const TruncationModelParams& params, int k, double x);
/// Same polynomial summed in hypergeometric order.
double pk_hypergeometric(const TruncationModelParams& params, int k, double x);
/// Power-basis coefficients c_0..c_k of P_k.
std::vector<double> pk_coefficients(const TruncationModelParams& params, int k);

/// Q_k as a Meijer G-function; dual to P_j under int_0^inf P_j Q_k = delta_jk.
MeijerValue qk_detail(const TruncationModelParams& params, int k, double y, const MeijerOptions& opts = {});
double qk(const TruncationModelParams& params, int k, double y, const MeijerOptions& opts = {});
/// Log prefactor and spec with Q_k = exp(log_prefactor) G(spec).
WeightFunction qk_function(const TruncationModelParams& params, int k);

/// Entry (j, k) = int P_j Q_k by quadrature on the support, j, k < n.
Eigen::MatrixXd biorthogonality_matrix(const TruncationModelParams& params, double tolerance = 1e-10);

/// Finite-n correlation kernel K_n(x, y) of the truncated chain.
KernelValue kernel_finite(const TruncationModelParams& params, double x, double y, KernelRoute route,
                          const KernelOptions& opts = {});

/// Reproducing kernel sum_{j,k} x^j [G^{-1}]_{k,j} w_k(y) from the moment matrix G.
double kernel_generic(const PolynomialEnsemble& ens, double x, double y);

/// Precomputed inverse moment matrix for repeated kernel_generic evaluations.
class GenericKernel {
public:
    explicit GenericKernel(PolynomialEnsemble ens);
    double operator()(double x, double y) const;
    /// Coefficients of x^j multiplying w_k(y): entry (j, k).
    const Eigen::MatrixXd& coefficients() const { return coef_; }
    const PolynomialEnsemble& ensemble() const { return ens_; }

private:
    PolynomialEnsemble ens_;
    Eigen::MatrixXd coef_;  // scaled: row j carries exp(-row_shift_j)
    Eigen::VectorXd row_shift_, col_shift_;
};

/// Hard-edge limit kernel K_{nu_1..nu_M}(x, y).
KernelValue kernel_hard_edge(const HardEdgeParams& params, double x, double y, KernelRoute route,
                             const KernelOptions& opts = {});

/// K^{(alpha, theta)}(x, y) via Wright functions.
double kernel_borodin(const BorodinParams& params, double x, double y, double tolerance = 1e-11);

/// M^M K^{(alpha, 1/M)}(M^M x, M^M y).
double scaled_borodin_theta_inverse_integer(int M, double alpha, double x, double y);
/// x^{1/M - 1} K^{(alpha, M)}(M x^{1/M}, M y^{1/M}).
double scaled_borodin_theta_integer(int M, double alpha, double x, double y);
/// nu_j = alpha + (j-1)/M.
HardEdgeParams borodin_inverse_integer_params(int M, double alpha);
/// nu_j = alpha/M - 1 + j/M.
HardEdgeParams borodin_integer_params(int M, double alpha);

/// Left side of the telescoping identity, as an explicit sum over k.
double telescoping_lhs(int n, double l, double s, double t);
/// Right side: the two boundary terms.
double telescoping_rhs(int n, double l, double s, double t);

}  // namespace polyens
