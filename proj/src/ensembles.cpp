#include "polyens/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyens/errors.hpp"

namespace polyens {

const char* to_string(Support s) {
    return s == Support::positive_axis ? "positive_axis" : "unit_interval";
}

const char* to_string(ModelTag t) {
    switch (t) {
        case ModelTag::ginibre_chain: return "ginibre_chain";
        case ModelTag::inverse_chain: return "inverse_chain";
        case ModelTag::truncated_chain: return "truncated_chain";
        case ModelTag::transformed: return "transformed";
    }
    return "?";
}

MeijerValue WeightFunction::evaluate(double x, const MeijerOptions& opts) const {
    if (!(x > 0.0)) throw DomainError("weight evaluated at non-positive x");
    if (support == Support::unit_interval && x >= 1.0) {
        MeijerValue z;
        z.route = "support";
        z.converged = true;
        return z;
    }
    MeijerValue v = meijer_g_detail(spec, x, opts);
    const double f = std::exp(log_prefactor);
    v.value *= f;
    v.imag_residual *= f;
    v.est_error *= f;
    return v;
}

double WeightFunction::operator()(double x, const MeijerOptions& opts) const {
    return evaluate(x, opts).value;
}

double WeightFunction::log_moment(double s, int* sign) const {
    return log_prefactor + log_meijer_mellin_moment(spec, s, sign);
}

void TruncationModelParams::validate() const {
    if (n < 1) throw DomainError("truncation model needs n >= 1");
    if (M < 1) throw DomainError("truncation model needs M >= 1");
    if (static_cast<int>(nu.size()) != M) throw DomainError("truncation model needs M entries in nu");
    for (int v : nu)
        if (v < 0) throw DomainError("nu entries must be nonnegative");
    if (l < 2 * n + nu[0])
        throw TruncationError("l = " + std::to_string(l) + " < 2n + nu_1 = " + std::to_string(2 * n + nu[0]) +
                              ": the truncation always has 1 as a singular value and its squared singular "
                              "values have no density");
}

namespace {

PolynomialEnsemble finish(PolynomialEnsemble ens) {
    ens.validate();
    return ens;
}

void check_nu(const std::vector<int>& nu, const char* what) {
    for (int v : nu)
        if (v < 0) throw DomainError(std::string(what) + " entries must be nonnegative");
}

// log |det| of exp(L) .* S by scaling rows and columns to unit maxima first.
double log_det_from_logs(const Eigen::MatrixXd& L, const Eigen::MatrixXi& S, int* sign, double* rcond) {
    const Eigen::Index n = L.rows();
    const double ninf = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd row_shift(n), col_shift(n);
    Eigen::MatrixXd W = L;
    for (Eigen::Index j = 0; j < n; ++j) {
        double mx = ninf;
        for (Eigen::Index k = 0; k < n; ++k)
            if (S(j, k) != 0) mx = std::max(mx, W(j, k));
        if (mx == ninf) {
            *sign = 0;
            if (rcond) *rcond = 0.0;
            return ninf;
        }
        row_shift(j) = mx;
        for (Eigen::Index k = 0; k < n; ++k) W(j, k) -= mx;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        double mx = ninf;
        for (Eigen::Index j = 0; j < n; ++j)
            if (S(j, k) != 0) mx = std::max(mx, W(j, k));
        if (mx == ninf) {
            *sign = 0;
            if (rcond) *rcond = 0.0;
            return ninf;
        }
        col_shift(k) = mx;
        for (Eigen::Index j = 0; j < n; ++j) W(j, k) -= mx;
    }
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) A(j, k) = S(j, k) == 0 ? 0.0 : S(j, k) * std::exp(W(j, k));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (rcond) *rcond = lu.rcond();
    const auto& U = lu.matrixLU();
    double acc = row_shift.sum() + col_shift.sum();
    int sg = static_cast<int>(lu.permutationP().determinant() * lu.permutationQ().determinant());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = U(i, i);
        if (d == 0.0) {
            *sign = 0;
            return ninf;
        }
        if (d < 0) sg = -sg;
        acc += std::log(std::fabs(d));
    }
    *sign = sg;
    return acc;
}

}  // namespace

double log_abs_det(const Eigen::MatrixXd& a, int* sign) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw DomainError("determinant of a non-square matrix");
    Eigen::MatrixXd L(n, n);
    Eigen::MatrixXi S(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double v = a(j, k);
            if (!std::isfinite(v)) throw NumericalError("non-finite matrix entry");
            S(j, k) = v > 0 ? 1 : (v < 0 ? -1 : 0);
            L(j, k) = v == 0 ? -std::numeric_limits<double>::infinity() : std::log(std::fabs(v));
        }
    return log_det_from_logs(L, S, sign, nullptr);
}

double log_abs_vandermonde(const std::vector<double>& x, int* sign) {
    double acc = 0.0;
    int sg = 1;
    for (std::size_t j = 0; j < x.size(); ++j)
        for (std::size_t k = j + 1; k < x.size(); ++k) {
            const double d = x[k] - x[j];
            if (d == 0.0) {
                *sign = 0;
                return -std::numeric_limits<double>::infinity();
            }
            if (d < 0) sg = -sg;
            acc += std::log(std::fabs(d));
        }
    *sign = sg;
    return acc;
}

void PolynomialEnsemble::validate() const {
    if (n < 1) throw DomainError("ensemble needs n >= 1");
    if (static_cast<int>(weights.size()) != n) throw DomainError("ensemble needs exactly n weights");
    for (const auto& w : weights) {
        if (w.support != weights[0].support) throw DomainError("weights must share a support");
        w.spec.validate();
    }
    if (n <= 30) normalization_detail(*this);
}

PolynomialEnsemble ginibre_chain_ensemble(int n, const std::vector<int>& nu) {
    if (nu.empty()) throw DomainError("Ginibre chain needs at least one factor");
    check_nu(nu, "nu");
    PolynomialEnsemble ens;
    ens.n = n;
    ens.model_tag = ModelTag::ginibre_chain;
    const int M = static_cast<int>(nu.size());
    for (int k = 0; k < n; ++k) {
        std::vector<double> b;
        for (int j = M - 1; j >= 1; --j) b.push_back(nu[j]);
        b.push_back(nu[0] + k);
        ens.weights.push_back({0.0, MeijerGSpec::make(M, 0, {}, b), Support::positive_axis});
    }
    return finish(std::move(ens));
}

PolynomialEnsemble inverse_chain_ensemble(int n, const std::vector<int>& nu, const std::vector<int>& tilde_nu) {
    if (tilde_nu.empty()) throw DomainError("inverse chain needs K >= 1");
    if (tilde_nu.back() != 0) throw DomainError("inverse chain needs tilde_nu_K = 0 (square product)");
    check_nu(nu, "nu");
    check_nu(tilde_nu, "tilde_nu");
    const int M = static_cast<int>(nu.size());
    const int K = static_cast<int>(tilde_nu.size());
    PolynomialEnsemble ens;
    ens.n = n;
    ens.model_tag = ModelTag::inverse_chain;
    for (int k = 0; k < n; ++k) {
        std::vector<double> a, b;
        for (int j = K - 1; j >= 1; --j) a.push_back(-tilde_nu[j] - n);
        a.push_back(-tilde_nu[0] - n - k);
        for (int j = M - 1; j >= 0; --j) b.push_back(nu[j]);
        ens.weights.push_back({0.0, MeijerGSpec::make(M, K, a, b), Support::positive_axis});
    }
    return finish(std::move(ens));
}

PolynomialEnsemble jacobi_truncation_ensemble(int n, int nu1, int l) {
    TruncationModelParams p{n, 1, {nu1}, l};
    p.validate();
    PolynomialEnsemble ens;
    ens.n = n;
    ens.model_tag = ModelTag::truncated_chain;
    const double logpref = std::lgamma(l - 2.0 * n - nu1 + 1.0);
    for (int k = 0; k < n; ++k)
        ens.weights.push_back(
            {logpref, MeijerGSpec::make(1, 0, {l - 2.0 * n + k + 1.0}, {double(nu1 + k)}), Support::unit_interval});
    return finish(std::move(ens));
}

PolynomialEnsemble truncated_unitary_chain_ensemble(const TruncationModelParams& params) {
    params.validate();
    const int n = params.n, M = params.M, l = params.l;
    PolynomialEnsemble ens;
    ens.n = n;
    ens.model_tag = ModelTag::truncated_chain;
    const double logpref = std::lgamma(l - 2.0 * n - params.nu[0] + 1.0);
    for (int k = 0; k < n; ++k) {
        std::vector<double> b;
        for (int j = M - 1; j >= 1; --j) b.push_back(params.nu[j]);
        b.push_back(params.nu[0] + k);
        ens.weights.push_back({logpref, MeijerGSpec::make(M, 0, {l - 2.0 * n + 1.0 + k}, b),
                               M == 1 ? Support::unit_interval : Support::positive_axis});
    }
    return finish(std::move(ens));
}

PolynomialEnsemble apply_ginibre_transform(const PolynomialEnsemble& ens, double nu) {
    if (nu < 0) throw DomainError("Ginibre transform needs nu >= 0");
    PolynomialEnsemble out;
    out.n = ens.n;
    out.model_tag = ens.model_tag;
    for (const auto& w : ens.weights)
        out.weights.push_back({w.log_prefactor, convolve_exp_power(w.spec, nu), Support::positive_axis});
    return finish(std::move(out));
}

PolynomialEnsemble apply_inversion(const PolynomialEnsemble& ens) {
    PolynomialEnsemble out;
    out.n = ens.n;
    out.model_tag = ModelTag::transformed;
    for (const auto& w : ens.weights) {
        if (w.support != Support::positive_axis)
            throw DomainError("inversion needs weights supported on the positive axis");
        out.weights.push_back(
            {w.log_prefactor, shift_parameters(invert_argument(w.spec), -ens.n - 1.0), Support::positive_axis});
    }
    return finish(std::move(out));
}

Eigen::MatrixXd log_moment_matrix(const PolynomialEnsemble& ens, Eigen::MatrixXi* signs) {
    const int n = ens.n;
    Eigen::MatrixXd L(n, n);
    if (signs) signs->resize(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            int sg = 1;
            L(j, k) = ens.weights[k].log_moment(j + 1.0, &sg);
            if (signs) (*signs)(j, k) = sg;
        }
    return L;
}

Eigen::MatrixXd moment_matrix(const PolynomialEnsemble& ens) {
    Eigen::MatrixXi S;
    const Eigen::MatrixXd L = log_moment_matrix(ens, &S);
    Eigen::MatrixXd G(ens.n, ens.n);
    for (int j = 0; j < ens.n; ++j)
        for (int k = 0; k < ens.n; ++k) G(j, k) = S(j, k) * std::exp(L(j, k));
    return G;
}

NormalizationDetail normalization_detail(const PolynomialEnsemble& ens) {
    Eigen::MatrixXi S;
    const Eigen::MatrixXd L = log_moment_matrix(ens, &S);
    int sign = 0;
    double rcond = 0.0;
    const double ld = log_det_from_logs(L, S, &sign, &rcond);
    if (sign == 0 || !std::isfinite(ld) || !(rcond > 1e-15))
        throw SingularityError("moment matrix is numerically singular");
    NormalizationDetail d;
    d.log_z = std::lgamma(ens.n + 1.0) + ld;
    d.sign = sign;
    d.condition = rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    d.ill_conditioned = d.condition > 1e12;
    return d;
}

double normalization_constant(const PolynomialEnsemble& ens, int* sign) {
    const auto d = normalization_detail(ens);
    if (sign) *sign = d.sign;
    return d.log_z;
}

double jpdf(const PolynomialEnsemble& ens, const std::vector<double>& points, double log_z, int z_sign,
            const MeijerOptions& opts) {
    const int n = ens.n;
    if (static_cast<int>(points.size()) != n) throw DomainError("jpdf needs exactly n points");
    for (int j = 0; j < n; ++j) {
        if (!(points[j] > 0)) throw DomainError("jpdf points must be positive");
        for (int k = j + 1; k < n; ++k)
            if (std::fabs(points[j] - points[k]) <= 1e-12 * std::max(points[j], points[k]))
                throw DegenerateInputError("jpdf points must be pairwise distinct");
    }
    int sv = 0;
    const double lv = log_abs_vandermonde(points, &sv);
    Eigen::MatrixXd L(n, n);
    Eigen::MatrixXi S(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            const auto& w = ens.weights[k];
            double v = 0.0;
            if (!(w.support == Support::unit_interval && points[j] >= 1.0)) v = meijer_g(w.spec, points[j], opts);
            S(j, k) = v > 0 ? 1 : (v < 0 ? -1 : 0);
            L(j, k) = (v == 0 ? -std::numeric_limits<double>::infinity() : std::log(std::fabs(v))) + w.log_prefactor;
        }
    int sd = 0;
    const double ld = log_det_from_logs(L, S, &sd, nullptr);
    if (sd == 0) return 0.0;
    return z_sign * sv * sd * std::exp(lv + ld - log_z);
}

double jpdf(const PolynomialEnsemble& ens, const std::vector<double>& points, const MeijerOptions& opts) {
    const auto d = normalization_detail(ens);
    return jpdf(ens, points, d.log_z, d.sign, opts);
}

double fixed_x_transition_density(const std::vector<double>& x, double nu, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n) throw DomainError("transition density needs equal nonempty x and y lists");
    if (nu < 0) throw DomainError("transition density needs nu >= 0");
    for (std::size_t j = 0; j < n; ++j) {
        if (!(x[j] > 0) || !(y[j] > 0)) throw DomainError("transition density needs positive entries");
        for (std::size_t k = j + 1; k < n; ++k) {
            if (std::fabs(x[j] - x[k]) <= 1e-12 * std::max(x[j], x[k]))
                throw DegenerateInputError("coincident x entries: the limiting form is not supported");
            if (std::fabs(y[j] - y[k]) <= 1e-12 * std::max(y[j], y[k]))
                throw DegenerateInputError("coincident y entries");
        }
    }
    // Andreief with int y^{i+nu} x^{-nu-1} e^{-y/x} dy = Gamma(i+nu+1) x^i gives
    // Z = n! prod_i Gamma(i+nu+1) Delta(x).
    double log_c = -std::lgamma(n + 1.0);
    for (std::size_t i = 0; i < n; ++i) log_c -= std::lgamma(i + nu + 1.0);
    Eigen::MatrixXd L(n, n);
    Eigen::MatrixXi S = Eigen::MatrixXi::Ones(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            L(j, k) = nu * std::log(y[j]) - (nu + 1.0) * std::log(x[k]) - y[j] / x[k];
    int sd = 0, sy = 0, sx = 0;
    const double ld = log_det_from_logs(L, S, &sd, nullptr);
    const double ly = log_abs_vandermonde(y, &sy);
    const double lx = log_abs_vandermonde(x, &sx);
    if (sd == 0) return 0.0;
    return sd * sy * sx * std::exp(log_c + ly - lx + ld);
}

}  // namespace polyens
