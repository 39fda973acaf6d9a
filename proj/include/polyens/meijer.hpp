#pragma once

#include <string>
#include <vector>

#include "polyens/mellin_barnes.hpp"
#include "polyens/quad.hpp"

namespace polyens {

/// Parameter block of G^{m,n}_{p,q}(a; b | x).
struct MeijerGSpec {
    int m = 0;
    int n = 0;
    int p = 0;
    int q = 0;
    std::vector<double> a;
    std::vector<double> b;

    /// Builds a spec with p = a.size(), q = b.size() and validates it.
    static MeijerGSpec make(int m, int n, std::vector<double> a, std::vector<double> b);

    /// Throws SpecError unless 0 <= n <= p, 0 <= m <= q, the list sizes match
    /// and no a_k - b_j (k <= n, j <= m) is a positive integer.
    void validate() const;
    std::string describe() const;

    bool operator==(const MeijerGSpec&) const = default;
};

GammaRatio to_gamma_ratio(const MeijerGSpec& spec);

struct MeijerOptions {
    MBRoute route = MBRoute::automatic;
    double tolerance = 1e-12;
    std::optional<double> abscissa;
};

using MeijerValue = MBResult;

MeijerValue meijer_g_detail(const MeijerGSpec& spec, double x, const MeijerOptions& opts = {});
double meijer_g(const MeijerGSpec& spec, double x, const MeijerOptions& opts = {});
/// G^{q,0}_{q,q}(x) for 0 < x <= 1 from its expansion in powers of 1 - x;
/// the automatic route uses it for x >= 0.25, where the residue series stalls.
MeijerValue meijer_g_near_one(const MeijerGSpec& spec, double x, double tolerance = 1e-12);
/// Evaluation on an explicit contour: a vertical line at contour.anchor, or
/// the loop around the left poles.
MeijerValue meijer_g(const MeijerGSpec& spec, double x, const ContourSpec& contour);

/// Closed-form Mellin transform at s; StripError outside the fundamental strip.
cplx meijer_mellin_moment(const MeijerGSpec& spec, cplx s);
/// Log of |moment| and its sign, for real s inside the strip.
double log_meijer_mellin_moment(const MeijerGSpec& spec, double s, int* sign);

/// x^alpha G(x): every parameter shifted by alpha.
MeijerGSpec shift_parameters(const MeijerGSpec& spec, double alpha);
/// G(1/x) as a Meijer G-function of x.
MeijerGSpec invert_argument(const MeijerGSpec& spec);
/// y -> int_0^inf x^{nu-1} e^{-x} G(y/x) dx.
MeijerGSpec convolve_exp_power(const MeijerGSpec& spec, double nu);

enum class WrightMode { b_equals_M, b_equals_1_over_M };

struct WrightMeijer {
    double prefactor = 1.0;
    MeijerGSpec spec;
    double argument_scale = 1.0;  // G is evaluated at argument_scale * x^argument_power
    int argument_power = 1;
};

/// Meijer form of J_{a,M} or J_{a,1/M}.
WrightMeijer wright_to_meijer(double a, int M, WrightMode mode);
double evaluate(const WrightMeijer& w, double x, const MeijerOptions& opts = {});

}  // namespace polyens
