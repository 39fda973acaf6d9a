#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polyens/specfun.hpp"

namespace polyens {

/// Gamma ratio
///   prod Gamma(s + left_num) prod Gamma(right_num - s)
///   ---------------------------------------------------
///   prod Gamma(s + left_den) prod Gamma(right_den - s)
/// Poles of the left numerator factors lie to the left of the integration
/// path, poles of the right numerator factors to the right.
struct GammaRatio {
    std::vector<double> left_num;
    std::vector<double> right_num;
    std::vector<double> left_den;
    std::vector<double> right_den;

    /// log of the ratio; returns false when a denominator factor vanishes.
    bool log_value(cplx s, cplx& out) const;
    /// ratio times x^{-s} given log x; zero at denominator poles.
    cplx value(cplx s, double log_x) const;

    int two_delta() const;
    int kappa() const;
    double left_bound() const;   // largest left pole, -inf if none
    double right_bound() const;  // smallest right pole, +inf if none
    GammaRatio mirrored() const;  // s -> -s
};

enum class MBRoute { automatic, line, residue, loop };

struct MBOptions {
    MBRoute route = MBRoute::automatic;
    double tolerance = 1e-12;
    std::optional<double> abscissa;
    double half_height = 0.3;
    int max_levels = 5000;
};

struct MBResult {
    double value = 0.0;
    double imag_residual = 0.0;
    double est_error = 0.0;
    std::string route;
    int nodes = 0;
    bool converged = false;
};

const char* to_string(MBRoute r);

/// (1/2 pi i) integral of ratio(s) x^{-s} ds along a path separating the
/// left poles from the right poles, for x > 0.
MBResult inverse_mellin(const GammaRatio& g, double x, const MBOptions& opts = {});

/// Abscissa in (lo, hi) that keeps |ratio(s) x^{-s}| small on the line.
double saddle_abscissa(const GammaRatio& g, double log_x, double lo, double hi);

}  // namespace polyens
