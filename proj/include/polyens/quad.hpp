#pragma once

#include <functional>
#include <vector>

#include "polyens/specfun.hpp"

namespace polyens {

enum class ContourKind { vertical_line, positive_axis_loop, unit_interval };

/// Contour description shared by the line and loop engines.
///
/// For a vertical line, `anchor` is the abscissa c. For a loop, `anchor` is the
/// center of the closing semicircle and `half_height` the ray offset h.
/// `opens_left` mirrors the loop so that it wraps the negative axis instead.
struct ContourSpec {
    ContourKind kind = ContourKind::vertical_line;
    double anchor = 1.0;
    double truncation = 16.0;
    int initial_nodes = 32;
    double tolerance = 1e-10;
    double half_height = 0.3;
    bool opens_left = false;
    bool close_at_truncation = false;
    int max_doublings = 12;
    double max_truncation = 1e4;

    void validate() const;
};

struct QuadratureResult {
    cplx value{0.0, 0.0};
    double est_error = 0.0;
    int nodes_used = 0;
    bool converged = false;
    std::vector<double> history;  // successive-difference estimates, one per refinement
};

using ComplexFn = std::function<cplx(cplx)>;
using RealFn = std::function<double(double)>;
/// Integrand on (0,1) receiving both u and 1-u, each accurate near its endpoint.
using UnitFn = std::function<double(double u, double one_minus_u)>;

/// Nodes and weights (dz included) of a discretized contour.
struct ContourRule {
    std::vector<cplx> nodes;
    std::vector<cplx> weights;
    std::size_t size() const { return nodes.size(); }
};

/// (1/2 pi i) times the integral along c + i R, adaptive trapezoid.
QuadratureResult integrate_vertical_line(const ComplexFn& f, const ContourSpec& contour);

/// (1/2 pi i) times the counterclockwise loop integral around the positive
/// (or, with opens_left, negative) real axis.
QuadratureResult integrate_loop(const ComplexFn& f, const ContourSpec& contour);

/// Trapezoid rule on c + i[-T, T] with spacing step; weights include ds = i dtau.
ContourRule line_rule(double c, double step, double truncation);

/// Composite Gauss-Legendre rule on the loop described by `contour`, with panels
/// of length at most `panel` and rays of length `truncation`.
ContourRule loop_rule(const ContourSpec& contour, double panel, double truncation);

QuadratureResult integrate_unit_interval(const RealFn& f, double p0, double p1, double tolerance);
QuadratureResult integrate_unit_interval(const UnitFn& f, double p0, double p1, double tolerance);

/// Integral over (0, inf) by exp-sinh; `scale` sets the transition point.
QuadratureResult integrate_half_line(const RealFn& f, double tolerance, double scale = 1.0);

/// Integral over (a, b) by tanh-sinh (smooth or algebraic endpoint behavior).
QuadratureResult integrate_interval(const RealFn& f, double a, double b, double tolerance);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace polyens
