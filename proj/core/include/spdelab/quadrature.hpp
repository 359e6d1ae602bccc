#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "spdelab/errors.hpp"

namespace spdelab {

// Composite Gauss-Legendre quadrature. Two fixed rules (8 and 16 points)
// cover everything we assemble; accuracy is controlled by panel layout, and
// rule escalation doubles as an error estimate.

struct PanelRule {
    // Nodes and weights on the reference interval [-1, 1].
    const double* nodes;
    const double* weights;
    int size;
};

namespace detail {

// Abscissae/weights to 18 significant digits (symmetric halves spelled out).
inline constexpr double kGl8Nodes[8] = {
    -0.960289856497536232, -0.796666477413626740, -0.525532409916328986,
    -0.183434642495649805, 0.183434642495649805,  0.525532409916328986,
    0.796666477413626740,  0.960289856497536232};
inline constexpr double kGl8Weights[8] = {
    0.101228536290376259, 0.222381034453374471, 0.313706645877887287,
    0.362683783378361983, 0.362683783378361983, 0.313706645877887287,
    0.222381034453374471, 0.101228536290376259};

inline constexpr double kGl16Nodes[16] = {
    -0.989400934991649933, -0.944575023073232576, -0.865631202387831744,
    -0.755404408355003034, -0.617876244402643748, -0.458016777657227386,
    -0.281603550779258913, -0.095012509837637440, 0.095012509837637440,
    0.281603550779258913,  0.458016777657227386,  0.617876244402643748,
    0.755404408355003034,  0.865631202387831744,  0.944575023073232576,
    0.989400934991649933};
inline constexpr double kGl16Weights[16] = {
    0.027152459411754095, 0.062253523938647893, 0.095158511682492785,
    0.124628971255533872, 0.149595988816576732, 0.169156519395002538,
    0.182603415044923589, 0.189450610455068496, 0.189450610455068496,
    0.182603415044923589, 0.169156519395002538, 0.149595988816576732,
    0.124628971255533872, 0.095158511682492785, 0.062253523938647893,
    0.027152459411754095};

} // namespace detail

inline PanelRule gauss_legendre_8() {
    return {detail::kGl8Nodes, detail::kGl8Weights, 8};
}

inline PanelRule gauss_legendre_16() {
    return {detail::kGl16Nodes, detail::kGl16Weights, 16};
}

// Integrates f over [a, b] with a single panel of the given rule.
template <typename F>
double integrate_panel(F&& f, double a, double b, const PanelRule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < rule.size; ++i)
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

// Panel edges a = x_0 < x_1 < ... < x_n = b.
using PanelGrid = std::vector<double>;

template <typename F>
double integrate_panels(F&& f, const PanelGrid& edges, const PanelRule& rule) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        acc += integrate_panel(f, edges[i], edges[i + 1], rule);
    return acc;
}

inline PanelGrid uniform_panels(double a, double b, int count) {
    if (count < 1) throw ValidationError("panel count must be positive");
    PanelGrid edges(static_cast<std::size_t>(count) + 1);
    for (int i = 0; i <= count; ++i)
        edges[static_cast<std::size_t>(i)] =
            a + (b - a) * static_cast<double>(i) / static_cast<double>(count);
    return edges;
}

// Uniform panels sized so each spans at most max_width, with a floor on the
// count. Used to keep oscillatory integrands resolved: for frequencies up to
// omega (radians per unit), max_width ~ 2pi/omega puts one wavelength or
// less on each panel.
inline PanelGrid frequency_panels(double a, double b, double max_width, int min_count = 4) {
    int count = static_cast<int>(std::ceil((b - a) / max_width));
    if (count < min_count) count = min_count;
    return uniform_panels(a, b, count);
}

// Geometrically graded panels accumulating toward the left endpoint `a`:
// a, a + h, a + h*r, ... , b with the innermost width h. Used for endpoint
// algebraic singularities, where geometric grading restores full quadrature
// order.
inline PanelGrid graded_panels_left(double a, double b, double inner_width, double ratio = 2.0) {
    if (!(b > a)) throw ValidationError("graded panel interval is empty");
    if (!(inner_width > 0.0) || !(ratio > 1.0))
        throw ValidationError("graded panel parameters out of range");
    PanelGrid edges{a};
    double offset = inner_width;
    while (a + offset < b) {
        edges.push_back(a + offset);
        offset *= ratio;
    }
    edges.push_back(b);
    return edges;
}

// Splits every panel in two; doubling the grid and re-integrating gives a
// cheap self-consistency error estimate.
inline PanelGrid refine_panels(const PanelGrid& edges) {
    PanelGrid out;
    out.reserve(edges.size() * 2);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        out.push_back(edges[i]);
        out.push_back(0.5 * (edges[i] + edges[i + 1]));
    }
    out.push_back(edges.back());
    return out;
}

} // namespace spdelab
