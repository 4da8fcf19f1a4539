#pragma once

#include <vector>

namespace pcol {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Computed once per order via Newton iteration on the Legendre recurrence;
// cached internally, thread-safe.
const GaussLegendre& gauss_legendre(int order);

// Integrate f over [a, b] with a composite rule: `panels` equal panels,
// `order` points each.
template <typename F>
double integrate_composite(F&& f, double a, double b, int panels, int order) {
    const GaussLegendre& gl = gauss_legendre(order);
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        double acc = 0.0;
        for (int i = 0; i < order; ++i) acc += gl.weights[i] * f(mid + 0.5 * h * gl.nodes[i]);
        total += acc * 0.5 * h;
    }
    return total;
}

} // namespace pcol
