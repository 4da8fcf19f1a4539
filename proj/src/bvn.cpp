#include "pcol/bvn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pcol/quadrature.hpp"

namespace pcol {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
} // namespace

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

namespace {

// Integration mesh on [0, arcsin(rho)]. A single high-order panel suffices
// away from |rho| = 1; close to it the integrand develops a boundary layer of
// width ~|h - v| at the upper endpoint, so the panels are graded
// geometrically towards it.
void build_theta_mesh(double rho, std::vector<double>& sin_out, std::vector<double>& q_out,
                      std::vector<double>& w_out) {
    const double phi = std::asin(rho);
    std::vector<double> breaks;
    int order;
    if (std::fabs(rho) <= 0.925) {
        breaks = {0.0, phi};
        order = 20;
    } else {
        breaks.push_back(0.0);
        const int levels = 27;
        for (int j = 1; j <= levels; ++j) breaks.push_back(phi * (1.0 - std::ldexp(1.0, -j)));
        breaks.push_back(phi);
        order = 16;
    }
    const GaussLegendre& gl = gauss_legendre(order);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double a = breaks[p], b = breaks[p + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (int i = 0; i < order; ++i) {
            const double theta = mid + half * gl.nodes[i];
            const double c = std::cos(theta);
            sin_out.push_back(std::sin(theta));
            q_out.push_back(1.0 / (2.0 * c * c));
            w_out.push_back(gl.weights[i] * half / kTwoPi);
        }
    }
}

double eval_mesh(double h, double v, const std::vector<double>& s, const std::vector<double>& q,
                 const std::vector<double>& w) {
    const double hv = h * v;
    const double hh = h * h + v * v;
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        acc += w[i] * std::exp(-(hh - 2.0 * hv * s[i]) * q[i]);
    return acc;
}

double clamp_frechet(double p, double ph, double pv) {
    const double lo = std::max(0.0, ph + pv - 1.0);
    const double hi = std::min(ph, pv);
    return std::min(std::max(p, lo), hi);
}

} // namespace

double bvn_cdf(double h, double v, double rho) {
    if (std::isnan(h) || std::isnan(v)) return std::numeric_limits<double>::quiet_NaN();
    if (h == -std::numeric_limits<double>::infinity() ||
        v == -std::numeric_limits<double>::infinity())
        return 0.0;
    if (h == std::numeric_limits<double>::infinity()) return norm_cdf(v);
    if (v == std::numeric_limits<double>::infinity()) return norm_cdf(h);
    if (rho >= 1.0) return norm_cdf(std::min(h, v));
    if (rho <= -1.0) return std::max(0.0, norm_cdf(h) + norm_cdf(v) - 1.0);

    const double ph = norm_cdf(h), pv = norm_cdf(v);
    if (rho == 0.0) return ph * pv;
    std::vector<double> s, q, w;
    build_theta_mesh(rho, s, q, w);
    return clamp_frechet(ph * pv + eval_mesh(h, v, s, q, w), ph, pv);
}

BvnFixed::BvnFixed(double rho) : rho_(rho), degenerate_(std::fabs(rho) >= 1.0) {
    if (!degenerate_ && rho_ != 0.0) build_theta_mesh(rho_, sin_, q_, w_);
}

double BvnFixed::operator()(double h, double v) const {
    if (degenerate_) {
        if (rho_ >= 1.0) return norm_cdf(std::min(h, v));
        return std::max(0.0, norm_cdf(h) + norm_cdf(v) - 1.0);
    }
    const double ph = norm_cdf(h), pv = norm_cdf(v);
    if (rho_ == 0.0) return ph * pv;
    return clamp_frechet(ph * pv + eval_mesh(h, v, sin_, q_, w_), ph, pv);
}

} // namespace pcol
