#pragma once

#include <vector>

namespace pcol {

double norm_pdf(double x);
double norm_cdf(double x);

// Pr[X <= h, Y <= v] for standard bivariate normals with correlation rho,
// via the single-integral reduction d(CDF)/d(rho) = pdf (Plackett), absolute
// error ~1e-13. rho = +-1 handled exactly.
double bvn_cdf(double h, double v, double rho);

// Same computation with all rho-dependent quantities (integration nodes on
// [0, arcsin rho]) precomputed; used in inner loops that fix the correlation.
class BvnFixed {
public:
    explicit BvnFixed(double rho);
    double operator()(double h, double v) const;
    double rho() const { return rho_; }

private:
    double rho_;
    bool degenerate_; // |rho| == 1
    std::vector<double> sin_;  // sin(theta_i)
    std::vector<double> q_;    // 1 / (2 cos^2 theta_i)
    std::vector<double> w_;    // weight_i / (2 pi)
};

} // namespace pcol
