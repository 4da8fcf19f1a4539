#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pcol {

// A numerically computed constant together with an absolute error bound.
struct AlphaEstimate {
    double value = 0.0;
    double abs_error_bound = 0.0;
    std::string method; // "quadrature" | "closed-form" | "minimization"
    int grid_size = 0;
    double a_star = 0.0; // minimiser location, minimization results only
};

// Probability that one fixed index attains the maximum simultaneously in two
// a-correlated families of `ell` i.i.d. Gaussians. Evaluated as a 2-D
// integral of a bivariate-normal CDF power over the conditioned leader pair;
// panels are refined until the requested absolute tolerance is met.
AlphaEstimate p_ell(double a, int ell, double tol = 1e-7);

// ell * p_ell
double n_ell(double a, int ell, double tol = 1e-7);

struct MinimizeOptions {
    int grid = 400;            // coarse scan points before golden-section refinement
    double ratio_tol = 1e-5;   // per-point accuracy of the minimised ratio
    double target_bound = 5e-4;
};

// Worst-case ratio between the rounded proper-edge probability and the
// relaxation's per-edge contribution, minimised over feasible inner products
// a in [-1/(k-1), 1).
AlphaEstimate alpha_kl(int k, int ell, const MinimizeOptions& opts = {});

struct KmsConstants {
    int t;      // floor(log2(ell)) hyperplanes
    double x_k; // 1 - arccos(-1/(k-1))/pi
    double u_k; // -log2(x_k)
};

KmsConstants kms_constants(int k, int ell);

struct AlphaPrimeResult {
    AlphaEstimate estimate;
    KmsConstants constants;
    double closed_form;       // 1 - x_k^t, the value at the left endpoint
    bool minimizer_at_left;   // whether the minimiser sits at a = -1/(k-1)
};

// Hyperplane-rounding analogue of alpha_kl with t = floor(log2 ell) cuts.
AlphaPrimeResult alpha_prime_kl(int k, int ell, const MinimizeOptions& opts = {});

struct AlphaTableCell {
    int k;
    int ell;
    AlphaEstimate estimate;
};

struct AlphaTableOptions {
    MinimizeOptions minimize;
    int threads = 0; // 0 = hardware concurrency
};

// Upper-triangular (ell >= k) table of alpha_kl values.
std::vector<AlphaTableCell> alpha_table(int k_min, int k_max, int ell_min, int ell_max,
                                        const AlphaTableOptions& opts = {});
std::string alpha_table_csv(const std::vector<AlphaTableCell>& cells);
std::string alpha_table_text(const std::vector<AlphaTableCell>& cells);

struct FtReport {
    int checked = 0;
    int violations = 0;
    double min_slack = 0.0;
    std::vector<double> worst_point; // point attaining min_slack
};

// Audits sum_i F(x_i) >= 1/ell - T ln(ell)/ell - 4 ell exp(-1/T) with
// F(x) = x^2 (1 + T ln x), F(0) = 0, over structured simplex points plus
// `trials` random ones.
FtReport ft_bound_check(double T, int ell, int trials, std::uint64_t seed);

} // namespace pcol
