#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcol/graph.hpp"

namespace pcol {

// Unit-vector solution of the vector relaxation for k-colouring:
//   maximise (1/m) sum_{(i,j) in E, i != j} ((k-1)/k) (1 - a_i . a_j)
//   s.t.     |a_i| = 1,  a_i . a_j >= -1/(k-1) for i != j.
struct GramSolution {
    int rank = 0;
    int k = 0;
    double objective = 0.0;
    double feas_tol = 0.0;
    std::vector<std::vector<double>> vectors; // n rows of `rank` floats

    int n() const { return static_cast<int>(vectors.size()); }
};

struct SolverOptions {
    double target_eps = 1e-4; // additive objective accuracy to aim for
    double feas_tol = 1e-6;   // constraint tolerance the result must meet
    int max_iters = 20000;    // ascent iterations per restart, all stages
    int restarts = 8;
    std::uint64_t seed = 1;
    double penalty_init = 4.0;
    double penalty_growth = 4.0;
    int penalty_stages = 14;
};

struct FeasReport {
    double max_norm_dev = 0.0;       // max | |a_i| - 1 |
    double max_floor_violation = 0.0; // max ( -1/(k-1) - a_i.a_j )^+ over checked pairs
    bool within(double tol) const {
        return max_norm_dev <= tol && max_floor_violation <= tol;
    }
};

class solver_error : public std::runtime_error {
public:
    solver_error(const std::string& what, GramSolution best, FeasReport report)
        : std::runtime_error(what), best_iterate(std::move(best)), feasibility(report) {}
    GramSolution best_iterate;
    FeasReport feasibility;
};

// The explicit equiangular frame: k unit vectors in R^n with pairwise inner
// product -1/(k-1). Requires n >= k.
std::vector<std::vector<double>> simplex_vectors(int k, int n);

// Low-rank factorised ascent with a hinge penalty on the pairwise floor,
// geometric penalty growth and seeded restarts. Deterministic in (seed, opts).
GramSolution solve_relaxation(const Graph& g, int k, const SolverOptions& opts = {});

// Recomputes the relaxation objective of `sol` on `g` from scratch.
double relaxation_objective(const Graph& g, const GramSolution& sol);

// Norm deviations over all vectors; floor violations over all pairs when n is
// small, otherwise over edges plus a seeded audit sample of non-edges.
FeasReport check_feasibility(const GramSolution& sol, std::uint64_t audit_seed = 7);

// Embed a k-colouring as simplex vectors (proper edges land exactly on the
// floor). Requires rank >= k.
GramSolution embed_colouring(const Graph& g, const Colouring& c, int k, int rank);

// Text serialisation, round-trippable bit-for-bit (17 significant digits).
std::string gram_to_json(const GramSolution& sol);
GramSolution gram_from_json(const std::string& text);

} // namespace pcol
