#pragma once

#include <cstdint>

#include "pcol/graph.hpp"
#include "pcol/sdp.hpp"

namespace pcol {

struct OracleBudget {
    int max_vertices = 12; // enumeration guard, counting non-loop-incident vertices
    int max_palette = 5;
    long long mc_samples = 1000000;
    std::uint64_t seed = 0;
};

struct RhoResult {
    Rational value;
    Colouring witness;
};

// Exact maximum colouring value by branch and bound with canonical colour
// classes (vertex order fixed, colour c+1 only after colour c appears).
// Loops are pre-counted as improper and removed from the search.
RhoResult exact_rho(const Graph& g, int k, const OracleBudget& budget = {});

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long long samples = 0;
};

// Samples the defining event of p_ell directly: one index leading both
// a-correlated Gaussian families.
McEstimate mc_p_ell(double a, int ell, long long samples, std::uint64_t seed);

// Expected rounded value recomputed per edge from mc_p_ell instead of
// quadrature; cross-oracle for expected_fj_value.
double exact_expected_round(const Graph& g, const GramSolution& sol, int ell,
                            const OracleBudget& budget = {});

} // namespace pcol
