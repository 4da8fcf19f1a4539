#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pcol/graph.hpp"
#include "pcol/sdp.hpp"

namespace pcol {

enum class RoundMethod { fj, kms, derand };

std::string method_name(RoundMethod m);
RoundMethod method_from_name(const std::string& name);

struct RoundingOutcome {
    Colouring colouring;
    Rational achieved_value{0, 1};
    RoundMethod method = RoundMethod::fj;
    long long trials_used = 1;
    std::uint64_t seed = 0;
};

// Argmax rounding: draw ell i.i.d. standard normal vectors, colour vertex i
// with the index maximising a_i . x_c; ties go to the lowest colour.
RoundingOutcome fj_round(const Graph& g, const GramSolution& sol, int ell, std::uint64_t seed);

// Exact expectation of fj_round's value, per edge 1 - ell * P_ell(a_i . a_j),
// clamped termwise to [0,1]; loops contribute 0.
double expected_fj_value(const Graph& g, const GramSolution& sol, int ell, double p_tol = 1e-7);

// Hyperplane-pattern rounding with t = floor(log2 ell) cuts; each hyperplane
// is the bisector of two seeded normal vectors, side 0 on ties, and the t-bit
// pattern is the colour in 1..2^t <= ell.
RoundingOutcome kms_round(const Graph& g, const GramSolution& sol, int ell, std::uint64_t seed);

// Repeats the rounding with per-trial derived seeds; keeps the maximum value,
// earliest trial on ties.
RoundingOutcome best_of(const Graph& g, const GramSolution& sol, int ell, RoundMethod method,
                        long long trials, std::uint64_t seed);

struct NBinSpec {
    int s = 1; // Rademacher steps per coordinate
};

// Deterministic rounding by the method of conditional expectations over
// normalised binomial surrogates of the Gaussians; returns a colouring of
// value >= expected_fj_value - eps. When `nbin` is absent, s is the smallest
// power of two whose measured discretisation budget fits eps/2.
RoundingOutcome derand_round(const Graph& g, const GramSolution& sol, int ell, double eps,
                             std::optional<NBinSpec> nbin = std::nullopt);

} // namespace pcol
