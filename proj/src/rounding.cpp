#include "pcol/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pcol/alpha.hpp"
#include "pcol/errors.hpp"
#include "pcol/rng.hpp"

namespace pcol {

std::string method_name(RoundMethod m) {
    switch (m) {
        case RoundMethod::fj: return "fj";
        case RoundMethod::kms: return "kms";
        case RoundMethod::derand: return "derand";
    }
    return "?";
}

RoundMethod method_from_name(const std::string& name) {
    if (name == "fj") return RoundMethod::fj;
    if (name == "kms") return RoundMethod::kms;
    if (name == "derand") return RoundMethod::derand;
    throw param_error("unknown rounding method: " + name);
}

namespace {

void require_match(const Graph& g, const GramSolution& sol, int ell) {
    if (sol.n() != g.n()) throw param_error("solution size does not match graph");
    if (ell < 2) throw param_error("palette must be >= 2");
    if (g.m() == 0) throw param_error("rounding undefined on empty edge set");
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

RoundingOutcome fj_round(const Graph& g, const GramSolution& sol, int ell, std::uint64_t seed) {
    require_match(g, sol, ell);
    const int r = sol.rank;
    Rng rng(seed);
    std::vector<std::vector<double>> x(ell, std::vector<double>(r));
    for (int c = 0; c < ell; ++c)
        for (int d = 0; d < r; ++d) x[c][d] = rng.next_gaussian();

    RoundingOutcome out;
    out.method = RoundMethod::fj;
    out.seed = seed;
    out.colouring.palette = ell;
    out.colouring.colours.resize(g.n());
    for (int i = 0; i < g.n(); ++i) {
        int best = 0;
        double best_v = dot(sol.vectors[i], x[0]);
        for (int c = 1; c < ell; ++c) {
            const double v = dot(sol.vectors[i], x[c]);
            if (v > best_v) { best_v = v; best = c; }
        }
        out.colouring.colours[i] = best + 1;
    }
    out.achieved_value = colouring_value(g, out.colouring);
    return out;
}

double expected_fj_value(const Graph& g, const GramSolution& sol, int ell, double p_tol) {
    require_match(g, sol, ell);
    std::map<double, double> memo; // inner product -> P_ell
    double acc = 0.0;
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue; // 1 - ell * P_ell(1) = 0
        double a = std::clamp(dot(sol.vectors[e.u - 1], sol.vectors[e.v - 1]), -1.0, 1.0);
        auto it = memo.find(a);
        if (it == memo.end()) it = memo.emplace(a, p_ell(a, ell, p_tol).value).first;
        acc += e.mult * std::clamp(1.0 - ell * it->second, 0.0, 1.0);
    }
    return acc / g.m();
}

RoundingOutcome kms_round(const Graph& g, const GramSolution& sol, int ell, std::uint64_t seed) {
    require_match(g, sol, ell);
    const int r = sol.rank;
    const int t = static_cast<int>(std::floor(std::log2(static_cast<double>(ell))));
    Rng rng(seed);
    std::vector<std::vector<double>> xs(t, std::vector<double>(r)), ys(t, std::vector<double>(r));
    for (int j = 0; j < t; ++j) {
        for (int d = 0; d < r; ++d) xs[j][d] = rng.next_gaussian();
        for (int d = 0; d < r; ++d) ys[j][d] = rng.next_gaussian();
    }

    RoundingOutcome out;
    out.method = RoundMethod::kms;
    out.seed = seed;
    out.colouring.palette = ell;
    out.colouring.colours.resize(g.n());
    for (int i = 0; i < g.n(); ++i) {
        int pattern = 0;
        for (int j = 0; j < t; ++j) {
            const bool side0 = dot(sol.vectors[i], xs[j]) >= dot(sol.vectors[i], ys[j]);
            if (!side0) pattern |= 1 << j;
        }
        out.colouring.colours[i] = pattern + 1;
    }
    out.achieved_value = colouring_value(g, out.colouring);
    return out;
}

RoundingOutcome best_of(const Graph& g, const GramSolution& sol, int ell, RoundMethod method,
                        long long trials, std::uint64_t seed) {
    if (trials < 1) throw param_error("best_of requires trials >= 1");
    if (method == RoundMethod::derand) {
        RoundingOutcome out = derand_round(g, sol, ell, 0.05);
        out.trials_used = trials;
        return out;
    }
    RoundingOutcome best;
    bool have = false;
    for (long long tr = 0; tr < trials; ++tr) {
        const std::uint64_t s = split_seed(seed, static_cast<std::uint64_t>(tr));
        RoundingOutcome cur =
            method == RoundMethod::fj ? fj_round(g, sol, ell, s) : kms_round(g, sol, ell, s);
        if (!have || cur.achieved_value > best.achieved_value) {
            best = std::move(cur);
            have = true;
        }
    }
    best.trials_used = trials;
    return best;
}

} // namespace pcol
