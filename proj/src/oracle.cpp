#include "pcol/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "pcol/errors.hpp"
#include "pcol/rng.hpp"

namespace pcol {

namespace {

struct BranchState {
    int k;
    std::vector<std::vector<std::pair<int, std::int64_t>>> adj; // over compact active ids
    std::vector<int> colour;  // 0 = unassigned
    std::int64_t best_improper;
    std::vector<int> best_colours;

    void dfs(int v, int used, std::int64_t improper) {
        if (improper >= best_improper) return;
        if (v == static_cast<int>(adj.size())) {
            best_improper = improper;
            best_colours = colour;
            return;
        }
        const int limit = std::min(used + 1, k);
        for (int c = 1; c <= limit; ++c) {
            std::int64_t add = 0;
            for (auto [u, mult] : adj[v])
                if (colour[u] == c) add += mult;
            colour[v] = c;
            dfs(v + 1, std::max(used, c), improper + add);
            colour[v] = 0;
        }
    }
};

} // namespace

RhoResult exact_rho(const Graph& g, int k, const OracleBudget& budget) {
    if (k < 1) throw param_error("palette must be >= 1");
    if (g.m() == 0) throw param_error("value undefined on empty edge set (m = 0)");
    if (k > budget.max_palette)
        throw budget_error("palette " + std::to_string(k) + " exceeds oracle budget " +
                           std::to_string(budget.max_palette));

    // Loops contribute a fixed improper mass; vertices touched only by loops
    // (or nothing) may take any colour.
    std::int64_t loop_mass = 0;
    std::vector<int> id(g.n(), -1);
    std::vector<std::pair<int, int>> active_edges_ends;
    for (const auto& e : g.edges()) {
        if (e.is_loop()) {
            loop_mass += e.mult;
            continue;
        }
        if (id[e.u - 1] < 0) id[e.u - 1] = 0;
        if (id[e.v - 1] < 0) id[e.v - 1] = 0;
    }
    int n_active = 0;
    for (int v = 0; v < g.n(); ++v)
        if (id[v] == 0) id[v] = n_active++;
        else id[v] = -1;

    if (n_active > budget.max_vertices)
        throw budget_error("graph has " + std::to_string(n_active) +
                           " colour-relevant vertices, oracle budget is " +
                           std::to_string(budget.max_vertices));

    BranchState st;
    st.k = k;
    st.adj.resize(n_active);
    std::int64_t nonloop_mass = 0;
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue;
        const int u = id[e.u - 1], v = id[e.v - 1];
        st.adj[u].push_back({v, e.mult});
        st.adj[v].push_back({u, e.mult});
        nonloop_mass += e.mult;
    }
    // reindex by degree, densest first, to tighten pruning
    std::vector<int> order(n_active);
    for (int i = 0; i < n_active; ++i) order[i] = i;
    std::vector<std::int64_t> wdeg(n_active, 0);
    for (int i = 0; i < n_active; ++i)
        for (auto [u, m] : st.adj[i]) wdeg[i] += m, (void)u;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        if (wdeg[x] != wdeg[y]) return wdeg[x] > wdeg[y];
        return x < y;
    });
    std::vector<int> pos(n_active);
    for (int i = 0; i < n_active; ++i) pos[order[i]] = i;
    std::vector<std::vector<std::pair<int, std::int64_t>>> adj2(n_active);
    for (int i = 0; i < n_active; ++i)
        for (auto [u, m] : st.adj[i])
            if (pos[u] < pos[i]) adj2[pos[i]].push_back({pos[u], m}); // earlier neighbours only
    st.adj = std::move(adj2);

    st.colour.assign(n_active, 0);
    st.best_improper = nonloop_mass + 1;
    st.dfs(0, 0, 0);

    RhoResult res;
    res.value = Rational(g.m() - loop_mass - st.best_improper, g.m());
    res.witness.palette = k;
    res.witness.colours.assign(g.n(), 1);
    for (int v = 0; v < g.n(); ++v)
        if (id[v] >= 0) res.witness.colours[v] = st.best_colours[pos[id[v]]];
    return res;
}

McEstimate mc_p_ell(double a, int ell, long long samples, std::uint64_t seed) {
    if (ell < 2) throw param_error("mc_p_ell requires ell >= 2");
    if (samples < 1000) throw param_error("mc_p_ell requires samples >= 1000");
    const double b = std::sqrt(std::max(0.0, 1.0 - a * a));

    const int shards = 8;
    std::vector<long long> hits(shards, 0);
    std::vector<std::thread> pool;
    for (int sh = 0; sh < shards; ++sh) {
        pool.emplace_back([&, sh] {
            const long long lo = samples * sh / shards, hi = samples * (sh + 1) / shards;
            Rng rng(split_seed(seed, sh));
            long long local = 0;
            std::vector<double> xs(ell), ys(ell);
            for (long long t = lo; t < hi; ++t) {
                for (int i = 0; i < ell; ++i) xs[i] = rng.next_gaussian();
                for (int i = 0; i < ell; ++i) ys[i] = rng.next_gaussian();
                const double w1 = a * xs[0] + b * ys[0];
                bool ok = true;
                for (int i = 1; i < ell && ok; ++i)
                    ok = xs[0] >= xs[i] && w1 >= a * xs[i] + b * ys[i];
                if (ok) ++local;
            }
            hits[sh] = local;
        });
    }
    for (auto& th : pool) th.join();
    long long total = 0;
    for (long long h : hits) total += h;

    McEstimate est;
    est.samples = samples;
    est.value = static_cast<double>(total) / samples;
    est.stderr_ = std::sqrt(std::max(est.value * (1.0 - est.value), 1e-12) / samples);
    return est;
}

double exact_expected_round(const Graph& g, const GramSolution& sol, int ell,
                            const OracleBudget& budget) {
    if (sol.n() != g.n()) throw param_error("solution size does not match graph");
    if (g.m() == 0) throw param_error("undefined on empty edge set");
    double acc = 0.0;
    int edge_idx = 0;
    for (const auto& e : g.edges()) {
        ++edge_idx;
        if (e.is_loop()) continue;
        double a = 0.0;
        for (int d = 0; d < sol.rank; ++d) a += sol.vectors[e.u - 1][d] * sol.vectors[e.v - 1][d];
        a = std::clamp(a, -1.0, 1.0);
        const McEstimate p = mc_p_ell(a, ell, budget.mc_samples, split_seed(budget.seed, edge_idx));
        acc += e.mult * std::clamp(1.0 - ell * p.value, 0.0, 1.0);
    }
    return acc / g.m();
}

} // namespace pcol
