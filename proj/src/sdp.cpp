#include "pcol/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pcol/errors.hpp"
#include "pcol/rng.hpp"

namespace pcol {

std::vector<std::vector<double>> simplex_vectors(int k, int n) {
    if (k < 2) throw param_error("simplex_vectors requires k >= 2");
    if (n < k) throw param_error("simplex_vectors requires n >= k");
    const double scale = 1.0 / std::sqrt(static_cast<double>(k) * (k - 1));
    std::vector<std::vector<double>> vecs(k, std::vector<double>(n, 0.0));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) vecs[i][j] = scale;
        vecs[i][i] = scale * (1.0 - k);
    }
    return vecs;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void normalize_rows(std::vector<std::vector<double>>& a) {
    for (auto& row : a) {
        const double nrm = std::sqrt(dot(row, row));
        if (nrm > 0) for (double& x : row) x /= nrm;
    }
}

struct Objective {
    const Graph* g;
    int k;
    double w;     // (k-1)/k
    double floor_; // -1/(k-1)

    double objective(const std::vector<std::vector<double>>& a) const {
        double s = 0.0;
        for (const auto& e : g->edges())
            if (!e.is_loop()) s += e.mult * (1.0 - dot(a[e.u - 1], a[e.v - 1]));
        return w * s / g->m();
    }

    double penalty(const std::vector<std::vector<double>>& a) const {
        double s = 0.0;
        const int n = static_cast<int>(a.size());
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double v = floor_ - dot(a[i], a[j]);
                if (v > 0) s += v * v;
            }
        return s;
    }

    // Euclidean gradient of objective - lambda * penalty.
    void gradient(const std::vector<std::vector<double>>& a, double lambda,
                  std::vector<std::vector<double>>& grad) const {
        const int n = static_cast<int>(a.size());
        const std::size_t r = a.empty() ? 0 : a[0].size();
        for (auto& row : grad) std::fill(row.begin(), row.end(), 0.0);
        const double c = -w / g->m();
        for (const auto& e : g->edges()) {
            if (e.is_loop()) continue;
            const int u = e.u - 1, v = e.v - 1;
            for (std::size_t d = 0; d < r; ++d) {
                grad[u][d] += c * e.mult * a[v][d];
                grad[v][d] += c * e.mult * a[u][d];
            }
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double viol = floor_ - dot(a[i], a[j]);
                if (viol > 0) {
                    const double f = 2.0 * lambda * viol;
                    for (std::size_t d = 0; d < r; ++d) {
                        grad[i][d] += f * a[j][d];
                        grad[j][d] += f * a[i][d];
                    }
                }
            }
    }
};

// Project out radial components and return the squared tangent norm.
double project_tangent(const std::vector<std::vector<double>>& a,
                       std::vector<std::vector<double>>& grad) {
    double norm2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double radial = dot(grad[i], a[i]);
        for (std::size_t d = 0; d < a[i].size(); ++d) {
            grad[i][d] -= radial * a[i][d];
            norm2 += grad[i][d] * grad[i][d];
        }
    }
    return norm2;
}

FeasReport feasibility_of(const std::vector<std::vector<double>>& a, int k,
                          std::uint64_t audit_seed) {
    FeasReport rep;
    const int n = static_cast<int>(a.size());
    const double floor_ = -1.0 / (k - 1);
    for (int i = 0; i < n; ++i)
        rep.max_norm_dev = std::max(rep.max_norm_dev, std::fabs(std::sqrt(dot(a[i], a[i])) - 1.0));
    if (n <= 128) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                rep.max_floor_violation =
                    std::max(rep.max_floor_violation, floor_ - dot(a[i], a[j]));
    } else {
        Rng rng(audit_seed);
        for (int t = 0; t < 64 * n; ++t) {
            const int i = static_cast<int>(rng.next_below(n));
            const int j = static_cast<int>(rng.next_below(n));
            if (i == j) continue;
            rep.max_floor_violation = std::max(rep.max_floor_violation, floor_ - dot(a[i], a[j]));
        }
    }
    rep.max_floor_violation = std::max(0.0, rep.max_floor_violation);
    return rep;
}

} // namespace

double relaxation_objective(const Graph& g, const GramSolution& sol) {
    if (sol.n() != g.n()) throw param_error("solution size does not match graph");
    if (g.m() == 0) throw param_error("relaxation undefined on empty edge set");
    Objective obj{&g, sol.k, (sol.k - 1.0) / sol.k, -1.0 / (sol.k - 1)};
    return obj.objective(sol.vectors);
}

GramSolution embed_colouring(const Graph& g, const Colouring& c, int k, int rank) {
    if (static_cast<int>(c.colours.size()) != g.n()) throw param_error("colouring size mismatch");
    auto frame = simplex_vectors(k, rank);
    GramSolution sol;
    sol.rank = rank;
    sol.k = k;
    sol.feas_tol = 1e-12;
    sol.vectors.reserve(g.n());
    for (int col : c.colours) {
        if (col < 1 || col > k) throw param_error("colour outside 1..k");
        sol.vectors.push_back(frame[col - 1]);
    }
    sol.objective = relaxation_objective(g, sol);
    return sol;
}

namespace {

// Sequential greedy colouring (most-constrained vertex first) used to warm
// start one restart; edges stay on the constraint floor under the embedding.
Colouring greedy_colouring(const Graph& g, int k) {
    const int n = g.n();
    std::vector<std::vector<std::pair<int, std::int64_t>>> adj(n);
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue;
        adj[e.u - 1].push_back({e.v - 1, e.mult});
        adj[e.v - 1].push_back({e.u - 1, e.mult});
    }
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        if (adj[x].size() != adj[y].size()) return adj[x].size() > adj[y].size();
        return x < y;
    });
    Colouring c;
    c.palette = k;
    c.colours.assign(n, 0);
    for (int v : order) {
        std::vector<std::int64_t> cost(k, 0);
        for (auto [u, mult] : adj[v])
            if (c.colours[u] > 0) cost[c.colours[u] - 1] += mult;
        int best = 0;
        for (int col = 1; col < k; ++col)
            if (cost[col] < cost[best]) best = col;
        c.colours[v] = best + 1;
    }
    return c;
}

} // namespace

GramSolution solve_relaxation(const Graph& g, int k, const SolverOptions& opts) {
    if (k < 2) throw param_error("solve_relaxation requires k >= 2");
    if (g.m() < 1) throw param_error("solve_relaxation requires m >= 1");
    if (opts.target_eps <= 0 || opts.restarts < 1) throw param_error("bad solver options");

    const int n = g.n();
    const int rank =
        std::min(n, std::max(static_cast<int>(std::ceil(std::sqrt(2.0 * n))) + 2, k + 1));
    Objective obj{&g, k, (k - 1.0) / k, -1.0 / (k - 1)};

    GramSolution best;
    bool have_best = false;
    GramSolution best_any; // best iterate even if infeasible, for error reporting
    double best_any_score = -std::numeric_limits<double>::infinity();
    FeasReport best_any_rep;

    const int stage_iters = std::max(1, opts.max_iters / std::max(1, opts.penalty_stages));

    for (int restart = 0; restart < opts.restarts; ++restart) {
        std::vector<std::vector<double>> a(n, std::vector<double>(rank, 0.0));
        if (restart == 0 && rank >= k) {
            auto frame = simplex_vectors(k, rank);
            const Colouring c = greedy_colouring(g, k);
            for (int i = 0; i < n; ++i) a[i] = frame[c.colours[i] - 1];
        } else {
            Rng rng(split_seed(opts.seed, restart));
            for (auto& row : a)
                for (double& x : row) x = rng.next_gaussian();
            normalize_rows(a);
        }

        std::vector<std::vector<double>> grad(n, std::vector<double>(rank, 0.0));
        std::vector<std::vector<double>> trial(n, std::vector<double>(rank, 0.0));
        double lambda = opts.penalty_init;
        double eta = 0.25;
        for (int stage = 0; stage < opts.penalty_stages; ++stage) {
            double merit = obj.objective(a) - lambda * obj.penalty(a);
            for (int it = 0; it < stage_iters; ++it) {
                obj.gradient(a, lambda, grad);
                const double gnorm2 = project_tangent(a, grad);
                if (gnorm2 < 1e-18 * n) break;
                bool accepted = false;
                for (int bt = 0; bt < 40; ++bt) {
                    for (int i = 0; i < n; ++i)
                        for (int d = 0; d < rank; ++d)
                            trial[i][d] = a[i][d] + eta * grad[i][d];
                    normalize_rows(trial);
                    const double m2 = obj.objective(trial) - lambda * obj.penalty(trial);
                    if (m2 > merit + 1e-14) {
                        a.swap(trial);
                        merit = m2;
                        eta = std::min(eta * 1.25, 4.0);
                        accepted = true;
                        break;
                    }
                    eta *= 0.5;
                    if (eta < 1e-14) break;
                }
                if (!accepted) break; // stationary at this penalty level
            }
            lambda *= opts.penalty_growth;
            eta = std::max(eta, 1e-6);
        }

        const FeasReport rep = feasibility_of(a, k, split_seed(opts.seed, 1000 + restart));
        GramSolution cand;
        cand.rank = rank;
        cand.k = k;
        cand.feas_tol = std::max({rep.max_norm_dev, rep.max_floor_violation, 1e-15});
        cand.vectors = a;
        cand.objective = obj.objective(a);

        const double score = cand.objective - (rep.within(opts.feas_tol) ? 0.0 : 1e3);
        if (score > best_any_score) {
            best_any_score = score;
            best_any = cand;
            best_any_rep = rep;
        }
        if (rep.within(opts.feas_tol) && (!have_best || cand.objective > best.objective)) {
            best = cand;
            have_best = true;
        }
    }

    if (!have_best)
        throw solver_error("relaxation solver found no feasible point within tolerance",
                           best_any, best_any_rep);
    best.feas_tol = std::max(best.feas_tol, opts.feas_tol);
    return best;
}

FeasReport check_feasibility(const GramSolution& sol, std::uint64_t audit_seed) {
    return feasibility_of(sol.vectors, sol.k, audit_seed);
}

std::string gram_to_json(const GramSolution& sol) {
    std::ostringstream os;
    char buf[40];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        os << buf;
    };
    os << "{\"rank\":" << sol.rank << ",\"k\":" << sol.k << ",\"objective\":";
    num(sol.objective);
    os << ",\"feas_tol\":";
    num(sol.feas_tol);
    os << ",\"vectors\":[";
    for (std::size_t i = 0; i < sol.vectors.size(); ++i) {
        os << (i ? ",[" : "[");
        for (std::size_t d = 0; d < sol.vectors[i].size(); ++d) {
            if (d) os << ",";
            num(sol.vectors[i][d]);
        }
        os << "]";
    }
    os << "]}";
    return os.str();
}

GramSolution gram_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    GramSolution sol;
    sol.rank = j.at("rank").get<int>();
    sol.k = j.at("k").get<int>();
    sol.objective = j.at("objective").get<double>();
    sol.feas_tol = j.at("feas_tol").get<double>();
    sol.vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
    for (const auto& row : sol.vectors)
        if (static_cast<int>(row.size()) != sol.rank)
            throw param_error("vector row length does not match rank");
    return sol;
}

} // namespace pcol
