#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pcol/alpha.hpp"
#include "pcol/errors.hpp"
#include "pcol/gadget.hpp"
#include "pcol/graph.hpp"
#include "pcol/oracle.hpp"
#include "pcol/rounding.hpp"
#include "pcol/sdp.hpp"

using json = nlohmann::ordered_json;

namespace {

// Exit codes per error class.
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;
constexpr int kExitBudget = 4;

struct GlobalOpts {
    std::string format = "json";
    bool deterministic = false;
    std::string out_path;
};

void stamp(json& j, const GlobalOpts& g) {
    j["schema"] = 1;
    if (!g.deterministic) {
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    }
}

void emit(const json& j, const GlobalOpts& g) {
    std::ostream* os = &std::cout;
    std::ofstream f;
    if (!g.out_path.empty()) {
        f.open(g.out_path);
        if (!f) throw pcol::param_error("cannot open output file: " + g.out_path);
        os = &f;
    }
    if (g.format == "json") {
        *os << j.dump(2) << "\n";
    } else {
        // flat key: value lines
        for (auto it = j.begin(); it != j.end(); ++it)
            *os << it.key() << ": " << it.value().dump() << "\n";
    }
}

void emit_text(const std::string& text, const GlobalOpts& g) {
    if (g.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(g.out_path);
        if (!f) throw pcol::param_error("cannot open output file: " + g.out_path);
        f << text;
    }
}

pcol::Graph load_graph_warn(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pcol::param_error("cannot open graph file: " + path);
    pcol::ParseResult res = pcol::parse_graph_ex(in);
    for (const auto& w : res.warnings) std::cerr << "warning: " << path << ": " << w << "\n";
    return res.graph;
}

json value_json(const pcol::Rational& v) {
    return json{{"fraction", v.str()}, {"float", v.to_double()}};
}

json outcome_json(const pcol::RoundingOutcome& out) {
    json j;
    j["method"] = pcol::method_name(out.method);
    j["seed"] = out.seed;
    j["palette"] = out.colouring.palette;
    j["trials_used"] = out.trials_used;
    j["achieved_value"] = value_json(out.achieved_value);
    j["colours"] = out.colouring.colours;
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SDP-based maximum k- vs l-colouring toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--format", g.format, "json|text output")->check(CLI::IsMember({"json", "text", "csv"}));
    app.add_flag("--deterministic", g.deterministic, "suppress the timestamp field");
    app.add_option("--out", g.out_path, "write the report to a file instead of stdout");

    // ---- solve ----
    auto* solve = app.add_subcommand("solve", "solve the relaxation and round to an l-colouring");
    std::string graph_path, method = "fj", save_sol;
    int k = 3, ell = 3;
    double epsilon = 0.01;
    std::uint64_t seed = 1;
    long long trials = 1;
    solve->add_option("--graph", graph_path, "input graph file")->required();
    solve->add_option("--k", k, "promised palette size")->required();
    solve->add_option("--l", ell, "output palette size")->required();
    solve->add_option("--epsilon", epsilon, "additive accuracy");
    solve->add_option("--method", method)->check(CLI::IsMember({"fj", "kms", "derand"}));
    solve->add_option("--trials", trials, "rounding trials, best kept");
    solve->add_option("--seed", seed, "master seed");
    solve->add_option("--save-sol", save_sol, "also write the Gram solution to this file");

    // ---- round ----
    auto* round = app.add_subcommand("round", "round a saved Gram solution");
    std::string sol_path;
    round->add_option("--graph", graph_path, "input graph file")->required();
    round->add_option("--sol", sol_path, "Gram solution JSON")->required();
    round->add_option("--l", ell, "output palette size")->required();
    round->add_option("--epsilon", epsilon, "accuracy for derand");
    round->add_option("--method", method)->check(CLI::IsMember({"fj", "kms", "derand"}));
    round->add_option("--trials", trials);
    round->add_option("--seed", seed);

    // ---- alpha ----
    auto* alpha = app.add_subcommand("alpha", "approximation constants for (k, l)");
    alpha->add_option("--k", k)->required();
    alpha->add_option("--l", ell)->required();

    // ---- table ----
    auto* table = app.add_subcommand("table", "table of alpha constants");
    int k_min = 3, k_max = 15, l_min = 3, l_max = 15, jobs = 0;
    table->add_option("--k-min", k_min);
    table->add_option("--k-max", k_max);
    table->add_option("--l-min", l_min);
    table->add_option("--l-max", l_max);
    table->add_option("--jobs", jobs, "worker threads (0 = all cores)");

    // ---- oracle ----
    auto* oracle = app.add_subcommand("oracle", "exact maximum colouring value");
    int budget_vertices = 12;
    oracle->add_option("--graph", graph_path)->required();
    oracle->add_option("--k", k)->required();
    oracle->add_option("--budget", budget_vertices, "vertex budget for enumeration");

    // ---- gadget ----
    auto* gadget = app.add_subcommand("gadget", "scale a graph to target value p/q");
    int gp = 1, gq = 2;
    gadget->add_option("--graph", graph_path)->required();
    gadget->add_option("--p", gp)->required();
    gadget->add_option("--q", gq)->required();

    // ---- pcp ----
    auto* pcp = app.add_subcommand("pcp", "long-code graph of a label cover instance");
    std::string lc_path, op_path, solution_str;
    int r_blow = 1;
    pcp->add_option("--lc", lc_path, "label cover file")->required();
    pcp->add_option("--k", k)->required();
    pcp->add_option("--rblow", r_blow, "tensor power (= instance domain size)");
    pcp->add_option("--operator", op_path, "Markov operator file (default Bonami-Beckner for p=1)");
    pcp->add_option("--solution", solution_str, "labels for V_A then V_B; reports completeness");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve || *round) {
            if (k < 2 || ell < 2 || (*solve && ell < k))
                throw pcol::param_error("need 2 <= k <= l");
            if (epsilon <= 0) throw pcol::param_error("epsilon must be positive");
            const pcol::Graph graph = load_graph_warn(graph_path);
            pcol::GramSolution sol;
            if (*solve) {
                pcol::SolverOptions opts;
                opts.seed = seed;
                opts.target_eps = std::min(1e-4, epsilon);
                sol = pcol::solve_relaxation(graph, k, opts);
                if (!save_sol.empty()) {
                    std::ofstream f(save_sol);
                    if (!f) throw pcol::param_error("cannot open " + save_sol);
                    f << pcol::gram_to_json(sol) << "\n";
                }
            } else {
                std::ifstream f(sol_path);
                if (!f) throw pcol::param_error("cannot open " + sol_path);
                std::stringstream buf;
                buf << f.rdbuf();
                sol = pcol::gram_from_json(buf.str());
            }
            const pcol::RoundMethod m = pcol::method_from_name(method);
            pcol::RoundingOutcome out =
                m == pcol::RoundMethod::derand
                    ? pcol::derand_round(graph, sol, ell, epsilon)
                    : pcol::best_of(graph, sol, ell, m, trials, seed);
            json j;
            stamp(j, g);
            j["graph"] = graph_path;
            j["n"] = graph.n();
            j["m"] = graph.m();
            j["k"] = sol.k;
            j["l"] = ell;
            j["sdp_objective"] = sol.objective;
            j["feas_tol"] = sol.feas_tol;
            const pcol::AlphaEstimate a = pcol::alpha_kl(sol.k, ell);
            j["alpha_kl"] = a.value;
            j["alpha_error_bound"] = a.abs_error_bound;
            j["predicted_floor"] = a.value * sol.objective - epsilon;
            j["epsilon"] = epsilon;
            j["rounding"] = outcome_json(out);
            emit(j, g);
        } else if (*alpha) {
            if (k < 2 || ell < k)
                throw pcol::param_error("need 2 <= k <= l");
            json j;
            stamp(j, g);
            j["k"] = k;
            j["l"] = ell;
            const pcol::AlphaEstimate a = pcol::alpha_kl(k, ell);
            j["alpha_kl"] = {{"value", a.value},
                             {"error_bound", a.abs_error_bound},
                             {"a_star", a.a_star}};
            double better = a.value;
            if (k > 2) {
                const pcol::AlphaPrimeResult ap = pcol::alpha_prime_kl(k, ell);
                j["alpha_prime_kl"] = {{"value", ap.estimate.value},
                                       {"a_star", ap.estimate.a_star},
                                       {"t", ap.constants.t},
                                       {"x_k", ap.constants.x_k},
                                       {"u_k", ap.constants.u_k},
                                       {"closed_form", ap.closed_form},
                                       {"minimizer_at_left", ap.minimizer_at_left}};
                better = std::max(better, ap.estimate.value);
            }
            j["better"] = better;
            emit(j, g);
        } else if (*table) {
            pcol::AlphaTableOptions opts;
            opts.threads = jobs;
            const auto cells = pcol::alpha_table(k_min, k_max, l_min, l_max, opts);
            emit_text(g.format == "csv" ? pcol::alpha_table_csv(cells)
                                        : pcol::alpha_table_text(cells),
                      g);
        } else if (*oracle) {
            const pcol::Graph graph = load_graph_warn(graph_path);
            pcol::OracleBudget budget;
            budget.max_vertices = budget_vertices;
            budget.max_palette = std::max(k, budget.max_palette);
            const pcol::RhoResult res = pcol::exact_rho(graph, k, budget);
            json j;
            stamp(j, g);
            j["graph"] = graph_path;
            j["k"] = k;
            j["rho"] = value_json(res.value);
            j["witness"] = res.witness.colours;
            emit(j, g);
        } else if (*gadget) {
            const pcol::Graph graph = load_graph_warn(graph_path);
            const pcol::Graph out = pcol::scale_gadget(graph, gp, gq);
            emit_text(out.to_dimacs(), g);
        } else if (*pcp) {
            const pcol::LabelCoverInstance inst = pcol::load_label_cover(lc_path);
            pcol::MarkovOperator op;
            if (!op_path.empty()) {
                op = pcol::make_markov_operator(k, inst.p, pcol::load_markov(op_path));
            } else if (inst.p == 1) {
                op = pcol::bonami_beckner(k);
            } else {
                throw pcol::param_error("p=2 instances need --operator (no built-in operator)");
            }
            const pcol::Graph built = pcol::pcp_reduce(inst, k, op, r_blow);
            if (!solution_str.empty()) {
                std::istringstream is(solution_str);
                std::vector<int> solution;
                int x;
                while (is >> x) solution.push_back(x);
                const pcol::Rational cv = pcol::completeness_value(inst, solution, k, built);
                json j;
                stamp(j, g);
                j["lc"] = lc_path;
                j["k"] = k;
                j["n"] = built.n();
                j["m"] = built.m();
                j["completeness_value"] = value_json(cv);
                emit(j, g);
            } else {
                emit_text(built.to_dimacs(), g);
            }
        }
    } catch (const pcol::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const pcol::solver_error& e) {
        std::cerr << "error: " << e.what() << " (best objective "
                  << e.best_iterate.objective << ", max norm dev "
                  << e.feasibility.max_norm_dev << ", max floor violation "
                  << e.feasibility.max_floor_violation << ")\n";
        return kExitSolver;
    } catch (const pcol::budget_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return 0;
}
