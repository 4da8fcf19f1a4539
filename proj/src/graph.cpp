#include "pcol/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "pcol/errors.hpp"

namespace pcol {

Graph::Graph(int n, std::vector<GraphEdge> edges) : n_(n) {
    if (n < 0) throw param_error("negative vertex count");
    std::map<std::pair<int, int>, std::int64_t> merged;
    for (auto e : edges) {
        if (e.u < 1 || e.u > n_ || e.v < 1 || e.v > n_)
            throw param_error("edge endpoint out of range 1..n");
        if (e.mult < 1) throw param_error("edge multiplicity must be >= 1");
        if (e.u > e.v) std::swap(e.u, e.v);
        merged[{e.u, e.v}] += e.mult;
    }
    edges_.reserve(merged.size());
    for (const auto& [uv, mult] : merged) {
        edges_.push_back({uv.first, uv.second, mult});
        m_ += mult;
    }
}

std::string Graph::to_dimacs() const {
    std::ostringstream os;
    os << "p edge " << n_ << " " << m_ << "\n";
    for (const auto& e : edges_) {
        os << "e " << e.u << " " << e.v;
        if (e.mult != 1) os << " " << e.mult;
        os << "\n";
    }
    return os.str();
}

namespace {

bool parse_int(const std::string& tok, long long& out) {
    if (tok.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stoll(tok, &pos);
    } catch (...) {
        return false;
    }
    return pos == tok.size();
}

} // namespace

ParseResult parse_graph_ex(std::istream& in) {
    ParseResult result;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    long long n = 0, m_declared = 0;
    std::vector<GraphEdge> edges;

    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue; // blank line
        if (tag == "c") continue;
        if (tag == "p") {
            if (have_header) throw parse_error(lineno, "duplicate problem header");
            std::string kind;
            std::string ntok, mtok, extra;
            if (!(ls >> kind >> ntok >> mtok) || kind != "edge")
                throw parse_error(lineno, "expected 'p edge <n> <m>'");
            if (ls >> extra) throw parse_error(lineno, "trailing tokens after header");
            if (!parse_int(ntok, n) || !parse_int(mtok, m_declared) || n < 0 || m_declared < 0)
                throw parse_error(lineno, "malformed header counts");
            have_header = true;
            continue;
        }
        if (tag == "e") {
            if (!have_header) throw parse_error(lineno, "edge line before 'p edge' header");
            std::string utok, vtok, mtok, extra;
            if (!(ls >> utok >> vtok)) throw parse_error(lineno, "expected 'e <u> <v> [<mult>]'");
            long long u, v, mult = 1;
            if (!parse_int(utok, u) || !parse_int(vtok, v))
                throw parse_error(lineno, "malformed vertex index");
            if (ls >> mtok) {
                if (!parse_int(mtok, mult)) throw parse_error(lineno, "malformed multiplicity");
                if (ls >> extra) throw parse_error(lineno, "trailing tokens after edge");
            }
            if (u < 1 || u > n || v < 1 || v > n)
                throw parse_error(lineno, "vertex index out of range 1.." + std::to_string(n));
            if (mult < 1) throw parse_error(lineno, "multiplicity must be positive");
            edges.push_back({static_cast<int>(u), static_cast<int>(v), mult});
            continue;
        }
        throw parse_error(lineno, "unrecognised line tag '" + tag + "'");
    }
    if (!have_header) throw parse_error(lineno, "missing 'p edge' header");

    result.graph = Graph(static_cast<int>(n), std::move(edges));
    if (result.graph.m() != m_declared) {
        result.warnings.push_back("header declares m=" + std::to_string(m_declared) +
                                  " but edge lines total m=" + std::to_string(result.graph.m()));
    }
    return result;
}

Graph parse_graph(std::istream& in) { return parse_graph_ex(in).graph; }

Graph parse_graph(const std::string& text) {
    std::istringstream in(text);
    return parse_graph(in);
}

Graph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw param_error("cannot open graph file: " + path);
    return parse_graph(in);
}

Rational colouring_value(const Graph& g, const Colouring& c) {
    if (static_cast<int>(c.colours.size()) != g.n())
        throw param_error("colouring length does not match vertex count");
    if (g.m() == 0) throw param_error("value undefined on empty edge set (m = 0)");
    for (int col : c.colours)
        if (col < 1 || (c.palette > 0 && col > c.palette))
            throw param_error("colour outside 1..palette");
    std::int64_t proper = 0;
    for (const auto& e : g.edges())
        if (!e.is_loop() && c.colours[e.u - 1] != c.colours[e.v - 1]) proper += e.mult;
    return Rational(proper, g.m());
}

} // namespace pcol
