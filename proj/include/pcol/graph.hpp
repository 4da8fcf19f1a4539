#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcol/rational.hpp"

namespace pcol {

// Finite multigraph with loops. Vertices are 1..n; parallel edges are stored
// once with a multiplicity. Immutable after construction.
struct GraphEdge {
    int u = 0; // u <= v
    int v = 0;
    std::int64_t mult = 1;
    bool is_loop() const { return u == v; }
};

class Graph {
public:
    Graph() = default;
    // Merges duplicates, normalises u <= v, validates ranges.
    Graph(int n, std::vector<GraphEdge> edges);

    int n() const { return n_; }
    std::int64_t m() const { return m_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }

    std::string to_dimacs() const;

private:
    int n_ = 0;
    std::int64_t m_ = 0;
    std::vector<GraphEdge> edges_;
};

struct Colouring {
    std::vector<int> colours; // colours[i] is the colour of vertex i+1, in 1..palette
    int palette = 0;
};

struct ParseResult {
    Graph graph;
    std::vector<std::string> warnings; // e.g. header edge count disagrees with e-lines
};

// DIMACS-like edge list: "c ..." comments, one "p edge <n> <m>" header,
// "e <u> <v> [<mult>]" lines. The header's m is advisory.
ParseResult parse_graph_ex(std::istream& in);
Graph parse_graph(std::istream& in);
Graph parse_graph(const std::string& text);
Graph load_graph(const std::string& path);

// Fraction of edge multiplicity on properly coloured edges; exact.
// Loops are never proper. Throws on m = 0 or size mismatch.
Rational colouring_value(const Graph& g, const Colouring& c);

} // namespace pcol
