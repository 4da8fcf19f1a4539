#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pcol/graph.hpp"
#include "pcol/rational.hpp"

namespace pcol {

// Bipartite label cover with p-to-1 constraints. Each edge carries the
// permutation part of its constraint; the projection itself is the fixed
// p-to-1 collapse sigma(x) = ceil(x/p), so constraint(y) = sigma(perm(y)).
struct LabelCoverInstance {
    int n_a = 0;
    int n_b = 0;
    int p = 1;
    int r = 1;
    struct Edge {
        int a = 0;                // 1..n_a
        int b = 0;                // 1..n_b
        std::vector<int> perm;    // permutation of 1..p*r
    };
    std::vector<Edge> edges;

    bool left_regular() const;
    // Does assignment (a -> la in [r], b -> lb in [p r]) satisfy edge e?
    bool satisfied(const Edge& e, int la, int lb) const;
};

LabelCoverInstance parse_label_cover(std::istream& in);
LabelCoverInstance parse_label_cover(const std::string& text);
LabelCoverInstance load_label_cover(const std::string& path);
std::string label_cover_to_text(const LabelCoverInstance& I);

// Symmetric stochastic matrix on colour tuples [k^p] whose every entry is an
// integer multiple of the grain and whose transitions only connect tuples
// with disjoint colour sets. All properties are verified on construction.
struct MarkovOperator {
    int k = 0;
    int p = 1;
    int D = 0; // k^p
    Rational grain{1, 1};
    std::vector<std::vector<Rational>> t;
    double spectral_radius = 0.0; // second-largest |eigenvalue|
    bool colourful = false;
};

struct RawMarkov {
    int D = 0;
    Rational grain{1, 1};
    std::vector<std::vector<Rational>> t;
};

RawMarkov parse_markov(std::istream& in);
RawMarkov load_markov(const std::string& path);
std::string markov_to_text(const RawMarkov& raw);

// Validates symmetry, stochasticity, grain divisibility and colourfulness;
// throws param_error on any violation.
MarkovOperator make_markov_operator(int k, int p, const RawMarkov& raw);

// Zero diagonal, off-diagonal 1/(k-1); grain 1/(k-1).
MarkovOperator bonami_beckner(int k);

// Takes G to p disjoint copies of G plus (q-p)*m single looped vertices,
// so a value-rho colouring scales to value rho * p/q on q*m edges.
Graph scale_gadget(const Graph& g, int p, int q);

// Long-code graph of the label cover instance: a vertex v_b(x) for every
// b and x in [k]^(p*r), and for every edge pair (a,b), (a,b') and every x, y
// an edge between v_b(x^perm_ab) and v_b'(y^perm_ab') of multiplicity
// T_tensor(x,y)/grain^r (an integer by the grain property). Ordered pairs,
// including b = b'. Requires r_blow == I.r (the tensor power is the domain
// size).
Graph pcp_reduce(const LabelCoverInstance& I, int k, const MarkovOperator& T, int r_blow,
                 long long vertex_budget = 100000);

// Vertex index of v_b(x) in the reduced graph; x is 1-based digits, length p*r.
int pcp_vertex(const LabelCoverInstance& I, int k, int b, const std::vector<int>& x);

// Value of the colouring induced by a label-cover solution: vertex v_b(x)
// gets colour x[c(b)]. `solution` lists labels for V_A then V_B.
Rational completeness_value(const LabelCoverInstance& I, const std::vector<int>& solution, int k,
                            const Graph& built);

} // namespace pcol
