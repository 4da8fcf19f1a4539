#include "pcol/gadget.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "pcol/errors.hpp"

namespace pcol {

bool LabelCoverInstance::left_regular() const {
    std::vector<int> deg(n_a, 0);
    for (const auto& e : edges) ++deg[e.a - 1];
    for (int d : deg)
        if (d != deg[0]) return false;
    return true;
}

bool LabelCoverInstance::satisfied(const Edge& e, int la, int lb) const {
    // constraint(y) = ceil(perm(y)/p)
    return (e.perm[lb - 1] + p - 1) / p == la;
}

namespace {

bool read_int(std::istringstream& ls, long long& out) {
    std::string tok;
    if (!(ls >> tok)) return false;
    std::size_t pos = 0;
    try {
        out = std::stoll(tok, &pos);
    } catch (...) {
        return false;
    }
    return pos == tok.size();
}

Rational parse_fraction(const std::string& tok, int lineno) {
    const auto slash = tok.find('/');
    try {
        if (slash == std::string::npos) return Rational(std::stoll(tok), 1);
        return Rational(std::stoll(tok.substr(0, slash)), std::stoll(tok.substr(slash + 1)));
    } catch (...) {
        throw parse_error(lineno, "malformed fraction '" + tok + "'");
    }
}

} // namespace

LabelCoverInstance parse_label_cover(std::istream& in) {
    LabelCoverInstance I;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "c") continue;
        if (tag == "lc") {
            if (have_header) throw parse_error(lineno, "duplicate header");
            long long na, nb, p, r;
            if (!read_int(ls, na) || !read_int(ls, nb) || !read_int(ls, p) || !read_int(ls, r))
                throw parse_error(lineno, "expected 'lc <|V_A|> <|V_B|> <p> <r>'");
            if (na < 1 || nb < 1 || (p != 1 && p != 2) || r < 1)
                throw parse_error(lineno, "bad label cover header values");
            I.n_a = static_cast<int>(na);
            I.n_b = static_cast<int>(nb);
            I.p = static_cast<int>(p);
            I.r = static_cast<int>(r);
            have_header = true;
            continue;
        }
        if (tag == "pi") {
            if (!have_header) throw parse_error(lineno, "'pi' line before 'lc' header");
            long long a, b;
            if (!read_int(ls, a) || !read_int(ls, b))
                throw parse_error(lineno, "expected 'pi <a> <b> <permutation>'");
            if (a < 1 || a > I.n_a || b < 1 || b > I.n_b)
                throw parse_error(lineno, "label cover vertex out of range");
            LabelCoverInstance::Edge e;
            e.a = static_cast<int>(a);
            e.b = static_cast<int>(b);
            const int pr = I.p * I.r;
            long long x;
            while (read_int(ls, x)) e.perm.push_back(static_cast<int>(x));
            if (static_cast<int>(e.perm.size()) != pr)
                throw parse_error(lineno, "permutation must list exactly p*r integers");
            std::vector<bool> seen(pr, false);
            for (int v : e.perm) {
                if (v < 1 || v > pr || seen[v - 1])
                    throw parse_error(lineno, "not a permutation of 1..p*r");
                seen[v - 1] = true;
            }
            I.edges.push_back(std::move(e));
            continue;
        }
        throw parse_error(lineno, "unrecognised line tag '" + tag + "'");
    }
    if (!have_header) throw parse_error(lineno, "missing 'lc' header");
    return I;
}

LabelCoverInstance parse_label_cover(const std::string& text) {
    std::istringstream in(text);
    return parse_label_cover(in);
}

LabelCoverInstance load_label_cover(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw param_error("cannot open label cover file: " + path);
    return parse_label_cover(in);
}

std::string label_cover_to_text(const LabelCoverInstance& I) {
    std::ostringstream os;
    os << "lc " << I.n_a << " " << I.n_b << " " << I.p << " " << I.r << "\n";
    for (const auto& e : I.edges) {
        os << "pi " << e.a << " " << e.b;
        for (int v : e.perm) os << " " << v;
        os << "\n";
    }
    return os.str();
}

RawMarkov parse_markov(std::istream& in) {
    RawMarkov raw;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    int rows_seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok == "c") continue;
        if (tok == "mo") {
            if (have_header) throw parse_error(lineno, "duplicate header");
            long long d;
            std::string ltok;
            if (!read_int(ls, d) || !(ls >> ltok))
                throw parse_error(lineno, "expected 'mo <D> <L>'");
            if (d < 1) throw parse_error(lineno, "bad dimension");
            raw.D = static_cast<int>(d);
            raw.grain = parse_fraction(ltok, lineno);
            raw.t.reserve(raw.D);
            have_header = true;
            continue;
        }
        if (!have_header) throw parse_error(lineno, "matrix row before 'mo' header");
        std::vector<Rational> row;
        row.push_back(parse_fraction(tok, lineno));
        std::string more;
        while (ls >> more) row.push_back(parse_fraction(more, lineno));
        if (static_cast<int>(row.size()) != raw.D)
            throw parse_error(lineno, "row must list exactly D entries");
        raw.t.push_back(std::move(row));
        ++rows_seen;
    }
    if (!have_header) throw parse_error(lineno, "missing 'mo' header");
    if (rows_seen != raw.D) throw parse_error(lineno, "expected D matrix rows");
    return raw;
}

RawMarkov load_markov(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw param_error("cannot open operator file: " + path);
    return parse_markov(in);
}

std::string markov_to_text(const RawMarkov& raw) {
    std::ostringstream os;
    os << "mo " << raw.D << " " << raw.grain.num << "/" << raw.grain.den << "\n";
    for (const auto& row : raw.t) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? " " : "") << row[i].num << "/" << row[i].den;
        os << "\n";
    }
    return os.str();
}

namespace {

// 1-based colour digits of tuple index x in [D] = [k]^p, least significant first.
std::vector<int> tuple_digits(int x, int k, int p) {
    std::vector<int> d(p);
    int v = x;
    for (int i = 0; i < p; ++i) {
        d[i] = v % k + 1;
        v /= k;
    }
    return d;
}

bool tuples_disjoint(const std::vector<int>& a, const std::vector<int>& b) {
    for (int x : a)
        for (int y : b)
            if (x == y) return false;
    return true;
}

} // namespace

MarkovOperator make_markov_operator(int k, int p, const RawMarkov& raw) {
    if (k < 2) throw param_error("operator needs k >= 2");
    if (p != 1 && p != 2) throw param_error("p must be 1 or 2");
    long long d_expect = 1;
    for (int i = 0; i < p; ++i) d_expect *= k;
    if (raw.D != d_expect) throw param_error("operator dimension is not k^p");
    if (!(raw.grain > Rational(0))) throw param_error("grain must be positive");

    MarkovOperator op;
    op.k = k;
    op.p = p;
    op.D = raw.D;
    op.grain = raw.grain;
    op.t = raw.t;

    for (int i = 0; i < op.D; ++i) {
        Rational row_sum(0);
        for (int j = 0; j < op.D; ++j) {
            const Rational& e = op.t[i][j];
            if (e < Rational(0)) throw param_error("operator entry negative");
            if (!(e == op.t[j][i])) throw param_error("operator not symmetric");
            // entry / grain must be an integer
            const long long num = e.num * op.grain.den;
            const long long den = e.den * op.grain.num;
            if (num % den != 0) throw param_error("operator entry not a multiple of the grain");
            row_sum = row_sum + e;
        }
        if (!(row_sum == Rational(1))) throw param_error("operator row does not sum to 1");
    }

    std::vector<std::vector<int>> digits(op.D);
    for (int x = 0; x < op.D; ++x) digits[x] = tuple_digits(x, k, p);
    op.colourful = true;
    for (int x = 0; x < op.D; ++x)
        for (int y = 0; y < op.D; ++y)
            if (op.t[x][y] > Rational(0) && !tuples_disjoint(digits[x], digits[y]))
                throw param_error("operator is not colourful");

    Eigen::MatrixXd m(op.D, op.D);
    for (int i = 0; i < op.D; ++i)
        for (int j = 0; j < op.D; ++j) m(i, j) = op.t[i][j].to_double();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    std::vector<double> abs_ev(op.D);
    for (int i = 0; i < op.D; ++i) abs_ev[i] = std::fabs(es.eigenvalues()[i]);
    std::sort(abs_ev.rbegin(), abs_ev.rend());
    op.spectral_radius = op.D > 1 ? abs_ev[1] : 0.0;
    return op;
}

MarkovOperator bonami_beckner(int k) {
    if (k < 2) throw param_error("bonami_beckner needs k >= 2");
    RawMarkov raw;
    raw.D = k;
    raw.grain = Rational(1, k - 1);
    raw.t.assign(k, std::vector<Rational>(k, Rational(1, k - 1)));
    for (int i = 0; i < k; ++i) raw.t[i][i] = Rational(0);
    return make_markov_operator(k, 1, raw);
}

Graph scale_gadget(const Graph& g, int p, int q) {
    if (p < 1 || p > q) throw param_error("scale_gadget requires 1 <= p <= q");
    if (std::gcd(p, q) != 1) throw param_error("p/q must be in lowest terms");
    if (g.m() < 1) throw param_error("scale_gadget requires m >= 1");
    const long long pads = static_cast<long long>(q - p) * g.m();
    const long long n_out = static_cast<long long>(p) * g.n() + pads;
    if (n_out > 2000000) throw budget_error("gadget would have too many vertices");

    std::vector<GraphEdge> edges;
    for (int copy = 0; copy < p; ++copy) {
        const int off = copy * g.n();
        for (const auto& e : g.edges()) edges.push_back({e.u + off, e.v + off, e.mult});
    }
    for (long long i = 0; i < pads; ++i) {
        const int v = static_cast<int>(p * g.n() + i + 1);
        edges.push_back({v, v, 1});
    }
    return Graph(static_cast<int>(n_out), std::move(edges));
}

int pcp_vertex(const LabelCoverInstance& I, int k, int b, const std::vector<int>& x) {
    const int pr = I.p * I.r;
    if (static_cast<int>(x.size()) != pr) throw param_error("tuple length must be p*r");
    long long kpow = 1, enc = 0;
    for (int t = 0; t < pr; ++t) {
        if (x[t] < 1 || x[t] > k) throw param_error("tuple entry outside 1..k");
        enc += static_cast<long long>(x[t] - 1) * kpow;
        kpow *= k;
    }
    return static_cast<int>(static_cast<long long>(b - 1) * kpow + enc + 1);
}

Graph pcp_reduce(const LabelCoverInstance& I, int k, const MarkovOperator& T, int r_blow,
                 long long vertex_budget) {
    if (r_blow != I.r)
        throw param_error("tensor power must equal the instance domain size r");
    if (T.k != k || T.p != I.p) throw param_error("operator domain does not match (k, p)");
    if (I.edges.empty()) throw param_error("label cover has no edges");

    const int pr = I.p * I.r;
    long long kpr = 1;
    for (int t = 0; t < pr; ++t) {
        kpr *= k;
        if (kpr * I.n_b > vertex_budget)
            throw budget_error("pcp graph would exceed the vertex budget");
    }
    const long long n_vertices = kpr * I.n_b;

    // integer entries of T in units of the grain
    std::vector<std::vector<long long>> units(T.D, std::vector<long long>(T.D));
    for (int x = 0; x < T.D; ++x)
        for (int y = 0; y < T.D; ++y) {
            const Rational& e = T.t[x][y];
            const long long num = e.num * T.grain.den;
            const long long den = e.den * T.grain.num;
            if (num % den != 0) throw param_error("operator entry not a multiple of the grain");
            units[x][y] = num / den;
        }

    std::vector<std::vector<const std::vector<int>*>> incident(I.n_a);
    std::vector<std::vector<int>> inc_b(I.n_a);
    for (const auto& e : I.edges) {
        incident[e.a - 1].push_back(&e.perm);
        inc_b[e.a - 1].push_back(e.b);
    }

    // enumerate all tuples once
    std::vector<std::vector<int>> tuples(kpr);
    for (long long idx = 0; idx < kpr; ++idx) {
        std::vector<int> x(pr);
        long long v = idx;
        for (int t = 0; t < pr; ++t) {
            x[t] = static_cast<int>(v % k) + 1;
            v /= k;
        }
        tuples[idx] = std::move(x);
    }
    // block index in [k^p] of positions [p*t .. p*t+p-1], least significant first
    auto block_of = [&](const std::vector<int>& x, int t) {
        int idx = 0, kpow = 1;
        for (int i = 0; i < I.p; ++i) {
            idx += (x[I.p * t + i] - 1) * kpow;
            kpow *= k;
        }
        return idx;
    };
    auto permuted = [&](const std::vector<int>& x, const std::vector<int>& perm) {
        std::vector<int> y(pr);
        for (int t = 0; t < pr; ++t) y[t] = x[perm[t] - 1];
        return y;
    };

    std::map<std::pair<int, int>, std::int64_t> acc;
    for (int a = 0; a < I.n_a; ++a) {
        const auto& inc = incident[a];
        for (std::size_t e1 = 0; e1 < inc.size(); ++e1)
            for (std::size_t e2 = 0; e2 < inc.size(); ++e2)
                for (long long xi = 0; xi < kpr; ++xi) {
                    const auto& x = tuples[xi];
                    const int uvtx = pcp_vertex(I, k, inc_b[a][e1], permuted(x, *inc[e1]));
                    for (long long yi = 0; yi < kpr; ++yi) {
                        const auto& y = tuples[yi];
                        long long mult = 1;
                        for (int t = 0; t < I.r && mult > 0; ++t)
                            mult *= units[block_of(x, t)][block_of(y, t)];
                        if (mult == 0) continue;
                        int u = uvtx;
                        int v = pcp_vertex(I, k, inc_b[a][e2], permuted(y, *inc[e2]));
                        if (u > v) std::swap(u, v);
                        acc[{u, v}] += mult;
                    }
                }
    }

    std::vector<GraphEdge> edges;
    edges.reserve(acc.size());
    for (const auto& [uv, mult] : acc) edges.push_back({uv.first, uv.second, mult});
    return Graph(static_cast<int>(n_vertices), std::move(edges));
}

Rational completeness_value(const LabelCoverInstance& I, const std::vector<int>& solution, int k,
                            const Graph& built) {
    if (static_cast<int>(solution.size()) != I.n_a + I.n_b)
        throw param_error("solution must list labels for V_A then V_B");
    const int pr = I.p * I.r;
    for (int a = 0; a < I.n_a; ++a)
        if (solution[a] < 1 || solution[a] > I.r) throw param_error("V_A label out of range");
    for (int b = 0; b < I.n_b; ++b)
        if (solution[I.n_a + b] < 1 || solution[I.n_a + b] > pr)
            throw param_error("V_B label out of range");

    long long kpr = 1;
    for (int t = 0; t < pr; ++t) kpr *= k;
    if (built.n() != kpr * I.n_b) throw param_error("built graph does not match the instance");

    Colouring col;
    col.palette = k;
    col.colours.resize(built.n());
    for (int b = 0; b < I.n_b; ++b) {
        const int coord = solution[I.n_a + b]; // f_v(x) = x_{c(b)}
        for (long long xi = 0; xi < kpr; ++xi) {
            long long v = xi, digit = 0;
            for (int t = 0; t < coord; ++t) {
                digit = v % k;
                v /= k;
            }
            col.colours[b * kpr + xi] = static_cast<int>(digit) + 1;
        }
    }
    return colouring_value(built, col);
}

} // namespace pcol
