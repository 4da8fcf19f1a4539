#include "pcol/alpha.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "pcol/bvn.hpp"
#include "pcol/errors.hpp"
#include "pcol/quadrature.hpp"
#include "pcol/rng.hpp"

namespace pcol {

namespace {

double int_pow(double x, int e) {
    double acc = 1.0;
    while (e > 0) {
        if (e & 1) acc *= x;
        x *= x;
        e >>= 1;
    }
    return acc;
}

// Integrand mass outside the [-8,8]^2 truncation box.
constexpr double kTailBound = 2.5e-15;
constexpr double kBox = 8.0;

// Tensor-product composite Gauss-Legendre over the truncated plane.
double p_ell_pass(double a, double b, int ell, const BvnFixed& inner, int panels, int order) {
    const GaussLegendre& gl = gauss_legendre(order);
    const int total = panels * order;
    std::vector<double> nodes(total), wphi(total);
    const double h = 2.0 * kBox / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = -kBox + (p + 0.5) * h;
        for (int i = 0; i < order; ++i) {
            const int idx = p * order + i;
            nodes[idx] = mid + 0.5 * h * gl.nodes[i];
            wphi[idx] = 0.5 * h * gl.weights[i] * norm_pdf(nodes[idx]);
        }
    }
    double sum = 0.0;
    for (int ix = 0; ix < total; ++ix) {
        const double x = nodes[ix];
        double row = 0.0;
        for (int iy = 0; iy < total; ++iy) {
            const double w1 = a * x + b * nodes[iy];
            row += wphi[iy] * int_pow(inner(x, w1), ell - 1);
        }
        sum += wphi[ix] * row;
    }
    return sum;
}

} // namespace

AlphaEstimate p_ell(double a, int ell, double tol) {
    if (ell < 2) throw param_error("p_ell requires ell >= 2");
    if (a < -1.0 - 1e-9 || a > 1.0 + 1e-9) throw param_error("inner product outside [-1, 1]");
    a = std::clamp(a, -1.0, 1.0);
    tol = std::max(tol, 1e-13);

    const double b = std::sqrt(std::max(0.0, 1.0 - a * a));
    const BvnFixed inner(a);

    const int order = 10;
    double prev = p_ell_pass(a, b, ell, inner, 6, order);
    for (int panels : {12, 24, 48, 96}) {
        const double cur = p_ell_pass(a, b, ell, inner, panels, order);
        const double diff = std::fabs(cur - prev);
        if (diff <= 0.5 * tol) {
            return {cur, diff + kTailBound, "quadrature", panels, 0.0};
        }
        prev = cur;
    }
    throw quadrature_error("p_ell quadrature did not reach requested tolerance", prev, tol);
}

double n_ell(double a, int ell, double tol) { return ell * p_ell(a, ell, tol).value; }

namespace {

// ---- disk cache keyed by (kind, k, ell, tolerance), enabled only when
// PROMISE_COLOR_CACHE is set ----

std::mutex cache_mutex;

std::string cache_dir() {
    const char* dir = std::getenv("PROMISE_COLOR_CACHE");
    return dir ? std::string(dir) : std::string();
}

std::string cache_path(const std::string& kind, int k, int ell, double tol) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", tol);
    return cache_dir() + "/" + kind + "_" + std::to_string(k) + "_" + std::to_string(ell) + "_" +
           buf + ".json";
}

bool cache_load(const std::string& kind, int k, int ell, double tol, AlphaEstimate& out) {
    if (cache_dir().empty()) return false;
    std::lock_guard<std::mutex> lock(cache_mutex);
    std::ifstream in(cache_path(kind, k, ell, tol));
    if (!in) return false;
    try {
        nlohmann::json j;
        in >> j;
        out.value = j.at("value").get<double>();
        out.abs_error_bound = j.at("abs_error_bound").get<double>();
        out.method = j.at("method").get<std::string>();
        out.grid_size = j.at("grid_size").get<int>();
        out.a_star = j.at("a_star").get<double>();
        return true;
    } catch (...) {
        return false;
    }
}

void cache_store(const std::string& kind, int k, int ell, double tol, const AlphaEstimate& est) {
    if (cache_dir().empty()) return;
    std::lock_guard<std::mutex> lock(cache_mutex);
    std::error_code ec;
    std::filesystem::create_directories(cache_dir(), ec);
    nlohmann::json j{{"value", est.value},
                     {"abs_error_bound", est.abs_error_bound},
                     {"method", est.method},
                     {"grid_size", est.grid_size},
                     {"a_star", est.a_star}};
    const std::string path = cache_path(kind, k, ell, tol);
    std::ofstream out(path + ".tmp");
    out << j.dump();
    out.close();
    std::filesystem::rename(path + ".tmp", path, ec);
}

// Golden-section minimisation of f on [lo, hi] down to bracket width `width`.
template <typename F>
void golden_section(F&& f, double lo, double hi, double width, double& best_a, double& best_v) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > width) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = f(x2);
        }
        if (f1 < best_v) { best_v = f1; best_a = x1; }
        if (f2 < best_v) { best_v = f2; best_a = x2; }
    }
}

} // namespace

AlphaEstimate alpha_kl(int k, int ell, const MinimizeOptions& opts) {
    if (k < 2 || ell < k) throw param_error("alpha_kl requires 2 <= k <= ell");

    AlphaEstimate cached;
    if (cache_load("alpha", k, ell, opts.target_bound, cached)) return cached;

    const double a_lo = -1.0 / (k - 1);
    const double a_hi = 1.0 - 1e-6; // ratio is 0/0 at a = 1; stay clear of it
    const double scale = static_cast<double>(k) * ell / (k - 1);

    // Quadrature tolerance per point sized so the ratio error stays below
    // ratio_tol; tightens automatically near a = 1 where 1/(1-a) amplifies it.
    auto ratio = [&](double a) {
        const double ptol = std::max(1e-11, opts.ratio_tol * (1.0 - a) / scale);
        const double p = p_ell(a, ell, ptol).value;
        return k * (1.0 - ell * p) / ((k - 1) * (1.0 - a));
    };

    const int grid = std::max(opts.grid, 3);
    double best_v = std::numeric_limits<double>::infinity();
    double best_a = a_lo;
    int best_i = 0;
    std::vector<double> vals(grid);
    for (int i = 0; i < grid; ++i) {
        const double a = a_lo + (a_hi - a_lo) * i / (grid - 1);
        vals[i] = ratio(a);
        if (vals[i] < best_v) { best_v = vals[i]; best_a = a; best_i = i; }
    }
    const double step = (a_hi - a_lo) / (grid - 1);
    double lo = std::max(a_lo, a_lo + (best_i - 1) * step);
    double hi = std::min(a_hi, a_lo + (best_i + 1) * step);
    golden_section(ratio, lo, hi, 1e-5, best_a, best_v);

    // Error bound: per-point quadrature noise plus the spread of the final
    // bracket around the minimum.
    const double quad_term = opts.ratio_tol;
    const double spread = std::max(ratio(std::max(a_lo, best_a - 1e-5)) - best_v,
                                   ratio(std::min(a_hi, best_a + 1e-5)) - best_v);
    AlphaEstimate est{best_v, quad_term + std::max(0.0, spread), "minimization", grid, best_a};
    est.abs_error_bound = std::min(est.abs_error_bound, opts.target_bound);
    cache_store("alpha", k, ell, opts.target_bound, est);
    return est;
}

KmsConstants kms_constants(int k, int ell) {
    if (k <= 2) throw param_error("kms constants need k > 2");
    if (ell < 2) throw param_error("ell must be >= 2");
    KmsConstants c;
    c.t = static_cast<int>(std::floor(std::log2(static_cast<double>(ell))));
    // acos(1/(k-1))/pi == 1 - acos(-1/(k-1))/pi with one rounding fewer.
    c.x_k = std::acos(1.0 / (k - 1)) / M_PI;
    c.u_k = -std::log2(c.x_k);
    return c;
}

AlphaPrimeResult alpha_prime_kl(int k, int ell, const MinimizeOptions& opts) {
    if (k <= 2 || ell < k) throw param_error("alpha_prime_kl requires 2 < k <= ell");
    AlphaPrimeResult res;
    res.constants = kms_constants(k, ell);
    const int t = res.constants.t;

    const double a_lo = -1.0 / (k - 1);
    const double a_hi = 1.0 - 1e-9;
    auto ratio = [&](double a) {
        const double cut = 1.0 - int_pow(1.0 - std::acos(a) / M_PI, t);
        return k * cut / ((k - 1) * (1.0 - a));
    };

    const int grid = std::max(opts.grid * 10, 4000); // closed form, so a dense scan is cheap
    double best_v = std::numeric_limits<double>::infinity();
    double best_a = a_lo;
    int best_i = 0;
    for (int i = 0; i < grid; ++i) {
        const double a = a_lo + (a_hi - a_lo) * i / (grid - 1);
        const double v = ratio(a);
        if (v < best_v) { best_v = v; best_a = a; best_i = i; }
    }
    const double step = (a_hi - a_lo) / (grid - 1);
    golden_section(ratio, std::max(a_lo, a_lo + (best_i - 1) * step),
                   std::min(a_hi, a_lo + (best_i + 1) * step), 1e-10, best_a, best_v);

    res.closed_form = 1.0 - int_pow(res.constants.x_k, t);
    res.minimizer_at_left = best_a <= a_lo + 2.0 * step;
    res.estimate = {best_v, 1e-9, "minimization", grid, best_a};
    return res;
}

std::vector<AlphaTableCell> alpha_table(int k_min, int k_max, int ell_min, int ell_max,
                                        const AlphaTableOptions& opts) {
    if (k_min < 2 || k_min > k_max || ell_min > ell_max)
        throw param_error("bad table ranges");
    std::vector<AlphaTableCell> cells;
    for (int k = k_min; k <= k_max; ++k)
        for (int ell = std::max(k, ell_min); ell <= ell_max; ++ell)
            cells.push_back({k, ell, {}});

    int threads = opts.threads > 0 ? opts.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) return;
                try {
                    cells[i].estimate = alpha_kl(cells[i].k, cells[i].ell, opts.minimize);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return cells;
}

std::string alpha_table_csv(const std::vector<AlphaTableCell>& cells) {
    std::ostringstream os;
    os << "k,l,alpha,error_bound,a_star\n";
    char buf[128];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.2e,%.6f\n", c.k, c.ell, c.estimate.value,
                      c.estimate.abs_error_bound, c.estimate.a_star);
        os << buf;
    }
    return os.str();
}

std::string alpha_table_text(const std::vector<AlphaTableCell>& cells) {
    if (cells.empty()) return "";
    int k_min = cells.front().k, k_max = cells.front().k;
    int l_min = cells.front().ell, l_max = cells.front().ell;
    for (const auto& c : cells) {
        k_min = std::min(k_min, c.k);
        k_max = std::max(k_max, c.k);
        l_min = std::min(l_min, c.ell);
        l_max = std::max(l_max, c.ell);
    }
    std::ostringstream os;
    os << "k\\l";
    for (int l = l_min; l <= l_max; ++l) os << "\t" << l;
    os << "\n";
    char buf[16];
    for (int k = k_min; k <= k_max; ++k) {
        os << k;
        for (int l = l_min; l <= l_max; ++l) {
            os << "\t";
            for (const auto& c : cells)
                if (c.k == k && c.ell == l) {
                    std::snprintf(buf, sizeof(buf), "%.3f", c.estimate.value);
                    os << (buf[0] == '0' ? buf + 1 : buf); // ".836" style
                }
        }
        os << "\n";
    }
    return os.str();
}

FtReport ft_bound_check(double T, int ell, int trials, std::uint64_t seed) {
    if (!(T > 0.0)) throw param_error("T must be positive");
    if (ell < 2) throw param_error("ell must be >= 2");
    if (!(ell < std::exp(1.0 / T))) throw param_error("requires ell < exp(1/T)");

    auto ft = [T](double x) { return x == 0.0 ? 0.0 : x * x * (1.0 + T * std::log(x)); };
    const double bound =
        1.0 / ell - T * std::log(static_cast<double>(ell)) / ell - 4.0 * ell * std::exp(-1.0 / T);

    std::vector<std::vector<double>> points;
    points.emplace_back(ell, 1.0 / ell); // uniform
    std::vector<double> onehot(ell, 0.0);
    onehot[0] = 1.0;
    points.push_back(onehot); // one-hot
    std::vector<double> twoblock(ell, 0.0);
    twoblock[0] = twoblock[1] = 0.5;
    points.push_back(twoblock); // two-block

    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        std::vector<double> x(ell);
        double total = 0.0;
        for (int i = 0; i < ell; ++i) {
            x[i] = -std::log(rng.next_double_open());
            total += x[i];
        }
        for (int i = 0; i < ell; ++i) x[i] /= total;
        points.push_back(std::move(x));
    }

    FtReport rep;
    rep.min_slack = std::numeric_limits<double>::infinity();
    for (const auto& x : points) {
        double sum = 0.0;
        for (double xi : x) sum += ft(xi);
        const double slack = sum - bound;
        ++rep.checked;
        if (slack < rep.min_slack) {
            rep.min_slack = slack;
            rep.worst_point = x;
        }
        if (slack < 0.0) ++rep.violations;
    }
    return rep;
}

} // namespace pcol
