// Kernels on the unit square: dense symmetric step kernels ("step graphons"),
// a few analytic families, grid sampling, L^p / cut norms and cut distance.
//
// Conventions used throughout:
//  * a step kernel with n steps is constant on cells I_i x I_j, I_i = [(i-1)/n, i/n)
//  * sampling an analytic kernel uses the grid points x_i = i/n, i = 1..n
//  * piecewise block families treat the first block as x <= split (so the grid
//    point x = split lands in the first block and x = 1 in the last)
//  * cut norm, subset form:    max_S (1/n^2) | sum_{i in S, j not in S} A_ij |
//  * cut norm, bilinear form:  max_{f,g in [-1,1]^n} (1/n^2) | f^T A g |
//    (maxima are attained at sign vectors; this is what the alternating
//    heuristic optimizes). The two forms are NOT equal in general; results are
//    labeled with the form that produced them.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "graphgl/common.hpp"

namespace ggl {

struct StepGraphon {
    int n = 0;
    std::vector<double> w;  // row-major n*n, symmetric, nonnegative

    double at(int i, int j) const { return w[static_cast<std::size_t>(i) * n + j]; }
    double& at(int i, int j) { return w[static_cast<std::size_t>(i) * n + j]; }
};

// Validates symmetry (1e-12) and nonnegativity; error messages name the
// offending entry pair so bad CSV inputs are diagnosable.
inline StepGraphon step_from_adjacency(int n, std::vector<double> w) {
    if (n <= 0) throw validation_error("step kernel needs n >= 1, got n=" + std::to_string(n));
    if (w.size() != static_cast<std::size_t>(n) * n)
        throw validation_error("step kernel expects n*n=" + std::to_string(static_cast<long long>(n) * n) +
                               " entries, got " + std::to_string(w.size()));
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double wij = w[static_cast<std::size_t>(i) * n + j];
            double wji = w[static_cast<std::size_t>(j) * n + i];
            if (!(std::abs(wij - wji) <= 1e-12))
                throw validation_error("asymmetric weights at entry pair (" + std::to_string(i + 1) + "," +
                                       std::to_string(j + 1) + "): " + std::to_string(wij) + " vs " +
                                       std::to_string(wji));
            if (wij < 0.0 || wji < 0.0)
                throw validation_error("negative weight at entry pair (" + std::to_string(i + 1) + "," +
                                       std::to_string(j + 1) + ")");
        }
    }
    StepGraphon g;
    g.n = n;
    g.w = std::move(w);
    return g;
}

// ---------------------------------------------------------------------------
// Analytic kernel families
// ---------------------------------------------------------------------------

struct Constant {
    double p = 0.5;
};

// Two-block kernel, general 2x2 block values; split = width of the first block.
struct Sbm2x2 {
    double a11 = 1.0, a12 = 0.0, a22 = 1.0;
    double split = 0.5;
};

struct Bipartite {  // 1 across blocks, 0 within; a = first block width
    double a = 0.5;
};

struct Community {  // 1 within blocks, 0 across; a = first block width
    double a = 0.5;
};

// |x-y|^{-(1+2s)} capped at `cap`; diagonal evaluates to the cap.
struct PowerKernel {
    double s = 0.25;
    double cap = 1e6;
};

using AnalyticGraphon = std::variant<Constant, Sbm2x2, Bipartite, Community, PowerKernel>;

inline void validate(const AnalyticGraphon& g) {
    if (auto* c = std::get_if<Constant>(&g)) {
        if (c->p < 0.0) throw validation_error("constant kernel needs p >= 0");
    } else if (auto* s = std::get_if<Sbm2x2>(&g)) {
        if (s->a11 < 0 || s->a12 < 0 || s->a22 < 0) throw validation_error("sbm block values must be >= 0");
        if (!(s->split > 0.0 && s->split < 1.0)) throw validation_error("sbm split must lie in (0,1)");
    } else if (auto* b = std::get_if<Bipartite>(&g)) {
        if (!(b->a > 0.0 && b->a < 1.0)) throw validation_error("bipartite split must lie in (0,1)");
    } else if (auto* c = std::get_if<Community>(&g)) {
        if (!(c->a > 0.0 && c->a < 1.0)) throw validation_error("community split must lie in (0,1)");
    } else if (auto* p = std::get_if<PowerKernel>(&g)) {
        if (!(p->s > 0.0 && p->s < 1.0)) throw validation_error("power kernel needs s in (0,1)");
        if (!(p->cap > 0.0)) throw validation_error("power kernel cap must be positive");
    }
}

inline double eval(const AnalyticGraphon& g, double x, double y) {
    struct V {
        double x, y;
        double operator()(const Constant& c) const { return c.p; }
        double operator()(const Sbm2x2& s) const {
            bool bx = x <= s.split, by = y <= s.split;
            if (bx && by) return s.a11;
            if (!bx && !by) return s.a22;
            return s.a12;
        }
        double operator()(const Bipartite& b) const {
            bool bx = x <= b.a, by = y <= b.a;
            return bx == by ? 0.0 : 1.0;
        }
        double operator()(const Community& c) const {
            bool bx = x <= c.a, by = y <= c.a;
            return bx == by ? 1.0 : 0.0;
        }
        double operator()(const PowerKernel& p) const {
            double d = std::abs(x - y);
            if (d == 0.0) return p.cap;
            return std::min(std::pow(d, -(1.0 + 2.0 * p.s)), p.cap);
        }
    };
    return std::visit(V{x, y}, g);
}

inline bool is_bounded_kernel(const AnalyticGraphon& g, double cap_limit = 1e3) {
    if (auto* p = std::get_if<PowerKernel>(&g)) return p->cap <= cap_limit;
    return true;
}

inline StepGraphon sample_step_graphon(const AnalyticGraphon& g, int n) {
    validate(g);
    if (n <= 0) throw validation_error("sample size must be >= 1");
    StepGraphon s;
    s.n = n;
    s.w.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = eval(g, double(i + 1) / n, double(j + 1) / n);
            s.at(i, j) = v;
            s.at(j, i) = v;
        }
    return s;
}

// Lossless blow-up: each cell becomes factor x factor copies (same kernel as a
// function on the square).
inline StepGraphon refine(const StepGraphon& g, int factor) {
    if (factor < 1) throw validation_error("refine factor must be >= 1");
    StepGraphon r;
    r.n = g.n * factor;
    r.w.assign(static_cast<std::size_t>(r.n) * r.n, 0.0);
    for (int i = 0; i < r.n; ++i)
        for (int j = 0; j < r.n; ++j) r.at(i, j) = g.at(i / factor, j / factor);
    return r;
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

inline double lp_norm(const StepGraphon& g, double p) {
    if (!(p >= 1.0)) throw validation_error("lp_norm needs p >= 1");
    double acc = 0.0;
    for (double v : g.w) acc += std::pow(std::abs(v), p);
    return std::pow(acc / (double(g.n) * g.n), 1.0 / p);
}

// Midpoint rule on grid x grid cells. Adequate for bounded kernels; for the
// capped power kernel it is a plain quadrature of the capped integrand.
inline double lp_norm(const AnalyticGraphon& g, double p, int grid = 1024) {
    validate(g);
    if (!(p >= 1.0)) throw validation_error("lp_norm needs p >= 1");
    if (grid < 1) throw validation_error("lp_norm grid must be >= 1");
    double acc = 0.0;
    for (int i = 0; i < grid; ++i) {
        double x = (i + 0.5) / grid;
        for (int j = 0; j < grid; ++j) {
            double y = (j + 0.5) / grid;
            acc += std::pow(std::abs(eval(g, x, y)), p);
        }
    }
    return std::pow(acc / (double(grid) * grid), 1.0 / p);
}

// ---------------------------------------------------------------------------
// Cut norms
// ---------------------------------------------------------------------------

struct CutNormEstimate {
    double value = 0.0;
    std::string method;            // "exhaustive" or "alternating"
    std::vector<int> subset;       // exhaustive: the achieving S (0-based indices)
    std::vector<double> f, g;      // alternating: the achieving sign vectors
    bool is_exact = false;
};

namespace detail {

// max over S of |sum_{i in S, j in S^c} a_ij| / n^2 for a symmetric matrix
// (entries may be signed; used for difference kernels too). Gray-code walk with
// incremental cross-sum updates: O(2^n * n).
inline CutNormEstimate cut_norm_subset_exhaustive(const std::vector<double>& a, int n) {
    std::vector<double> row_total(n, 0.0), row_in(n, 0.0);  // row_in[i] = sum_{j in S} a_ij
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) row_total[i] += a[static_cast<std::size_t>(i) * n + j];

    std::vector<char> in_set(n, 0);
    double cross = 0.0;  // sum_{i in S, j in S^c} a_ij
    double best = 0.0;
    std::uint64_t best_mask = 0, mask = 0;

    const std::uint64_t total = 1ull << n;
    for (std::uint64_t k = 1; k < total; ++k) {
        int bit = 0;
        while (!((k >> bit) & 1ull)) ++bit;  // Gray code: flip lowest set bit of k
        double diag = a[static_cast<std::size_t>(bit) * n + bit];
        if (!in_set[bit]) {
            // adding `bit`: gains its row toward current S^c, loses column from S
            cross += (row_total[bit] - row_in[bit] - diag) - row_in[bit];
            in_set[bit] = 1;
            mask |= 1ull << bit;
            for (int j = 0; j < n; ++j) row_in[j] += a[static_cast<std::size_t>(j) * n + bit];
        } else {
            for (int j = 0; j < n; ++j) row_in[j] -= a[static_cast<std::size_t>(j) * n + bit];
            in_set[bit] = 0;
            mask &= ~(1ull << bit);
            cross -= (row_total[bit] - row_in[bit] - diag) - row_in[bit];
        }
        if (std::abs(cross) > best) {
            best = std::abs(cross);
            best_mask = mask;
        }
    }

    CutNormEstimate est;
    est.value = best / (double(n) * n);
    est.method = "exhaustive";
    est.is_exact = true;
    for (int i = 0; i < n; ++i)
        if ((best_mask >> i) & 1ull) est.subset.push_back(i);
    return est;
}

// Alternating maximization of |f^T A g| / n^2 over sign vectors. Each half-step
// is the exact best response, so the objective is nondecreasing and the walk
// stops at a fixed point.
inline CutNormEstimate cut_norm_bilinear_alternating(const std::vector<double>& a, int n, int restarts,
                                                     std::uint64_t seed) {
    if (restarts < 1) throw validation_error("cut norm heuristic needs restarts >= 1");
    auto matvec = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            const double* row = &a[static_cast<std::size_t>(i) * n];
            for (int j = 0; j < n; ++j) s += row[j] * v[j];
            out[i] = s;
        }
    };

    CutNormEstimate best;
    best.method = "alternating";
    best.value = -1.0;
    for (int r = 0; r < restarts; ++r) {
        auto rng = rng_for(seed, static_cast<std::uint64_t>(r));
        std::vector<double> f(n), g(n), tmp(n);
        for (int i = 0; i < n; ++i) g[i] = (rng() & 1ull) ? 1.0 : -1.0;
        double prev = -1.0;
        for (int it = 0; it < 200; ++it) {
            matvec(g, tmp);
            for (int i = 0; i < n; ++i) f[i] = tmp[i] >= 0.0 ? 1.0 : -1.0;
            matvec(f, tmp);  // A symmetric, so A^T f = A f
            for (int i = 0; i < n; ++i) g[i] = tmp[i] >= 0.0 ? 1.0 : -1.0;
            matvec(g, tmp);
            double val = 0.0;
            for (int i = 0; i < n; ++i) val += f[i] * tmp[i];
            val = std::abs(val);
            if (val <= prev) break;
            prev = val;
        }
        double value = prev / (double(n) * n);
        if (value > best.value) {
            best.value = value;
            best.f = f;
            best.g = g;
        }
    }
    return best;
}

}  // namespace detail

// Exhaustive subset-form cut norm; the walk is Theta(2^n * n), so n is capped.
inline CutNormEstimate cut_norm_exact(const StepGraphon& g) {
    if (g.n > 20) {
        double cost = std::ldexp(1.0, g.n);  // 2^n subsets
        throw validation_error("cut_norm_exact enumerates 2^n subsets; n=" + std::to_string(g.n) +
                               " needs ~" + std::to_string(cost) +
                               " subset visits (budget is n<=20). Use cut_norm_heuristic instead.");
    }
    return detail::cut_norm_subset_exhaustive(g.w, g.n);
}

// Restarted alternating maximization of the bilinear form. Lower bound on the
// bilinear optimum; for nonnegative kernels the optimum is attained at
// f = g = all-ones (every entry contributes positively).
inline CutNormEstimate cut_norm_heuristic(const StepGraphon& g, int restarts = 16, std::uint64_t seed = 0) {
    return detail::cut_norm_bilinear_alternating(g.w, g.n, restarts, seed);
}

// Subset-form cut norm of the difference of two step kernels on a common grid.
// No cell rearrangement is attempted. Exhaustive up to n = 20, alternating
// heuristic beyond (the method field says which).
inline CutNormEstimate cut_distance(const StepGraphon& g1, const StepGraphon& g2, int restarts = 64,
                                    std::uint64_t seed = 0) {
    if (g1.n != g2.n)
        throw validation_error("cut_distance needs a common grid: n=" + std::to_string(g1.n) + " vs n=" +
                               std::to_string(g2.n) + " (refine to a common multiple first)");
    std::vector<double> diff(g1.w.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = g1.w[i] - g2.w[i];
    if (g1.n <= 20) return detail::cut_norm_subset_exhaustive(diff, g1.n);
    // Bilinear heuristic upper-bounds the subset form only up to convention;
    // report it as the estimate, labeled.
    return detail::cut_norm_bilinear_alternating(diff, g1.n, restarts, seed);
}

inline CutNormEstimate cut_distance(const AnalyticGraphon& g1, const AnalyticGraphon& g2, int n,
                                    int restarts = 64, std::uint64_t seed = 0) {
    return cut_distance(sample_step_graphon(g1, n), sample_step_graphon(g2, n), restarts, seed);
}

// Re-evaluates an estimate from its own certificate; every shipped estimate
// must reproduce its value this way.
inline double recompute_certificate(const StepGraphon& g, const CutNormEstimate& est) {
    const int n = g.n;
    if (est.method == "exhaustive") {
        std::vector<char> in_set(n, 0);
        for (int i : est.subset) in_set[i] = 1;
        double cross = 0.0;
        for (int i = 0; i < n; ++i)
            if (in_set[i])
                for (int j = 0; j < n; ++j)
                    if (!in_set[j]) cross += g.at(i, j);
        return std::abs(cross) / (double(n) * n);
    }
    if (est.f.size() != static_cast<std::size_t>(n) || est.g.size() != static_cast<std::size_t>(n))
        throw validation_error("certificate sign vectors have the wrong length");
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += est.f[i] * g.at(i, j) * est.g[j];
    return std::abs(acc) / (double(n) * n);
}

inline std::uint64_t kernel_hash(const StepGraphon& g) {
    std::uint64_t h = fnv1a(&g.n, sizeof g.n);
    return fnv1a(g.w.data(), g.w.size() * sizeof(double), h);
}

}  // namespace ggl
