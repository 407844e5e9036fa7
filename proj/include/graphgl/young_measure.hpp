// Step functions on (0,1) and cellwise ("Young") measures: per-cell probability
// measures with a handful of concrete representations, their moments, and a
// narrow-convergence pseudometric built from moment tests against dyadic
// indicator probes.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <variant>
#include <vector>

#include "graphgl/common.hpp"

namespace ggl {

struct StepFunction {
    std::vector<double> values;  // cell i covers [(i-1)/n, i/n)
    int n() const { return static_cast<int>(values.size()); }
};

// Values exactly on {-1,+1} up to tol; the total-variation functionals are
// finite only on such states.
inline bool is_binary(const StepFunction& u, double tol = 1e-12) {
    for (double v : u.values)
        if (std::abs(v - 1.0) > tol && std::abs(v + 1.0) > tol) return false;
    return !u.values.empty();
}

inline StepFunction truncate(const StepFunction& u, double M) {
    if (!(M > 1.0)) throw validation_error("truncate needs M > 1, got M=" + std::to_string(M));
    StepFunction out = u;
    for (double& v : out.values) v = std::clamp(v, -M, M);
    return out;
}

// --- per-cell measures -------------------------------------------------------

struct DeltaCell {
    double value = 0.0;
};

struct TwoAtomCell {
    double a = 1.0, b = -1.0;
    double theta = 0.5;  // weight on atom a
};

struct GridCell {
    std::vector<double> atoms;
    std::vector<double> weights;  // nonnegative, sums to 1 within 1e-12
};

using MeasureCell = std::variant<DeltaCell, TwoAtomCell, GridCell>;

struct YoungMeasure {
    std::vector<MeasureCell> cells;
    int m() const { return static_cast<int>(cells.size()); }
};

inline std::vector<double> uniform_atom_grid(int K = 41) {
    if (K < 2) throw validation_error("atom grid needs K >= 2");
    std::vector<double> atoms(K);
    for (int k = 0; k < K; ++k) atoms[k] = -1.0 + 2.0 * k / (K - 1);
    return atoms;
}

inline void validate(const YoungMeasure& nu) {
    if (nu.cells.empty()) throw validation_error("measure needs at least one cell");
    for (int i = 0; i < nu.m(); ++i) {
        if (auto* t = std::get_if<TwoAtomCell>(&nu.cells[i])) {
            if (!(t->theta >= 0.0 && t->theta <= 1.0))
                throw validation_error("cell " + std::to_string(i + 1) + ": theta outside [0,1]");
        } else if (auto* g = std::get_if<GridCell>(&nu.cells[i])) {
            if (g->atoms.size() != g->weights.size() || g->atoms.empty())
                throw validation_error("cell " + std::to_string(i + 1) + ": atoms/weights mismatch");
            double s = 0.0;
            for (double w : g->weights) {
                if (w < 0.0) throw validation_error("cell " + std::to_string(i + 1) + ": negative weight");
                s += w;
            }
            if (std::abs(s - 1.0) > 1e-12)
                throw validation_error("cell " + std::to_string(i + 1) + ": weights sum to " + std::to_string(s) +
                                       ", expected 1 within 1e-12");
        }
    }
}

inline YoungMeasure delta_from_function(const StepFunction& u) {
    if (u.values.empty()) throw validation_error("empty step function");
    YoungMeasure nu;
    nu.cells.reserve(u.values.size());
    for (double v : u.values) nu.cells.emplace_back(DeltaCell{v});
    return nu;
}

inline YoungMeasure two_atom_uniform(int m, double a, double b, double theta) {
    if (m < 1) throw validation_error("measure needs m >= 1 cells");
    YoungMeasure nu;
    nu.cells.assign(m, TwoAtomCell{a, b, theta});
    validate(nu);
    return nu;
}

// Small flattened (atom, weight) view used by the energy code.
inline void atom_view(const MeasureCell& cell, std::vector<double>& atoms, std::vector<double>& weights) {
    atoms.clear();
    weights.clear();
    if (auto* d = std::get_if<DeltaCell>(&cell)) {
        atoms.push_back(d->value);
        weights.push_back(1.0);
    } else if (auto* t = std::get_if<TwoAtomCell>(&cell)) {
        atoms.push_back(t->a);
        weights.push_back(t->theta);
        atoms.push_back(t->b);
        weights.push_back(1.0 - t->theta);
    } else {
        auto* g = std::get_if<GridCell>(&cell);
        atoms = g->atoms;
        weights = g->weights;
    }
}

// --- moments -----------------------------------------------------------------

struct MomentProfile {
    std::vector<double> m1, m2, m4;
    int m() const { return static_cast<int>(m1.size()); }
};

inline MomentProfile moments(const YoungMeasure& nu) {
    MomentProfile p;
    p.m1.reserve(nu.cells.size());
    p.m2.reserve(nu.cells.size());
    p.m4.reserve(nu.cells.size());
    std::vector<double> atoms, weights;
    for (const auto& cell : nu.cells) {
        atom_view(cell, atoms, weights);
        double m1 = 0.0, m2 = 0.0, m4 = 0.0;
        for (std::size_t k = 0; k < atoms.size(); ++k) {
            double a = atoms[k], w = weights[k];
            m1 += w * a;
            m2 += w * a * a;
            m4 += w * a * a * a * a;
        }
        p.m1.push_back(m1);
        p.m2.push_back(m2);
        p.m4.push_back(m4);
    }
    return p;
}

inline double volume(const YoungMeasure& nu) {
    MomentProfile p = moments(nu);
    return std::accumulate(p.m1.begin(), p.m1.end(), 0.0) / p.m1.size();
}

// All atoms carrying positive weight sit on {-1,+1} (up to tol).
inline bool binary_support(const YoungMeasure& nu, double tol = 1e-12) {
    std::vector<double> atoms, weights;
    for (const auto& cell : nu.cells) {
        atom_view(cell, atoms, weights);
        for (std::size_t k = 0; k < atoms.size(); ++k) {
            if (weights[k] <= 0.0) continue;
            if (std::abs(atoms[k] - 1.0) > tol && std::abs(atoms[k] + 1.0) > tol) return false;
        }
    }
    return true;
}

inline YoungMeasure truncate(const YoungMeasure& nu, double M) {
    if (!(M > 1.0)) throw validation_error("truncate needs M > 1, got M=" + std::to_string(M));
    YoungMeasure out = nu;
    for (auto& cell : out.cells) {
        if (auto* d = std::get_if<DeltaCell>(&cell)) {
            d->value = std::clamp(d->value, -M, M);
        } else if (auto* t = std::get_if<TwoAtomCell>(&cell)) {
            t->a = std::clamp(t->a, -M, M);
            t->b = std::clamp(t->b, -M, M);
        } else {
            auto* g = std::get_if<GridCell>(&cell);
            for (double& a : g->atoms) a = std::clamp(a, -M, M);
        }
    }
    return out;
}

// Cellwise convex combination t*nu1 + (1-t)*nu2 (atom lists concatenated).
inline YoungMeasure mix(const YoungMeasure& nu1, const YoungMeasure& nu2, double t) {
    if (nu1.m() != nu2.m()) throw validation_error("mix needs equal cell counts");
    if (!(t >= 0.0 && t <= 1.0)) throw validation_error("mix weight outside [0,1]");
    YoungMeasure out;
    out.cells.reserve(nu1.cells.size());
    std::vector<double> a1, w1, a2, w2;
    for (int i = 0; i < nu1.m(); ++i) {
        atom_view(nu1.cells[i], a1, w1);
        atom_view(nu2.cells[i], a2, w2);
        GridCell g;
        for (std::size_t k = 0; k < a1.size(); ++k) {
            g.atoms.push_back(a1[k]);
            g.weights.push_back(t * w1[k]);
        }
        for (std::size_t k = 0; k < a2.size(); ++k) {
            g.atoms.push_back(a2[k]);
            g.weights.push_back((1.0 - t) * w2[k]);
        }
        out.cells.emplace_back(std::move(g));
    }
    return out;
}

// Each cell split into `factor` equal subcells carrying the same measure.
inline YoungMeasure refine(const YoungMeasure& nu, int factor) {
    if (factor < 1) throw validation_error("refine factor must be >= 1");
    YoungMeasure out;
    out.cells.reserve(nu.cells.size() * factor);
    for (const auto& cell : nu.cells)
        for (int k = 0; k < factor; ++k) out.cells.push_back(cell);
    return out;
}

inline StepFunction refine(const StepFunction& u, int factor) {
    if (factor < 1) throw validation_error("refine factor must be >= 1");
    StepFunction out;
    out.values.reserve(u.values.size() * factor);
    for (double v : u.values)
        for (int k = 0; k < factor; ++k) out.values.push_back(v);
    return out;
}

// --- narrow pseudometric -----------------------------------------------------
//
//   d(nu1, nu2) = max over monomials f = s^k (k = 1..degree) and dyadic
//   indicator probes psi of | integral psi(x) * (m_k^1(x) - m_k^2(x)) dx |.
//
// Probes enumerate dyadic intervals breadth-first: (0,1); halves; quarters; ...
// The moment mismatch is a step function on the union of the two cell grids, so
// the integrals are computed exactly by interval sweep (equivalent to resampling
// both measures to the common lcm refinement, without building it).

namespace detail {

inline double cell_moment(const MeasureCell& cell, int k) {
    std::vector<double> atoms, weights;
    atom_view(cell, atoms, weights);
    double m = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) m += weights[i] * std::pow(atoms[i], k);
    return m;
}

struct DyadicProbe {
    double lo, hi;
};

inline std::vector<DyadicProbe> dyadic_probes(int count) {
    std::vector<DyadicProbe> out;
    for (int level = 0; static_cast<int>(out.size()) < count; ++level) {
        int parts = 1 << level;
        for (int i = 0; i < parts && static_cast<int>(out.size()) < count; ++i)
            out.push_back({double(i) / parts, double(i + 1) / parts});
    }
    return out;
}

}  // namespace detail

inline double narrow_pseudometric(const YoungMeasure& nu1, const YoungMeasure& nu2, int degree = 4,
                                  int probes = 8) {
    validate(nu1);
    validate(nu2);
    if (degree < 1 || probes < 1) throw validation_error("narrow_pseudometric needs degree,probes >= 1");
    const int m1 = nu1.m(), m2 = nu2.m();
    auto probe_list = detail::dyadic_probes(probes);

    double best = 0.0;
    for (int k = 1; k <= degree; ++k) {
        // moment mismatch as a step function on the union grid
        for (const auto& pr : probe_list) {
            double acc = 0.0;
            // sweep subintervals of [pr.lo, pr.hi) cut by both grids
            double x = pr.lo;
            while (x < pr.hi - 1e-15) {
                int i1 = std::min(static_cast<int>(x * m1 + 1e-12), m1 - 1);
                int i2 = std::min(static_cast<int>(x * m2 + 1e-12), m2 - 1);
                double next = std::min({pr.hi, double(i1 + 1) / m1, double(i2 + 1) / m2});
                double len = next - x;
                if (len <= 0) break;
                acc += len * (detail::cell_moment(nu1.cells[i1], k) - detail::cell_moment(nu2.cells[i2], k));
                x = next;
            }
            best = std::max(best, std::abs(acc));
        }
    }
    return best;
}

}  // namespace ggl
