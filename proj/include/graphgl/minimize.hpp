#pragma once
// Constrained minimisation of the graph/graphon relaxation energies.
//
// Two state spaces share one descent engine:
//   * step_function: node values u in R^n with mean(u) = c. Multi-start
//     projected gradient with Armijo backtracking; the mean constraint is
//     re-imposed exactly after every trial step.
//   * two_atom: per-cell two-atom measures (a_i, b_i, theta_i) with
//     volume = c; projection clips atoms to [-1,1], theta to [0,1], then
//     shifts atoms until the volume matches.
//
// Constant kernels also get a semi-analytic stationary-point solver built on
// the trigonometric roots of v^3 - v = tau, plus closed-form builders for the
// saturated, bipartite and two-community cases, and a small exhaustive grid
// search used as an independent cross-check at tiny sizes.
//
// Conventions fixed here and relied on by the tests and the CLI:
//   - restart k (0-based) draws its start from mt19937_64(seed + k); step
//     states are i.i.d. uniform [-1,1] then projected, two-atom states draw
//     all a's, then all b's in [-1,1], then all theta's in [0,1].
//   - "multiplier" is the mean of the unprojected gradient at the returned
//     state (for two-atom states: the mean over cells of dE/d(shift of both
//     atoms of that cell)).
//   - ties between restarts are broken by energy, then by the
//     lexicographically smallest sorted value vector, then by restart index.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "common.hpp"
#include "energy.hpp"
#include "graphon.hpp"
#include "young_measure.hpp"

namespace ggl {

enum class StateSpace { step_function, two_atom };

struct Tolerances {
    double grad_tol = 1e-9;
    double constraint_tol = 1e-10;
    int max_iters = 50000;
};

using Kernel = std::variant<StepGraphon, AnalyticGraphon>;

struct MinimizeProblem {
    Kernel kernel;
    double epsilon = 0.1;
    double volume_c = 0.0;
    StateSpace state_space = StateSpace::step_function;
    // n for step_function states, number of measure cells for two_atom states.
    // 0 is allowed when the kernel is itself a step kernel (its n is used).
    int resolution = 0;
    int restarts = 8;
    std::uint64_t seed = 0;
    Tolerances tol;
    int threads = 1;
};

struct RestartRecord {
    int restart = 0;
    double energy = 0.0;
    bool converged = false;
    int iterations = 0;
};

using MinimizerState = std::variant<StepFunction, YoungMeasure>;

struct MinimizerResult {
    MinimizerState state;
    EnergyReport energy;
    double constraint_residual = 0.0;  // signed: volume(state) - c
    double multiplier = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> trace;  // accepted energies of the winning run, first entry = start
    std::vector<RestartRecord> restart_log;
    // Only set by the saturated constant-kernel closed form: the energy of the
    // same state after the change of variables u = sqrt(1 - eps p) v.
    std::optional<double> v_space_energy;
};

// --- shared descent engine ----------------------------------------------------

namespace detail {

inline double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / double(x.size());
}

// Energy/gradient of graph_gl as callables over raw value vectors.
struct GraphGLObjective {
    const StepGraphon& w;
    double eps;
    int n;
    std::vector<double> deg;

    GraphGLObjective(const StepGraphon& w_, double eps_)
        : w(w_), eps(eps_), n(w_.n), deg(static_cast<std::size_t>(w_.n), 0.0) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += w.w[static_cast<std::size_t>(i) * n + j];
            deg[i] = s;
        }
    }

    double energy(const std::vector<double>& u) const {
        // sum_ij w_ij (u_i - u_j)^2 = 2 sum_i deg_i u_i^2 - 2 u^T W u
        double quad = 0.0, cross = 0.0, pot = 0.0;
        for (int i = 0; i < n; ++i) {
            const double* row = &w.w[static_cast<std::size_t>(i) * n];
            double wu = 0.0;
            for (int j = 0; j < n; ++j) wu += row[j] * u[j];
            quad += deg[i] * u[i] * u[i];
            cross += u[i] * wu;
            pot += sq(u[i] * u[i] - 1.0);
        }
        double inv_n2 = 1.0 / (double(n) * n);
        return 2.0 * inv_n2 * (quad - cross) + pot / (eps * n);
    }

    double energy_grad(const std::vector<double>& u, std::vector<double>& g) const {
        double quad = 0.0, cross = 0.0, pot = 0.0;
        double inv_n2 = 1.0 / (double(n) * n);
        for (int i = 0; i < n; ++i) {
            const double* row = &w.w[static_cast<std::size_t>(i) * n];
            double wu = 0.0;
            for (int j = 0; j < n; ++j) wu += row[j] * u[j];
            quad += deg[i] * u[i] * u[i];
            cross += u[i] * wu;
            pot += sq(u[i] * u[i] - 1.0);
            g[i] = 4.0 * inv_n2 * (deg[i] * u[i] - wu) + (4.0 / (eps * n)) * u[i] * (u[i] * u[i] - 1.0);
        }
        return 2.0 * inv_n2 * (quad - cross) + pot / (eps * n);
    }
};

struct DescentOutcome {
    std::vector<double> x;
    double energy = 0.0;
    bool stationary = false;  // projected-gradient measure <= grad_tol at exit
    int iterations = 0;
    double stationarity = 0.0;
};

// Projected gradient with Armijo backtracking. `project` mutates a raw vector
// onto the feasible set; `steer` maps the raw gradient to the step direction,
// normally its projection onto the tangent space of the equality constraint
// (for the plain mean-shift projection the two coincide, so the step space
// passes the gradient through unchanged). Stationarity is measured as the
// displacement of a projected unit-step probe along the steered direction.
template <class Obj, class Project, class Steer>
DescentOutcome project_descent(const Obj& obj, Project project, Steer steer, std::vector<double> x,
                               double alpha0, const Tolerances& tol, std::vector<double>* trace) {
    const std::size_t d = x.size();
    std::vector<double> g(d), dir(d), probe(d), trial(d);
    project(x);
    double E = obj.energy_grad(x, g);
    if (trace) {
        trace->clear();
        trace->push_back(E);
    }
    DescentOutcome out;
    int it = 0;
    while (true) {
        steer(x, g, dir);
        for (std::size_t i = 0; i < d; ++i) probe[i] = x[i] - alpha0 * dir[i];
        project(probe);
        double stat = 0.0;
        for (std::size_t i = 0; i < d; ++i) stat = std::max(stat, std::abs(x[i] - probe[i]) / alpha0);
        out.stationarity = stat;
        if (stat <= tol.grad_tol) {
            out.stationary = true;
            break;
        }
        if (it >= tol.max_iters) break;

        // Close to a minimizer the honest decrease of a step sinks below the
        // rounding of the energy sums, so a backtracking test can reject every
        // step size. The fixed-step projected map is a contraction there
        // (alpha0 is sized so alpha0 * curvature < 2 for states near the
        // range [-1,1]), and it needs no energy comparisons: iterate it
        // directly once the remaining gradient is small.
        if (stat <= 1e-6) {
            x.swap(probe);
            E = obj.energy_grad(x, g);
            ++it;
            if (trace) trace->push_back(E);
            continue;
        }

        double alpha = alpha0;
        bool accepted = false;
        // Allow steps whose decrease drowns in rounding; near a minimum the
        // predicted decrease sinks below one ulp of E well before the
        // gradient test is met, and refusing those steps would stall.
        const double noise = 4e-16 * (1.0 + std::abs(E));
        while (alpha >= 1e-18) {
            for (std::size_t i = 0; i < d; ++i) trial[i] = x[i] - alpha * dir[i];
            project(trial);
            double decr = 0.0;
            for (std::size_t i = 0; i < d; ++i) decr += sq(trial[i] - x[i]);
            double Et = obj.energy(trial);
            if (Et <= E - 1e-4 * decr / alpha + noise) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // step size underflowed: stuck at fp resolution
        x.swap(trial);
        E = obj.energy_grad(x, g);
        ++it;
        if (trace) trace->push_back(E);
    }
    out.x = std::move(x);
    out.energy = E;
    out.iterations = it;
    return out;
}

inline void steer_passthrough(const std::vector<double>&, const std::vector<double>& g, std::vector<double>& dir) {
    dir = g;
}

// Deterministic preference order between candidate states.
inline bool improves(double e_new, const std::vector<double>& x_new, double e_best,
                     const std::vector<double>& x_best) {
    if (e_new < e_best) return true;
    if (!(e_new == e_best)) return false;
    std::vector<double> a(x_new), b(x_best);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline StepGraphon resolve_step_kernel(const Kernel& k, int resolution) {
    if (const auto* w = std::get_if<StepGraphon>(&k)) {
        if (resolution > 0 && resolution != w->n)
            throw validation_error("resolution " + std::to_string(resolution) +
                                   " does not match the step kernel's n=" + std::to_string(w->n));
        return *w;
    }
    if (resolution < 1) throw validation_error("an analytic kernel needs resolution >= 1");
    return sample_step_graphon(std::get<AnalyticGraphon>(k), resolution);
}

// Run `restarts` independent descents (optionally across threads), pick the
// winner deterministically, and re-run it once to collect the energy trace.
template <class RunOne>
std::pair<DescentOutcome, std::vector<RestartRecord>> multistart(int restarts, int threads, RunOne run_one,
                                                                 std::vector<double>& trace_out) {
    std::vector<DescentOutcome> outs(static_cast<std::size_t>(restarts));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int k; (k = next.fetch_add(1)) < restarts;) outs[k] = run_one(k, nullptr);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        int nt = std::min(threads, restarts);
        pool.reserve(static_cast<std::size_t>(nt));
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    int best = 0;
    for (int k = 1; k < restarts; ++k)
        if (improves(outs[k].energy, outs[k].x, outs[best].energy, outs[best].x)) best = k;
    std::vector<RestartRecord> log;
    log.reserve(outs.size());
    for (int k = 0; k < restarts; ++k)
        log.push_back({k, outs[k].energy, outs[k].stationary, outs[k].iterations});
    DescentOutcome win = run_one(best, &trace_out);
    return {std::move(win), std::move(log)};
}

}  // namespace detail

// Gradient of graph_gl at u; exposed so tests can difference it.
inline std::vector<double> graph_gl_gradient(const StepGraphon& w, const StepFunction& u, double epsilon) {
    if (static_cast<int>(u.values.size()) != w.n)
        throw validation_error("state has " + std::to_string(u.values.size()) + " values but kernel has n=" +
                               std::to_string(w.n));
    if (!(epsilon > 0.0)) throw validation_error("epsilon must be positive");
    detail::GraphGLObjective obj(w, epsilon);
    std::vector<double> g(u.values.size());
    obj.energy_grad(u.values, g);
    return g;
}

// --- step-function minimisation ------------------------------------------------

inline MinimizerResult minimize_graph_gl(const MinimizeProblem& p) {
    if (p.state_space != StateSpace::step_function)
        throw validation_error("minimize_graph_gl handles step_function states only");
    if (!(p.epsilon > 0.0)) throw validation_error("epsilon must be positive");
    if (p.restarts < 1) throw validation_error("restarts must be >= 1");

    StepGraphon w = detail::resolve_step_kernel(p.kernel, p.resolution);
    const int n = w.n;
    detail::GraphGLObjective obj(w, p.epsilon);
    double wmax = 0.0;
    for (double v : w.w) wmax = std::max(wmax, v);
    const double alpha0 = double(n) / (8.0 * wmax + 12.0 / p.epsilon);
    const double c = p.volume_c;

    auto project = [c](std::vector<double>& x) {
        double shift = detail::mean_of(x) - c;
        for (double& v : x) v -= shift;
    };
    // Step along the mean-removed gradient rather than the raw one. The
    // projection would cancel the mean anyway, but doing it before the step
    // keeps the trial inside the constraint set, so its energy is not
    // polluted by re-centering rounding (which scales with the multiplier and
    // drowns the true decrease near the minimizer for large n).
    auto steer = [](const std::vector<double>&, const std::vector<double>& g, std::vector<double>& dir) {
        double gm = detail::mean_of(g);
        dir.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) dir[i] = g[i] - gm;
    };
    auto run_one = [&](int k, std::vector<double>* trace) {
        auto rng = rng_for(p.seed, static_cast<std::uint64_t>(k));
        std::vector<double> x(static_cast<std::size_t>(n));
        for (double& v : x) v = uniform_pm1(rng);
        return detail::project_descent(obj, project, steer, std::move(x), alpha0, p.tol, trace);
    };

    MinimizerResult r;
    auto [win, log] = detail::multistart(p.restarts, p.threads, run_one, r.trace);
    r.restart_log = std::move(log);

    StepFunction u;
    u.values = win.x;
    r.energy = graph_gl(w, u, p.epsilon);
    r.constraint_residual = detail::mean_of(win.x) - c;
    std::vector<double> g(win.x.size());
    obj.energy_grad(win.x, g);
    r.multiplier = detail::mean_of(g);
    r.converged = win.stationary && std::abs(r.constraint_residual) <= p.tol.constraint_tol;
    r.iterations = win.iterations;
    r.state = std::move(u);
    return r;
}

// --- two-atom measure minimisation ----------------------------------------------

// Energy of a cellwise two-atom measure as a smooth function of the packed
// parameter vector x = [a_0..a_{m-1} | b_0..b_{m-1} | theta_0..theta_{m-1}],
// written through the cell moments. K is the kernel integrated over cell
// pairs, R its row sums.
class TwoAtomObjective {
  public:
    TwoAtomObjective(const StepGraphon& w, int m, double epsilon) : m_(m), eps_(epsilon) {
        init_checks();
        K_.assign(static_cast<std::size_t>(m) * m, 0.0);
        auto segs = detail::union_segments(w.n, m);
        for (const auto& s : segs)
            for (const auto& t : segs)
                K_[static_cast<std::size_t>(s.b_idx) * m_ + t.b_idx] += s.len * t.len * w.at(s.a_idx, t.a_idx);
        finish();
    }

    TwoAtomObjective(const AnalyticGraphon& g, int m, double epsilon, int grid = 512) : m_(m), eps_(epsilon) {
        init_checks();
        validate(g);
        int q = std::max(1, grid / m);
        K_.assign(static_cast<std::size_t>(m) * m, 0.0);
        double inv_m2 = 1.0 / (double(m) * m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                K_[static_cast<std::size_t>(i) * m_ + j] = detail::analytic_cell_average(g, i, j, m, q) * inv_m2;
        finish();
    }

    int cells() const { return m_; }

    double energy(const std::vector<double>& x) const {
        Scratch s;
        moments(x, s);
        return value(s);
    }

    double energy_grad(const std::vector<double>& x, std::vector<double>& g) const {
        Scratch s;
        moments(x, s);
        double E = value(s);
        const int m = m_;
        const double* a = x.data();
        const double* b = x.data() + m;
        const double* th = x.data() + 2 * m;
        for (int i = 0; i < m; ++i) {
            double e1 = -4.0 * s.km1[i];
            double e2 = 2.0 * R_[i] - 2.0 / (eps_ * m);
            double e4 = 1.0 / (eps_ * m);
            double ai = a[i], bi = b[i], ti = th[i];
            g[i] = ti * (e1 + 2.0 * ai * e2 + 4.0 * ai * ai * ai * e4);
            g[m + i] = (1.0 - ti) * (e1 + 2.0 * bi * e2 + 4.0 * bi * bi * bi * e4);
            g[2 * m + i] = e1 * (ai - bi) + e2 * (ai * ai - bi * bi) + e4 * (sq(ai * ai) - sq(bi * bi));
        }
        return E;
    }

    double max_row_sum() const {
        double r = 0.0;
        for (double v : R_) r = std::max(r, v);
        return r;
    }
    double max_entry() const {
        double r = 0.0;
        for (double v : K_) r = std::max(r, std::abs(v));
        return r;
    }

  private:
    // per-call buffers so one objective can serve concurrent restarts
    struct Scratch {
        std::vector<double> m1, m2, m4, km1;
    };

    void init_checks() const {
        if (m_ < 1) throw validation_error("two-atom states need at least one cell");
        if (!(eps_ > 0.0)) throw validation_error("epsilon must be positive");
    }
    void finish() {
        // enforce exact symmetry so the gradient identities hold
        for (int i = 0; i < m_; ++i)
            for (int j = i + 1; j < m_; ++j) {
                double v = 0.5 * (K_[static_cast<std::size_t>(i) * m_ + j] + K_[static_cast<std::size_t>(j) * m_ + i]);
                K_[static_cast<std::size_t>(i) * m_ + j] = v;
                K_[static_cast<std::size_t>(j) * m_ + i] = v;
            }
        R_.assign(static_cast<std::size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            for (int j = 0; j < m_; ++j) s += K_[static_cast<std::size_t>(i) * m_ + j];
            R_[i] = s;
        }
    }
    void moments(const std::vector<double>& x, Scratch& s) const {
        if (static_cast<int>(x.size()) != 3 * m_)
            throw validation_error("two-atom parameter vector must have 3*m entries");
        const int m = m_;
        s.m1.resize(static_cast<std::size_t>(m));
        s.m2.resize(static_cast<std::size_t>(m));
        s.m4.resize(static_cast<std::size_t>(m));
        s.km1.resize(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            double a = x[i], b = x[m + i], t = x[2 * m + i];
            s.m1[i] = t * a + (1.0 - t) * b;
            s.m2[i] = t * a * a + (1.0 - t) * b * b;
            s.m4[i] = t * sq(a * a) + (1.0 - t) * sq(b * b);
        }
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            const double* row = &K_[static_cast<std::size_t>(i) * m];
            for (int j = 0; j < m; ++j) acc += row[j] * s.m1[j];
            s.km1[i] = acc;
        }
    }
    double value(const Scratch& s) const {
        double dir = 0.0, pot = 0.0;
        for (int i = 0; i < m_; ++i) {
            dir += 2.0 * R_[i] * s.m2[i] - 2.0 * s.m1[i] * s.km1[i];
            pot += s.m4[i] - 2.0 * s.m2[i] + 1.0;
        }
        return dir + pot / (eps_ * m_);
    }

    int m_;
    double eps_;
    std::vector<double> K_, R_;
};

namespace detail {

// Clip atoms/weights into their boxes, then shift the atoms until the volume
// hits c (exact after one pass when nothing is clipped).
inline void project_two_atom(std::vector<double>& x, int m, double c) {
    double* a = x.data();
    double* b = x.data() + m;
    double* th = x.data() + 2 * m;
    for (int i = 0; i < m; ++i) {
        a[i] = std::clamp(a[i], -1.0, 1.0);
        b[i] = std::clamp(b[i], -1.0, 1.0);
        th[i] = std::clamp(th[i], 0.0, 1.0);
    }
    for (int pass = 0; pass < 64; ++pass) {
        double vol = 0.0;
        for (int i = 0; i < m; ++i) vol += th[i] * a[i] + (1.0 - th[i]) * b[i];
        vol /= m;
        double r = vol - c;
        if (std::abs(r) <= 1e-16) break;
        for (int i = 0; i < m; ++i) {
            a[i] = std::clamp(a[i] - r, -1.0, 1.0);
            b[i] = std::clamp(b[i] - r, -1.0, 1.0);
        }
    }
}

}  // namespace detail

inline MinimizerResult minimize_graphon_gl_two_atom(const MinimizeProblem& p) {
    if (p.state_space != StateSpace::two_atom)
        throw validation_error("minimize_graphon_gl_two_atom handles two_atom states only");
    if (!(p.epsilon > 0.0)) throw validation_error("epsilon must be positive");
    if (p.restarts < 1) throw validation_error("restarts must be >= 1");
    if (!(std::abs(p.volume_c) <= 1.0))
        throw validation_error("volume constraint |c| <= 1 is required for measures supported in [-1,1]");
    int m = p.resolution;
    if (const auto* w = std::get_if<StepGraphon>(&p.kernel); w && m < 1) m = w->n;
    if (m < 1) throw validation_error("two-atom states need resolution >= 1");

    std::optional<TwoAtomObjective> obj;
    if (const auto* w = std::get_if<StepGraphon>(&p.kernel))
        obj.emplace(*w, m, p.epsilon);
    else
        obj.emplace(std::get<AnalyticGraphon>(p.kernel), m, p.epsilon);

    const double c = p.volume_c;
    const double alpha0 =
        1.0 / (4.0 * m * obj->max_row_sum() + 20.0 * m * obj->max_entry() + 16.0 / (p.epsilon * m) + 1e-12);
    auto project = [m, c](std::vector<double>& x) { detail::project_two_atom(x, m, c); };
    // Step along the gradient with its volume-normal component removed;
    // otherwise the atom-shift projection undoes part of every theta move and
    // the iteration crawls along the constraint manifold.
    auto steer = [m](const std::vector<double>& x, const std::vector<double>& g, std::vector<double>& dir) {
        double gv = 0.0, vv = 0.0;
        for (int i = 0; i < m; ++i) {
            double va = x[2 * m + i] / m;
            double vb = (1.0 - x[2 * m + i]) / m;
            double vt = (x[i] - x[m + i]) / m;
            gv += g[i] * va + g[m + i] * vb + g[2 * m + i] * vt;
            vv += va * va + vb * vb + vt * vt;
        }
        double lam = vv > 0.0 ? gv / vv : 0.0;
        for (int i = 0; i < m; ++i) {
            dir[i] = g[i] - lam * (x[2 * m + i] / m);
            dir[m + i] = g[m + i] - lam * ((1.0 - x[2 * m + i]) / m);
            dir[2 * m + i] = g[2 * m + i] - lam * ((x[i] - x[m + i]) / m);
        }
    };
    auto run_one = [&](int k, std::vector<double>* trace) {
        auto rng = rng_for(p.seed, static_cast<std::uint64_t>(k));
        std::vector<double> x(static_cast<std::size_t>(3 * m));
        for (int i = 0; i < m; ++i) x[i] = uniform_pm1(rng);
        for (int i = 0; i < m; ++i) x[m + i] = uniform_pm1(rng);
        for (int i = 0; i < m; ++i) x[2 * m + i] = uniform01(rng);
        return detail::project_descent(*obj, project, steer, std::move(x), alpha0, p.tol, trace);
    };

    MinimizerResult r;
    auto [win, log] = detail::multistart(p.restarts, p.threads, run_one, r.trace);
    r.restart_log = std::move(log);

    // multiplier before any representation repair
    std::vector<double> g(win.x.size());
    obj->energy_grad(win.x, g);
    double shift_grad = 0.0;
    for (int i = 0; i < m; ++i) shift_grad += g[i] + g[m + i];
    r.multiplier = shift_grad / m;

    YoungMeasure nu;
    nu.cells.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        double a = win.x[i], b = win.x[m + i], t = win.x[2 * m + i];
        if (t >= 1.0 - 1e-12)
            nu.cells.emplace_back(DeltaCell{a});
        else if (t <= 1e-12)
            nu.cells.emplace_back(DeltaCell{b});
        else
            nu.cells.emplace_back(TwoAtomCell{a, b, t});
    }

    if (const auto* w = std::get_if<StepGraphon>(&p.kernel))
        r.energy = graphon_gl(*w, nu, p.epsilon);
    else
        r.energy = graphon_gl(std::get<AnalyticGraphon>(p.kernel), nu, p.epsilon);
    r.constraint_residual = volume(nu) - c;
    r.converged = win.stationary && std::abs(r.constraint_residual) <= p.tol.constraint_tol;
    r.iterations = win.iterations;
    r.state = std::move(nu);
    return r;
}

inline MinimizerResult minimize(const MinimizeProblem& p) {
    return p.state_space == StateSpace::step_function ? minimize_graph_gl(p) : minimize_graphon_gl_two_atom(p);
}

// --- constant-kernel stationary states ------------------------------------------

namespace detail {

// Real roots of v^3 - v = tau on the fold |tau| <= tau_c = 2/(3 sqrt 3),
// ordered ascending; outside the fold the argument is clamped, which
// coalesces the merging pair at the fold edge.
inline std::array<double, 3> cubic_branch_roots(double tau) {
    const double k = 2.0 / std::sqrt(3.0);
    double arg = std::clamp(tau * (3.0 * std::sqrt(3.0) / 2.0), -1.0, 1.0);
    double alpha = std::acos(arg);
    double r_hi = k * std::cos(alpha / 3.0);
    double r_mid = k * std::cos(alpha / 3.0 - 2.0 * std::numbers::pi / 3.0);
    double r_lo = k * std::cos(alpha / 3.0 + 2.0 * std::numbers::pi / 3.0);
    return {r_lo, r_mid, r_hi};
}

}  // namespace detail

// Constant-kernel saturated regime |c| >= sqrt(1 - eps p): the constant state
// u = c is optimal. Also reports the energy of the rescaled state v = gamma,
// which is n (gamma^2 - 1)^2.
inline MinimizerResult closed_form_oversaturated(double p_edge, double epsilon, double c, int n) {
    if (n < 1) throw validation_error("n must be >= 1");
    if (!(epsilon > 0.0)) throw validation_error("epsilon must be positive");
    if (p_edge < 0.0) throw validation_error("edge density must be >= 0");
    double s2 = 1.0 - epsilon * p_edge;
    if (!(s2 > 0.0)) throw validation_error("need epsilon * p < 1 for the change of variables");
    double s = std::sqrt(s2);
    if (std::abs(c) < s)
        throw validation_error("|c| < sqrt(1 - eps p): below saturation, use el_solve_constant");

    StepGraphon w = sample_step_graphon(Constant{p_edge}, n);
    StepFunction u;
    u.values.assign(static_cast<std::size_t>(n), c);

    MinimizerResult r;
    r.energy = graph_gl(w, u, epsilon);
    r.constraint_residual = detail::mean_of(u.values) - c;
    detail::GraphGLObjective obj(w, epsilon);
    std::vector<double> g(u.values.size());
    obj.energy_grad(u.values, g);
    r.multiplier = detail::mean_of(g);
    r.converged = std::abs(r.constraint_residual) <= Tolerances{}.constraint_tol;
    r.iterations = 0;
    double gamma = c / s;
    r.v_space_energy = double(n) * sq(gamma * gamma - 1.0);
    r.state = std::move(u);
    return r;
}

// Stationary states of the constant-kernel energy under the mean constraint.
// After u = sqrt(1 - eps p) v the stationarity condition reads v^3 - v = tau
// with one tau shared by every node, so each node sits on one of <= 3 branch
// values; we enumerate branch occupancies (at most one node on the middle
// branch matters for minima, but k0 <= 1 is enforced as part of the search
// pattern), solve the mean constraint for tau by scan + bisection, and keep
// the best candidate by energy.
inline MinimizerResult el_solve_constant(double p_edge, double epsilon, double c, int n) {
    if (n < 1) throw validation_error("n must be >= 1");
    if (!(epsilon > 0.0)) throw validation_error("epsilon must be positive");
    if (p_edge < 0.0) throw validation_error("edge density must be >= 0");
    double s2 = 1.0 - epsilon * p_edge;
    if (!(s2 > 0.0)) throw validation_error("need epsilon * p < 1 for the change of variables");
    double s = std::sqrt(s2);
    if (std::abs(c) >= s) return closed_form_oversaturated(p_edge, epsilon, c, n);

    const double gamma = c / s;
    const double tau_c = 2.0 / (3.0 * std::sqrt(3.0));

    // O(n) closed energy/gradient for the constant kernel: the pair term only
    // sees the mean and second moment.
    auto energy_of = [&](const std::vector<double>& u) {
        double m1 = 0.0, m2 = 0.0, pot = 0.0;
        for (double v : u) {
            m1 += v;
            m2 += v * v;
            pot += sq(v * v - 1.0);
        }
        m1 /= n;
        m2 /= n;
        return 2.0 * p_edge * (m2 - m1 * m1) + pot / (epsilon * n);
    };

    // mean of v over a branch occupancy at parameter tau
    auto branch_mean = [&](int kp, int k0, int km, double tau) {
        auto r = detail::cubic_branch_roots(tau);
        return (kp * r[2] + k0 * r[1] + km * r[0]) / double(n) - gamma;
    };

    std::vector<double> best_u;
    double best_E = 0.0;
    bool have = false;

    const int N = 4096;
    for (int k0 = 0; k0 <= std::min(1, n); ++k0) {
        for (int kp = 0; kp + k0 <= n; ++kp) {
            int km = n - k0 - kp;
            double prev_tau = -tau_c;
            double prev_val = branch_mean(kp, k0, km, prev_tau);
            for (int j = 1; j <= N; ++j) {
                double tau = -tau_c + 2.0 * tau_c * j / N;
                double val = branch_mean(kp, k0, km, tau);
                if (prev_val == 0.0 || (prev_val < 0.0) != (val < 0.0)) {
                    double lo = prev_tau, hi = tau, flo = prev_val;
                    for (int b = 0; b < 200 && hi - lo > 1e-17; ++b) {
                        double mid = 0.5 * (lo + hi);
                        double fm = branch_mean(kp, k0, km, mid);
                        if (fm == 0.0) {
                            lo = hi = mid;
                            break;
                        }
                        if ((fm < 0.0) == (flo < 0.0)) {
                            lo = mid;
                            flo = fm;
                        } else {
                            hi = mid;
                        }
                    }
                    double tau_star = 0.5 * (lo + hi);
                    auto roots = detail::cubic_branch_roots(tau_star);
                    std::vector<double> u;
                    u.reserve(static_cast<std::size_t>(n));
                    for (int t = 0; t < kp; ++t) u.push_back(s * roots[2]);
                    for (int t = 0; t < k0; ++t) u.push_back(s * roots[1]);
                    for (int t = 0; t < km; ++t) u.push_back(s * roots[0]);
                    double E = energy_of(u);
                    if (!have || detail::improves(E, u, best_E, best_u)) {
                        best_u = std::move(u);
                        best_E = E;
                        have = true;
                    }
                }
                prev_tau = tau;
                prev_val = val;
            }
        }
    }
    if (!have) throw validation_error("no stationary branch occupancy matches the volume constraint");

    StepGraphon w = sample_step_graphon(Constant{p_edge}, n);
    StepFunction u;
    u.values = std::move(best_u);

    MinimizerResult r;
    r.energy = graph_gl(w, u, epsilon);
    r.constraint_residual = detail::mean_of(u.values) - c;
    detail::GraphGLObjective obj(w, epsilon);
    std::vector<double> g(u.values.size());
    obj.energy_grad(u.values, g);
    r.multiplier = detail::mean_of(g);
    double gmean = r.multiplier, stat = 0.0;
    for (double gi : g) stat = std::max(stat, std::abs(gi - gmean));
    Tolerances tol;
    r.converged = stat <= tol.grad_tol && std::abs(r.constraint_residual) <= tol.constraint_tol;
    r.iterations = 0;
    r.state = std::move(u);
    return r;
}

// --- closed forms for structured kernels -----------------------------------------

namespace detail {

// size nb block at magnitude g, balanced signs, descending; odd size leaves
// one zero in the middle so the block sum stays exactly zero.
inline void fill_balanced_block(std::vector<double>& u, int nb, double g) {
    int half = nb / 2;
    for (int t = 0; t < half; ++t) u.push_back(g);
    if (nb % 2 == 1) u.push_back(0.0);
    for (int t = 0; t < half; ++t) u.push_back(-g);
}

inline MinimizerResult finish_closed_form(StepGraphon w, StepFunction u, double epsilon, double c) {
    MinimizerResult r;
    r.energy = graph_gl(w, u, epsilon);
    r.constraint_residual = mean_of(u.values) - c;
    GraphGLObjective obj(w, epsilon);
    std::vector<double> g(u.values.size());
    obj.energy_grad(u.values, g);
    r.multiplier = mean_of(g);
    double stat = 0.0;
    for (double gi : g) stat = std::max(stat, std::abs(gi - r.multiplier));
    Tolerances tol;
    r.converged = stat <= tol.grad_tol && std::abs(r.constraint_residual) <= tol.constraint_tol;
    r.iterations = 0;
    r.state = std::move(u);
    return r;
}

}  // namespace detail

// Bipartite kernel (all weight across the two blocks), zero mean: both blocks
// split evenly between +/- a block-dependent magnitude.
inline MinimizerResult closed_form_bipartite(double a, double epsilon, int n, double c = 0.0) {
    if (!(a > 0.0 && a < 1.0)) throw validation_error("block split must lie in (0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw validation_error("this construction needs 0 < epsilon < 1");
    if (c != 0.0) throw validation_error("this construction is for zero mean only");
    if (n < 2) throw validation_error("n must be >= 2");
    double na = a * n;
    if (std::abs(na - std::round(na)) > 1e-9)
        throw validation_error("n * a must be an integer so the split lands on a cell boundary");
    int n1 = static_cast<int>(std::lround(na));
    if (n1 < 1 || n1 > n - 1) throw validation_error("both blocks need at least one cell");

    double g1 = std::sqrt(1.0 - epsilon * (1.0 - a) / 2.0);
    double g2 = std::sqrt(1.0 - epsilon * a / 2.0);
    StepFunction u;
    u.values.reserve(static_cast<std::size_t>(n));
    detail::fill_balanced_block(u.values, n1, g1);
    detail::fill_balanced_block(u.values, n - n1, g2);
    return detail::finish_closed_form(sample_step_graphon(Bipartite{a}, n), std::move(u), epsilon, c);
}

// Two equal communities (all weight within blocks), zero mean: one block at
// +g, the other at -g.
inline MinimizerResult closed_form_community(double a, double epsilon, int n, double c = 0.0) {
    if (a != 0.5) throw validation_error("this construction is for equal communities (a = 0.5)");
    if (!(epsilon > 0.0 && epsilon < 2.0)) throw validation_error("this construction needs 0 < epsilon < 2");
    if (c != 0.0) throw validation_error("this construction is for zero mean only");
    if (n < 2 || n % 2 != 0) throw validation_error("n must be even so the blocks have equal size");

    double g = std::sqrt(1.0 - sq(epsilon / 2.0));
    StepFunction u;
    u.values.assign(static_cast<std::size_t>(n), g);
    for (int i = n / 2; i < n; ++i) u.values[static_cast<std::size_t>(i)] = -g;
    return detail::finish_closed_form(sample_step_graphon(Community{a}, n), std::move(u), epsilon, c);
}

// --- exhaustive cross-check -------------------------------------------------------

// Exhaustive search over grid^n assignments; keeps the states whose mean is
// as close to c as the grid allows (within a small slack) and returns the
// best of those by energy. Deliberately refuses anything that would take
// noticeably long.
inline MinimizerResult brute_force_minimizer(const StepGraphon& w, double epsilon, double c,
                                             const std::vector<double>& grid, Tolerances tol = {}) {
    if (!(epsilon > 0.0)) throw validation_error("epsilon must be positive");
    if (grid.empty()) throw validation_error("grid must be non-empty");
    const int n = w.n;
    const std::size_t G = grid.size();
    if (n > 6 || G > 21) {
        double states = std::pow(double(G), n);
        throw validation_error("refusing exhaustive search over " + std::to_string(G) + "^" + std::to_string(n) +
                               " = " + std::to_string(states) + " states; limits are n <= 6 and 21 grid values");
    }

    const double target = c * n;
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    auto advance = [&](double& sum) {
        int pos = n - 1;
        while (pos >= 0) {
            sum -= grid[idx[pos]];
            if (++idx[pos] < G) {
                sum += grid[idx[pos]];
                return true;
            }
            idx[pos] = 0;
            sum += grid[0];
            --pos;
        }
        return false;
    };

    // pass 1: closest attainable mean
    double dmin = std::abs(grid[0] * n - target);
    {
        std::fill(idx.begin(), idx.end(), 0);
        double sum = grid[0] * n;
        do {
            dmin = std::min(dmin, std::abs(sum - target));
        } while (advance(sum));
    }
    const double slack = dmin + 10.0 * tol.constraint_tol * n;

    // pass 2: best energy among nearest-feasible states
    detail::GraphGLObjective obj(w, epsilon);
    std::vector<double> u(static_cast<std::size_t>(n)), best_u;
    double best_E = 0.0;
    bool have = false;
    long long visited = 0;
    {
        std::fill(idx.begin(), idx.end(), 0);
        double sum = grid[0] * n;
        do {
            ++visited;
            if (std::abs(sum - target) <= slack + 1e-18) {
                for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = grid[idx[static_cast<std::size_t>(i)]];
                double E = obj.energy(u);
                if (!have || detail::improves(E, u, best_E, best_u)) {
                    best_u = u;
                    best_E = E;
                    have = true;
                }
            }
        } while (advance(sum));
    }

    StepFunction state;
    state.values = std::move(best_u);
    MinimizerResult r;
    r.energy = graph_gl(w, state, epsilon);
    r.constraint_residual = detail::mean_of(state.values) - c;
    std::vector<double> g(state.values.size());
    obj.energy_grad(state.values, g);
    r.multiplier = detail::mean_of(g);
    r.converged = std::abs(r.constraint_residual) <= tol.constraint_tol;
    r.iterations = static_cast<int>(std::min<long long>(visited, INT32_MAX));
    r.state = std::move(state);
    return r;
}

}  // namespace ggl
