// Release gate: eleven end-to-end checks, one PASS/FAIL line each, with the
// measured quantities printed so a failure is diagnosable from the log alone.
// The process exit code is the number of failed lines. Tolerances are pinned
// here, next to the checks that use them.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "graphgl/sweep.hpp"
#include "oracles.hpp"

using namespace ggl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, pattern);
    vsnprintf(buf, sizeof buf, pattern, ap);
    va_end(ap);
    return buf;
}

struct Line {
    bool pass = false;
    std::string detail;
};

// 1. Flat kernel, interior volume demand: minimizer values against the well
//    set {0, +s, -s}, at most one cell off the wells, energy against the
//    stationary-state solver.
Line check_flat_kernel_minimizer() {
    auto t0 = Clock::now();
    const double tol_value = 1e-6, tol_energy = 1e-6, budget_s = 10.0;
    const double s = std::sqrt(0.95);
    double worst_value_dev = 0.0, worst_energy_gap = 0.0;
    int worst_off_wells = 0;
    for (int n : {8, 16, 32, 64}) {
        MinimizeProblem p;
        p.kernel = sample_step_graphon(Constant{0.5}, n);
        p.epsilon = 0.1;
        p.volume_c = 0.3;
        p.restarts = 16;
        p.seed = 1;
        MinimizerResult r = minimize_graph_gl(p);
        MinimizerResult ref = el_solve_constant(0.5, 0.1, 0.3, n);
        worst_energy_gap = std::max(worst_energy_gap, std::abs(r.energy.total - ref.energy.total));
        int off = 0;
        for (double v : std::get<StepFunction>(r.state).values) {
            double to_wells = std::min(std::abs(v - s), std::abs(v + s));
            worst_value_dev = std::max(worst_value_dev, std::min(std::abs(v), to_wells));
            if (to_wells > tol_value) ++off;
        }
        worst_off_wells = std::max(worst_off_wells, off);
    }
    double dt = seconds_since(t0);
    Line l;
    l.pass = worst_value_dev <= tol_value && worst_off_wells <= 1 && worst_energy_gap <= tol_energy &&
             dt < budget_s;
    l.detail = fmt("value dev %.6g (tol %.0e), %d cells off the wells (tol 1), energy gap %.3g (tol %.0e), %.1fs",
                   worst_value_dev, tol_value, worst_off_wells, worst_energy_gap, tol_energy, dt);
    if (!l.pass && worst_energy_gap <= tol_energy)
        l.detail += "; the energy is optimal but stationary values sit on shifted branch roots, not on the well set";
    return l;
}

// 2. Saturated volume demand pins the constant state.
Line check_saturated_constant() {
    auto t0 = Clock::now();
    MinimizeProblem p;
    p.kernel = sample_step_graphon(Constant{1.0}, 16);
    p.epsilon = 0.5;
    p.volume_c = 0.9;
    p.restarts = 8;
    p.seed = 2;
    MinimizerResult r = minimize_graph_gl(p);
    double value_dev = 0.0;
    for (double v : std::get<StepFunction>(r.state).values) value_dev = std::max(value_dev, std::abs(v - 0.9));
    double energy_err = std::abs(r.energy.total - 0.0722);
    double dt = seconds_since(t0);
    Line l;
    l.pass = value_dev <= 1e-8 && energy_err <= 1e-10 && dt < 1.0;
    l.detail = fmt("max |value-0.9| = %.3g (tol 1e-8), |energy-0.0722| = %.3g (tol 1e-10), %.2fs", value_dev,
                   energy_err, dt);
    return l;
}

// 3. Bipartite kernel: per-cell deviation from +-sqrt(0.95) non-increasing in
//    n, bounded by 2/sqrt(n), with at most two exceptional cells per block.
Line check_bipartite_rate() {
    auto t0 = Clock::now();
    const double s = std::sqrt(0.95);
    const int ns[] = {32, 64, 128, 256};
    const int ladder[] = {256, 512, 1024, 2048};
    double prev = 1e300;
    bool monotone = true, bounded = true;
    int worst_block_exceptions = 0;
    double last_dev = 0.0;
    for (int i = 0; i < 4; ++i) {
        int n = ns[i];
        MinimizeProblem p;
        p.kernel = AnalyticGraphon{Bipartite{0.5}};
        p.resolution = n;
        p.epsilon = 0.2;
        p.volume_c = 0.0;
        p.restarts = ladder[i];
        p.seed = 2026;
        MinimizerResult r = minimize_graph_gl(p);
        const auto& u = std::get<StepFunction>(r.state).values;
        double bound = 2.0 / std::sqrt(double(n));
        double maxdev = 0.0;
        int exc[2] = {0, 0};
        for (int j = 0; j < n; ++j) {
            double dev = std::min(std::abs(u[j] - s), std::abs(u[j] + s));
            maxdev = std::max(maxdev, dev);
            if (dev > bound) ++exc[j * 2 / n];
        }
        monotone = monotone && maxdev <= prev + 1e-8;
        bounded = bounded && maxdev <= bound;
        worst_block_exceptions = std::max({worst_block_exceptions, exc[0], exc[1]});
        prev = maxdev;
        last_dev = maxdev;
    }
    double dt = seconds_since(t0);
    Line l;
    l.pass = monotone && bounded && worst_block_exceptions <= 2 && dt < 60.0;
    l.detail = fmt("deviation %.6g at n=256, %s, %s 2/sqrt(n), worst block exceptions %d (tol 2), %.1fs",
                   last_dev, monotone ? "non-increasing" : "NOT monotone",
                   bounded ? "within" : "exceeds", worst_block_exceptions, dt);
    return l;
}

// 4. Decoupled communities: the dedicated solver's blockwise magnitudes track
//    sqrt(1-(eps/2)^2) and grow toward 1 as eps shrinks.
Line check_community_blocks() {
    auto t0 = Clock::now();
    double prev_mag = 0.0;
    double worst_err = 0.0;
    bool increasing = true, blockwise = true;
    for (double eps : {0.5, 0.2, 0.1}) {
        MinimizerResult r = closed_form_community(0.5, eps, 32);
        const auto& u = std::get<StepFunction>(r.state).values;
        double target = std::sqrt(1.0 - (eps / 2.0) * (eps / 2.0));
        for (int i = 0; i < 32; ++i) {
            double want = i < 16 ? u[0] : u[16];
            blockwise = blockwise && u[i] == want;
            worst_err = std::max(worst_err, std::abs(std::abs(u[i]) - target));
        }
        increasing = increasing && std::abs(u[0]) > prev_mag;
        prev_mag = std::abs(u[0]);
    }
    double dt = seconds_since(t0);
    Line l;
    l.pass = worst_err <= 1e-6 && increasing && blockwise && prev_mag < 1.0 && dt < 30.0;
    l.detail = fmt("magnitude error %.3g (tol 1e-6), magnitudes %s toward 1, %.2fs", worst_err,
                   increasing ? "increase" : "DO NOT increase", dt);
    return l;
}

// 5. Sharpening interface: minimizer magnitudes follow sqrt(1-eps); the
//    thresholded state's smooth and binary energies meet as eps -> 0.
Line check_interface_sharpening() {
    auto t0 = Clock::now();
    Kernel k{AnalyticGraphon{Constant{1.0}}};
    SweepResult sweep = run_eps_sweep(k, 16, 0.0, {0.5, 0.2, 0.1, 0.05, 0.01}, SweepLevel::graph, 64, 7);
    double worst_mag_err = 0.0;
    for (const SweepPoint& pt : sweep.points) {
        double target = std::sqrt(1.0 - pt.parameter);
        for (double v : std::get<StepFunction>(pt.result.state).values)
            worst_mag_err = std::max(worst_mag_err, std::abs(std::abs(v) - target));
    }
    double final_gap = sweep.points.back().energy_gap;
    double dt = seconds_since(t0);
    Line l;
    l.pass = worst_mag_err <= 1e-6 && final_gap < 1e-2;
    l.detail = fmt("magnitude error %.3g (tol 1e-6), smooth-vs-binary gap %.3g at eps=0.01 (tol 1e-2), %.1fs",
                   worst_mag_err, final_gap, dt);
    return l;
}

// 6. Delta measures collapse to the plain functional; binary-support measures
//    score the same under the interaction and binary functionals.
Line check_measure_identities() {
    auto t0 = Clock::now();
    double worst_collapse = 0.0, worst_binary = 0.0;
    for (int t = 0; t < 200; ++t) {
        int n = 2 + t % 8;
        StepGraphon w = oracles::random_step(20000 + t, n);
        auto rng = rng_for(21000 + std::uint64_t(t), 0);
        StepFunction u;
        for (int i = 0; i < n; ++i) u.values.push_back(1.5 * uniform_pm1(rng));
        double eps = 0.05 + 0.1 * (t % 5);
        worst_collapse = std::max(worst_collapse, std::abs(graphon_gl(w, delta_from_function(u), eps).total -
                                                           graph_gl(w, u, eps).total));
        YoungMeasure nu;
        for (int i = 0; i < n; ++i) {
            if (i % 3 == 2)
                nu.cells.push_back(DeltaCell{uniform01(rng) < 0.5 ? -1.0 : 1.0});
            else
                nu.cells.push_back(TwoAtomCell{1.0, -1.0, uniform01(rng)});
        }
        worst_binary = std::max(worst_binary,
                                std::abs(graphon_dirichlet(w, nu).total - graphon_tv(w, nu).total));
    }
    double dt = seconds_since(t0);
    Line l;
    l.pass = worst_collapse <= 1e-12 && worst_binary <= 1e-12 && dt < 10.0;
    l.detail = fmt("collapse error %.3g, binary identity error %.3g (tol 1e-12 each), 200 instances each, %.1fs",
                   worst_collapse, worst_binary, dt);
    return l;
}

// 7. Truncation toward the wells never raises the energy.
Line check_truncation_monotonicity() {
    auto t0 = Clock::now();
    int violations = 0;
    for (int t = 0; t < 500; ++t) {
        int n = 2 + t % 8;
        StepGraphon w = oracles::random_step(22000 + t, n);
        auto rng = rng_for(23000 + std::uint64_t(t), 0);
        StepFunction u;
        for (int i = 0; i < n; ++i) u.values.push_back(3.0 * uniform_pm1(rng));
        double M = 1.0 + 1e-9 + 2.0 * uniform01(rng);
        double eps = 0.05 + 0.1 * (t % 5);
        if (graph_gl(w, truncate(u, M), eps).total > graph_gl(w, u, eps).total) ++violations;
    }
    double dt = seconds_since(t0);
    Line l;
    l.pass = violations == 0;
    l.detail = fmt("%d violations in 500 random (kernel, state, cap) draws, %.1fs", violations, dt);
    return l;
}

// 8. Cut-norm domination by the L1 norm, and the reverse sqrt(2n) bound for
//    the bilinear sign-vector form the heuristic optimizes. The subset form
//    violates the reverse bound at small n (e.g. the all-ones kernel at n=4);
//    the count below documents that adjustment.
Line check_norm_inequalities() {
    auto t0 = Clock::now();
    int forward_failures = 0, bilinear_failures = 0, subset_reverse_violations = 0;
    for (int t = 0; t < 100; ++t) {
        int n = 2 + t % 11;
        StepGraphon w = oracles::random_step(24000 + t, n);
        double cut = cut_norm_exact(w).value;
        double l1 = lp_norm(w, 1.0);
        double bilinear = oracles::bilinear_opt_exhaustive(w);
        double root = std::sqrt(2.0 * n);
        if (cut > l1 + 1e-12) ++forward_failures;
        if (l1 > root * bilinear + 1e-12) ++bilinear_failures;
        if (l1 > root * cut + 1e-12) ++subset_reverse_violations;
    }
    double dt = seconds_since(t0);
    Line l;
    l.pass = forward_failures == 0 && bilinear_failures == 0;
    l.detail = fmt("cut <= L1 failures %d; L1 <= sqrt(2n)*opt failures %d for the sign-vector form "
                   "(%d of 100 kernels violate the reverse bound under the subset form; "
                   "documented convention adjustment), %.1fs",
                   forward_failures, bilinear_failures, subset_reverse_violations, dt);
    return l;
}

// 9. Descent against exhaustive grid search on small kernels.
Line check_against_exhaustive() {
    auto t0 = Clock::now();
    double worst = -1e300;
    for (int t = 0; t < 20; ++t) {
        int n = 2 + t % 4;
        StepGraphon w = oracles::random_step(25000 + t, n);
        double eps = 0.1 + 0.1 * (t % 4);
        MinimizeProblem p;
        p.kernel = w;
        p.epsilon = eps;
        p.volume_c = 0.0;
        p.restarts = 8;
        p.seed = 500 + std::uint64_t(t);
        MinimizerResult r = minimize_graph_gl(p);
        MinimizerResult bf = brute_force_minimizer(w, eps, 0.0, oracles::linspace(-1.0, 1.0, 11));
        worst = std::max(worst, r.energy.total - bf.energy.total);
    }
    double dt = seconds_since(t0);
    Line l;
    l.pass = worst <= 1e-6 && dt < 120.0;
    l.detail = fmt("worst descent-minus-oracle energy %.3g (tol 1e-6), 20 kernels, %.1fs", worst, dt);
    return l;
}

// 10. Analytic gradient against central finite differences.
Line check_gradient() {
    auto t0 = Clock::now();
    double worst_rel = 0.0;
    for (int t = 0; t < 100; ++t) {
        int n = 2 + t % 7;
        StepGraphon w = oracles::random_step(26000 + t, n);
        double eps = 0.05 + 0.1 * (t % 5);
        auto rng = rng_for(27000 + std::uint64_t(t), 0);
        StepFunction u;
        for (int i = 0; i < n; ++i) u.values.push_back(1.5 * uniform_pm1(rng));
        std::vector<double> g = graph_gl_gradient(w, u, eps);
        std::vector<double> fd = oracles::central_fd_gradient(
            [&](const std::vector<double>& x) {
                StepFunction s;
                s.values = x;
                return graph_gl(w, s, eps).total;
            },
            u.values);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            num += (g[i] - fd[i]) * (g[i] - fd[i]);
            den += fd[i] * fd[i];
        }
        worst_rel = std::max(worst_rel, std::sqrt(num) / std::max(1.0, std::sqrt(den)));
    }
    double dt = seconds_since(t0);
    Line l;
    l.pass = worst_rel < 1e-5;
    l.detail = fmt("worst relative gradient error %.3g (tol 1e-5), 100 states, %.1fs", worst_rel, dt);
    return l;
}

// 11. Oscillating recovery states approach the mixed measure in both the
//     narrow pseudometric and energy.
Line check_recovery_diagnostic() {
    auto t0 = Clock::now();
    YoungMeasure nu;
    nu.cells.assign(1, MeasureCell(TwoAtomCell{1.0, -1.0, 0.5}));
    RecoveryReport rep = recovery_sequence_check(Constant{1.0}, nu, {4, 8, 16, 32, 64}, 0.1);
    bool monotone = true;
    for (std::size_t i = 1; i < rep.ns.size(); ++i) {
        monotone = monotone && rep.narrow_distances[i] <= rep.narrow_distances[i - 1] + 1e-12;
        monotone = monotone && rep.energy_gaps[i] <= rep.energy_gaps[i - 1] + 1e-12;
    }
    double final_gap = rep.energy_gaps.back();
    double dt = seconds_since(t0);
    Line l;
    l.pass = monotone && final_gap < 1e-3;
    l.detail = fmt("distances %.3g -> %.3g, final energy gap %.3g (tol 1e-3), %s, %.2fs",
                   rep.narrow_distances.front(), rep.narrow_distances.back(), final_gap,
                   monotone ? "both non-increasing" : "NOT monotone", dt);
    return l;
}

}  // namespace

int main() {
    using Check = Line (*)();
    const Check checks[] = {
        check_flat_kernel_minimizer, check_saturated_constant,   check_bipartite_rate,
        check_community_blocks,      check_interface_sharpening, check_measure_identities,
        check_truncation_monotonicity, check_norm_inequalities,  check_against_exhaustive,
        check_gradient,              check_recovery_diagnostic,
    };
    int failures = 0;
    for (std::size_t i = 0; i < sizeof checks / sizeof checks[0]; ++i) {
        Line l;
        try {
            l = checks[i]();
        } catch (const std::exception& e) {
            l.pass = false;
            l.detail = std::string("exception: ") + e.what();
        }
        if (!l.pass) ++failures;
        std::printf("criterion %2zu: %s  (%s)\n", i + 1, l.pass ? "PASS" : "FAIL", l.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
