// Config-driven command line front end. The config file picks the command
// (gen / eval / minimize / sweep / cutnorm); flags override the seed, thread
// count, and output directory. Exit codes: 0 done, 2 invalid input, 3 the
// requested energy is infinite, 4 the minimizer stopped without meeting its
// tolerances (the best iterate is still written).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graphgl/config.hpp"
#include "graphgl/io.hpp"

namespace fs = std::filesystem;
using namespace ggl;

namespace {

// Resolve the configured kernel to a concrete matrix. Analytic kernels are
// sampled at `resolution`; file kernels come back at their stored size.
StepGraphon load_step_kernel(const RunConfig& cfg, const fs::path& base, int resolution) {
    if (cfg.kernel.analytic) {
        if (resolution < 1)
            throw validation_error("this command samples the analytic kernel; set kernel.resolution >= 1");
        return sample_step_graphon(*cfg.kernel.analytic, resolution);
    }
    if (!cfg.kernel.file.empty()) return read_adjacency_csv(base / cfg.kernel.file);
    return read_edge_list(base / cfg.kernel.edges, cfg.kernel.edges_n);
}

void note_written(const fs::path& p) { std::cout << "wrote " << p.string() << "\n"; }

int cmd_gen(const RunConfig& cfg, const fs::path& out) {
    StepGraphon g = sample_step_graphon(*cfg.kernel.analytic, cfg.kernel.resolution);
    fs::path csv = out / (cfg.prefix + "_kernel.csv");
    fs::path desc = out / (cfg.prefix + "_kernel.json");
    write_adjacency_csv(csv, g);
    ordered_json j = kernel_descriptor_json(*cfg.kernel.analytic, cfg.kernel.resolution, g);
    validate_output_json(j);
    write_json(desc, j);
    note_written(csv);
    note_written(desc);
    return 0;
}

int cmd_eval(const RunConfig& cfg, const fs::path& base, const fs::path& out) {
    const std::string& fn = cfg.functional.name;
    const bool graph_level = fn.rfind("graph_", 0) == 0;
    EnergyReport r;
    std::optional<std::uint64_t> khash;

    if (graph_level) {
        StepFunction u = read_step_function_csv(base / cfg.state.file);
        int res = cfg.kernel.resolution >= 1 ? cfg.kernel.resolution : u.n();
        StepGraphon w = load_step_kernel(cfg, base, res);
        khash = kernel_hash(w);
        if (fn == "graph_gl")
            r = graph_gl(w, u, cfg.functional.epsilon);
        else if (fn == "graph_dirichlet")
            r = graph_dirichlet(w, u);
        else
            r = graph_tv(w, u);
    } else {
        YoungMeasure nu = !cfg.state.measure.empty()
                              ? read_measure_json(base / cfg.state.measure)
                              : delta_from_function(read_step_function_csv(base / cfg.state.file));
        if (cfg.kernel.analytic && cfg.kernel.resolution < 1) {
            // no sampling requested: quadrature directly on the analytic kernel
            if (fn == "graphon_gl")
                r = graphon_gl(*cfg.kernel.analytic, nu, cfg.functional.epsilon, cfg.functional.grid);
            else if (fn == "graphon_dirichlet")
                r = graphon_dirichlet(*cfg.kernel.analytic, nu, cfg.functional.grid);
            else
                r = graphon_tv(*cfg.kernel.analytic, nu, cfg.functional.grid);
        } else {
            StepGraphon w = load_step_kernel(cfg, base, cfg.kernel.resolution);
            khash = kernel_hash(w);
            if (fn == "graphon_gl")
                r = graphon_gl(w, nu, cfg.functional.epsilon);
            else if (fn == "graphon_dirichlet")
                r = graphon_dirichlet(w, nu);
            else
                r = graphon_tv(w, nu);
        }
    }

    ordered_json j = energy_to_json(r);
    if (khash) j["kernel_hash"] = hash_hex(*khash);
    validate_output_json(j);
    fs::path jpath = out / (cfg.prefix + "_energy.json");
    write_json(jpath, j);
    atomic_write_file(out / (cfg.prefix + "_energy.csv"), energy_csv(r));
    std::cout << energy_csv(r);
    note_written(jpath);
    return r.finite ? 0 : 3;
}

int cmd_minimize(const RunConfig& cfg, const fs::path& base, const fs::path& out, bool plot) {
    MinimizeProblem p;
    if (cfg.kernel.analytic)
        p.kernel = *cfg.kernel.analytic;
    else
        p.kernel = load_step_kernel(cfg, base, 0);
    p.epsilon = cfg.problem.epsilon;
    p.volume_c = cfg.problem.c;
    p.state_space = cfg.problem.space;
    p.resolution = cfg.problem.resolution;
    p.restarts = cfg.problem.restarts;
    p.seed = *cfg.seed;
    p.tol = cfg.problem.tol;
    p.threads = cfg.threads;

    MinimizerResult r = minimize(p);
    ordered_json j = minimizer_to_json(r);
    validate_output_json(j);
    fs::path jpath = out / (cfg.prefix + "_minimize.json");
    write_json(jpath, j);
    atomic_write_file(out / (cfg.prefix + "_restarts.csv"), restart_csv(r));
    if (plot) {
        std::vector<double> xs(r.trace.size());
        for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
        write_plot_columns(out / (cfg.prefix + "_trace.dat"), xs, r.trace);
    }
    note_written(jpath);
    std::cout << "energy " << iodetail::fmt(r.energy.total)
              << (r.converged ? "" : "  [did not meet tolerances]") << "\n";
    return r.converged ? 0 : 4;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& base, const fs::path& out, bool plot) {
    SweepResult r;
    if (cfg.sweep.axis == "n") {
        if (!cfg.kernel.analytic)
            throw validation_error("an n sweep resamples the kernel at every size; it needs an analytic "
                                   "kernel (kernel.variant)");
        r = run_n_sweep(*cfg.kernel.analytic, cfg.sweep.epsilon, cfg.sweep.c, cfg.sweep.ns,
                        cfg.sweep.functional, cfg.sweep.restarts, *cfg.seed, cfg.threads);
    } else {
        Kernel k;
        if (cfg.kernel.analytic)
            k = *cfg.kernel.analytic;
        else
            k = load_step_kernel(cfg, base, 0);
        r = run_eps_sweep(k, cfg.sweep.resolution, cfg.sweep.c, cfg.sweep.epsilons, cfg.sweep.level,
                          cfg.sweep.restarts, *cfg.seed, cfg.threads);
    }

    ordered_json j = sweep_to_json(r);
    validate_output_json(j);
    fs::path jpath = out / (cfg.prefix + "_sweep.json");
    write_json(jpath, j);
    atomic_write_file(out / (cfg.prefix + "_sweep.csv"), sweep_csv(r));
    if (plot) {
        std::vector<double> xs, energy, gap, dist;
        for (const SweepPoint& p : r.points) {
            xs.push_back(p.parameter);
            energy.push_back(p.result.energy.total);
            gap.push_back(p.energy_gap);
            dist.push_back(p.narrow_distance);
        }
        write_plot_columns(out / (cfg.prefix + "_sweep_energy.dat"), xs, energy);
        write_plot_columns(out / (cfg.prefix + "_sweep_gap.dat"), xs, gap);
        write_plot_columns(out / (cfg.prefix + "_sweep_distance.dat"), xs, dist);
    }
    note_written(jpath);
    return 0;
}

int cmd_cutnorm(const RunConfig& cfg, const fs::path& base, const fs::path& out, bool force_exhaustive) {
    StepGraphon w = load_step_kernel(cfg, base, cfg.kernel.resolution);
    std::string method = force_exhaustive ? "exhaustive" : cfg.cutnorm.method;
    if (method == "auto") method = w.n <= 20 ? "exhaustive" : "heuristic";

    CutNormEstimate e;
    if (method == "exhaustive") {
        e = cut_norm_exact(w);
    } else {
        if (!cfg.seed)
            throw validation_error("the heuristic cut norm draws random sign vectors; a seed is required");
        e = cut_norm_heuristic(w, cfg.cutnorm.restarts, *cfg.seed);
    }

    ordered_json j = cutnorm_to_json(e);
    j["kernel_hash"] = hash_hex(kernel_hash(w));
    validate_output_json(j);
    fs::path jpath = out / (cfg.prefix + "_cutnorm.json");
    write_json(jpath, j);
    std::cout << "cut norm " << iodetail::fmt(e.value) << " (" << e.method
              << (e.is_exact ? ", exact" : "") << ")\n";
    note_written(jpath);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph and graphon Ginzburg-Landau energies: generate kernels, evaluate, minimize, sweep"};
    std::string config_path;
    std::uint64_t seed_val = 0;
    std::string out_dir = ".";
    bool plot = false, force_exhaustive = false;
    int threads_val = 0;
    app.add_option("--config", config_path, "TOML run configuration")->required();
    auto* seed_opt = app.add_option("--seed", seed_val, "override the config seed");
    app.add_option("--out", out_dir, "output directory (default: current)");
    app.add_flag("--plot-data", plot, "also write two-column plot files");
    app.add_flag("--force-exhaustive", force_exhaustive, "force the exhaustive cut-norm method");
    auto* threads_opt = app.add_option("--threads", threads_val, "worker threads for restarts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = load_run_config(read_file(config_path));
        if (seed_opt->count() > 0) cfg.seed = seed_val;
        if (threads_opt->count() > 0) {
            if (threads_val < 1) throw validation_error("--threads must be >= 1");
            cfg.threads = threads_val;
        }
        fs::path base = fs::path(config_path).parent_path();
        check_referenced_files(cfg, base);
        fs::path out = out_dir;

        switch (cfg.command) {
            case Command::gen:
                return cmd_gen(cfg, out);
            case Command::eval:
                return cmd_eval(cfg, base, out);
            case Command::minimize:
                return cmd_minimize(cfg, base, out, plot);
            case Command::sweep:
                return cmd_sweep(cfg, base, out, plot);
            case Command::cutnorm:
                return cmd_cutnorm(cfg, base, out, force_exhaustive);
        }
        return 2;  // unreachable
    } catch (const infinite_energy& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
