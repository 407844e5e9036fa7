#pragma once
// Run configuration: a versioned TOML schema mapped onto the library's
// problem types. Loading is strict — unknown keys, wrong types, and missing
// requirements are validation errors, so an archived config either re-runs
// exactly or refuses loudly.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "graphon.hpp"
#include "minimize.hpp"
#include "sweep.hpp"
#include "toml_lite.hpp"

namespace ggl {

enum class Command { gen, eval, minimize, sweep, cutnorm };

struct KernelSpec {
    std::optional<AnalyticGraphon> analytic;
    std::string file;   // dense adjacency CSV
    std::string edges;  // whitespace edge list, 1-based "i j w"
    int edges_n = 0;
    int resolution = 0;  // sampling resolution for analytic kernels
};

struct FunctionalSpec {
    std::string name;  // graph_gl, graph_dirichlet, graph_tv, graphon_gl, graphon_dirichlet, graphon_tv
    double epsilon = 0.1;
    int grid = 256;  // quadrature for analytic-kernel measure functionals
};

struct StateSpec {
    std::string file;     // step-function CSV
    std::string measure;  // Young-measure JSON
};

struct ProblemSpec {
    double epsilon = 0.1;
    double c = 0.0;
    StateSpace space = StateSpace::step_function;
    int resolution = 0;
    int restarts = 8;
    Tolerances tol;
};

struct SweepSpecConf {
    std::string axis;  // "n" or "epsilon"
    std::vector<int> ns;
    std::vector<double> epsilons;
    SweepFunctional functional = SweepFunctional::gl;  // n axis
    SweepLevel level = SweepLevel::graph;              // epsilon axis
    double epsilon = 0.1;                              // n axis
    double c = 0.0;
    int resolution = 16;  // epsilon axis: n or cell count
    int restarts = 8;
};

struct CutnormSpec {
    std::string method = "auto";  // auto | exhaustive | heuristic
    int restarts = 16;
};

struct RunConfig {
    int schema_version = 1;
    Command command = Command::gen;
    KernelSpec kernel;
    FunctionalSpec functional;
    StateSpec state;
    ProblemSpec problem;
    SweepSpecConf sweep;
    CutnormSpec cutnorm;
    std::string prefix = "run";
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

namespace confdetail {

// Wraps a parsed table and tracks key consumption so leftovers can be
// reported as errors.
class Reader {
  public:
    explicit Reader(const toml::Table& t) : t_(t) {}

    bool has(const std::string& key) const { return t_.count(key) != 0; }

    std::string str(const std::string& key) {
        const toml::Value& v = need(key);
        if (!v.is_string()) fail(v, key, "a string");
        return std::get<std::string>(v.v);
    }
    std::string str_or(const std::string& key, const std::string& dflt) {
        return has(key) ? str(key) : dflt;
    }
    long long integer(const std::string& key) {
        const toml::Value& v = need(key);
        if (!v.is_int()) fail(v, key, "an integer");
        return std::get<long long>(v.v);
    }
    long long integer_or(const std::string& key, long long dflt) {
        return has(key) ? integer(key) : dflt;
    }
    double number(const std::string& key) {
        const toml::Value& v = need(key);
        if (!v.is_int() && !v.is_float()) fail(v, key, "a number");
        return v.as_double();
    }
    double number_or(const std::string& key, double dflt) { return has(key) ? number(key) : dflt; }
    std::vector<double> numbers(const std::string& key) {
        const toml::Value& v = need(key);
        if (!v.is_array()) fail(v, key, "an array");
        std::vector<double> out;
        for (const toml::Value& e : std::get<toml::Array>(v.v)) {
            if (!e.is_int() && !e.is_float()) fail(e, key, "an array of numbers");
            out.push_back(e.as_double());
        }
        return out;
    }
    std::vector<int> integers(const std::string& key) {
        const toml::Value& v = need(key);
        if (!v.is_array()) fail(v, key, "an array");
        std::vector<int> out;
        for (const toml::Value& e : std::get<toml::Array>(v.v)) {
            if (!e.is_int()) fail(e, key, "an array of integers");
            out.push_back(static_cast<int>(std::get<long long>(e.v)));
        }
        return out;
    }

    void finish() const {
        for (const auto& [key, val] : t_)
            if (!used_.count(key))
                throw validation_error("config line " + std::to_string(val.line) + ": unknown key '" + key +
                                       "'");
    }

  private:
    const toml::Value& need(const std::string& key) {
        auto it = t_.find(key);
        if (it == t_.end()) throw validation_error("config: missing required key '" + key + "'");
        used_.insert(key);
        return it->second;
    }
    [[noreturn]] static void fail(const toml::Value& v, const std::string& key, const char* want) {
        throw validation_error("config line " + std::to_string(v.line) + ": key '" + key + "' must be " +
                               want);
    }

    const toml::Table& t_;
    std::set<std::string> used_;
};

inline AnalyticGraphon analytic_from(Reader& r, const std::string& variant) {
    if (variant == "constant") return Constant{r.number("kernel.p")};
    if (variant == "sbm")
        return Sbm2x2{r.number("kernel.a11"), r.number("kernel.a12"), r.number("kernel.a22"),
                      r.number("kernel.split")};
    if (variant == "bipartite") return Bipartite{r.number("kernel.a")};
    if (variant == "community") return Community{r.number("kernel.a")};
    if (variant == "power") return PowerKernel{r.number("kernel.s"), r.number_or("kernel.cap", 1e6)};
    throw validation_error("config: unknown kernel variant '" + variant + "'");
}

}  // namespace confdetail

inline RunConfig load_run_config(const std::string& toml_text) {
    toml::Table table = toml::parse(toml_text);
    confdetail::Reader r(table);
    RunConfig cfg;

    long long sv = r.integer("schema_version");
    if (sv != 1) throw validation_error("config: unsupported schema_version " + std::to_string(sv));
    cfg.schema_version = 1;

    std::string cmd = r.str("command");
    if (cmd == "gen")
        cfg.command = Command::gen;
    else if (cmd == "eval")
        cfg.command = Command::eval;
    else if (cmd == "minimize")
        cfg.command = Command::minimize;
    else if (cmd == "sweep")
        cfg.command = Command::sweep;
    else if (cmd == "cutnorm")
        cfg.command = Command::cutnorm;
    else
        throw validation_error("config: unknown command '" + cmd + "'");

    if (r.has("seed")) cfg.seed = static_cast<std::uint64_t>(r.integer("seed"));
    cfg.threads = static_cast<int>(r.integer_or("threads", 1));
    cfg.prefix = r.str_or("output.prefix", "run");

    // kernel: exactly one source
    int sources = 0;
    if (r.has("kernel.variant")) {
        std::string variant = r.str("kernel.variant");
        cfg.kernel.analytic = confdetail::analytic_from(r, variant);
        validate(*cfg.kernel.analytic);
        ++sources;
    }
    if (r.has("kernel.file")) {
        cfg.kernel.file = r.str("kernel.file");
        ++sources;
    }
    if (r.has("kernel.edges")) {
        cfg.kernel.edges = r.str("kernel.edges");
        cfg.kernel.edges_n = static_cast<int>(r.integer("kernel.n"));
        if (cfg.kernel.edges_n < 1) throw validation_error("config: kernel.n must be >= 1");
        ++sources;
    }
    if (sources != 1)
        throw validation_error("config: give exactly one kernel source (kernel.variant, kernel.file, or "
                               "kernel.edges); got " +
                               std::to_string(sources));
    cfg.kernel.resolution = static_cast<int>(r.integer_or("kernel.resolution", 0));
    if (cfg.kernel.resolution < 0) throw validation_error("config: kernel.resolution must be >= 0");

    if (cfg.command == Command::gen) {
        if (!cfg.kernel.analytic)
            throw validation_error("config: gen needs an inline analytic kernel (kernel.variant)");
        if (cfg.kernel.resolution < 1)
            throw validation_error("config: gen needs kernel.resolution >= 1");
    }

    if (cfg.command == Command::eval) {
        cfg.functional.name = r.str("functional.name");
        static const char* names[] = {"graph_gl",   "graph_dirichlet",   "graph_tv",
                                      "graphon_gl", "graphon_dirichlet", "graphon_tv"};
        bool ok = false;
        for (const char* nm : names) ok = ok || cfg.functional.name == nm;
        if (!ok) throw validation_error("config: unknown functional '" + cfg.functional.name + "'");
        cfg.functional.epsilon = r.number_or("functional.epsilon", 0.1);
        cfg.functional.grid = static_cast<int>(r.integer_or("functional.grid", 256));
        bool has_file = r.has("state.file"), has_measure = r.has("state.measure");
        if (has_file == has_measure)
            throw validation_error("config: eval needs exactly one of state.file or state.measure");
        if (has_file) cfg.state.file = r.str("state.file");
        if (has_measure) cfg.state.measure = r.str("state.measure");
        if (cfg.functional.name.rfind("graph_", 0) == 0 && has_measure)
            throw validation_error("config: graph-level functionals take a step function (state.file)");
    }

    if (cfg.command == Command::minimize) {
        cfg.problem.epsilon = r.number("problem.epsilon");
        cfg.problem.c = r.number_or("problem.c", 0.0);
        std::string space = r.str_or("problem.space", "step");
        if (space == "step")
            cfg.problem.space = StateSpace::step_function;
        else if (space == "two_atom")
            cfg.problem.space = StateSpace::two_atom;
        else
            throw validation_error("config: problem.space must be 'step' or 'two_atom'");
        cfg.problem.resolution = static_cast<int>(r.integer_or("problem.resolution", cfg.kernel.resolution));
        cfg.problem.restarts = static_cast<int>(r.integer_or("problem.restarts", 8));
        if (cfg.problem.restarts < 1) throw validation_error("config: problem.restarts must be >= 1");
        cfg.problem.tol.grad_tol = r.number_or("problem.grad_tol", cfg.problem.tol.grad_tol);
        cfg.problem.tol.constraint_tol = r.number_or("problem.constraint_tol", cfg.problem.tol.constraint_tol);
        cfg.problem.tol.max_iters =
            static_cast<int>(r.integer_or("problem.max_iters", cfg.problem.tol.max_iters));
    }

    if (cfg.command == Command::sweep) {
        cfg.sweep.axis = r.str("sweep.axis");
        cfg.sweep.c = r.number_or("sweep.c", 0.0);
        cfg.sweep.restarts = static_cast<int>(r.integer_or("sweep.restarts", 8));
        if (cfg.sweep.axis == "n") {
            cfg.sweep.ns = r.integers("sweep.points");
            if (cfg.sweep.ns.empty()) throw validation_error("config: sweep.points must be non-empty");
            cfg.sweep.epsilon = r.number("sweep.epsilon");
            std::string f = r.str_or("sweep.functional", "gl");
            if (f == "gl")
                cfg.sweep.functional = SweepFunctional::gl;
            else if (f == "tv")
                cfg.sweep.functional = SweepFunctional::tv;
            else
                throw validation_error("config: sweep.functional must be 'gl' or 'tv'");
        } else if (cfg.sweep.axis == "epsilon") {
            cfg.sweep.epsilons = r.numbers("sweep.points");
            if (cfg.sweep.epsilons.empty()) throw validation_error("config: sweep.points must be non-empty");
            std::string lv = r.str_or("sweep.level", "graph");
            if (lv == "graph")
                cfg.sweep.level = SweepLevel::graph;
            else if (lv == "graphon")
                cfg.sweep.level = SweepLevel::graphon;
            else
                throw validation_error("config: sweep.level must be 'graph' or 'graphon'");
            cfg.sweep.resolution = static_cast<int>(r.integer_or("sweep.resolution", 16));
            if (cfg.sweep.resolution < 1) throw validation_error("config: sweep.resolution must be >= 1");
        } else {
            throw validation_error("config: sweep.axis must be 'n' or 'epsilon'");
        }
    }

    if (cfg.command == Command::cutnorm) {
        cfg.cutnorm.method = r.str_or("cutnorm.method", "auto");
        if (cfg.cutnorm.method != "auto" && cfg.cutnorm.method != "exhaustive" &&
            cfg.cutnorm.method != "heuristic")
            throw validation_error("config: cutnorm.method must be auto, exhaustive, or heuristic");
        cfg.cutnorm.restarts = static_cast<int>(r.integer_or("cutnorm.restarts", 16));
    }

    r.finish();

    // Stochastic commands must be replayable from the recorded seed.
    bool stochastic = cfg.command == Command::minimize || cfg.command == Command::sweep;
    if (stochastic && !cfg.seed)
        throw validation_error("config: command '" + cmd + "' draws random starts; a seed is required");

    return cfg;
}

// File-existence half of validation; paths are resolved against the config
// file's directory by the caller.
inline void check_referenced_files(const RunConfig& cfg, const std::filesystem::path& base) {
    auto must_exist = [&](const std::string& rel, const char* what) {
        if (rel.empty()) return;
        std::filesystem::path p = base / rel;
        if (!std::filesystem::exists(p))
            throw validation_error(std::string(what) + " not found: " + p.string());
    };
    must_exist(cfg.kernel.file, "kernel file");
    must_exist(cfg.kernel.edges, "edge list");
    must_exist(cfg.state.file, "state file");
    must_exist(cfg.state.measure, "measure file");
}

}  // namespace ggl
