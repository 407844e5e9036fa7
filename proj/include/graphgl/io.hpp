#pragma once
// File formats. CSV uses '.' decimals and comma delimiters; matrices are bare
// n x n grids, single-column tables carry a header row. Every JSON document
// carries a "schema" tag and can be re-checked with validate_output_json
// before anything downstream trusts it. All writes go through a temp file +
// rename so a crash never leaves a half-written artifact behind.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "graphon.hpp"
#include "minimize.hpp"
#include "sweep.hpp"
#include "young_measure.hpp"

namespace ggl {

using ordered_json = nlohmann::ordered_json;

namespace iodetail {

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& tok, double& out) {
    const char* b = tok.data();
    const char* e = b + tok.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && p == e;
}

inline std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t pos = text.find('\n', start);
        if (pos == std::string::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    while (!out.empty() && trim(out.back()).empty()) out.pop_back();
    return out;
}

}  // namespace iodetail

// --- kernels ------------------------------------------------------------------

inline StepGraphon read_adjacency_csv(const std::filesystem::path& path) {
    std::vector<std::string> lines = iodetail::lines_of(read_file(path));
    if (lines.empty()) throw validation_error("adjacency file is empty: " + path.string());
    const int n = static_cast<int>(lines.size());
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> cells = iodetail::split_line(lines[i], ',');
        if (static_cast<int>(cells.size()) != n)
            throw validation_error(path.string() + " row " + std::to_string(i + 1) + ": expected " +
                                   std::to_string(n) + " columns, got " + std::to_string(cells.size()));
        for (int j = 0; j < n; ++j) {
            double v;
            if (!iodetail::parse_double(cells[j], v))
                throw validation_error(path.string() + " row " + std::to_string(i + 1) + " column " +
                                       std::to_string(j + 1) + ": cannot parse '" + cells[j] + "'");
            w.push_back(v);
        }
    }
    return step_from_adjacency(n, std::move(w));
}

inline void write_adjacency_csv(const std::filesystem::path& path, const StepGraphon& g) {
    std::string out;
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            if (j) out += ',';
            out += iodetail::fmt(g.at(i, j));
        }
        out += '\n';
    }
    atomic_write_file(path, out);
}

// Lines "i j w", 1-based, whitespace separated; blank lines skipped. The same
// unordered pair listed twice is an error rather than a silent overwrite.
inline StepGraphon read_edge_list(const std::filesystem::path& path, int n) {
    if (n < 1) throw validation_error("edge list ingestion needs n >= 1");
    std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
    std::set<std::pair<int, int>> seen;
    std::vector<std::string> lines = iodetail::lines_of(read_file(path));
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::string line = iodetail::trim(lines[ln]);
        if (line.empty()) continue;
        long long i = 0, j = 0;
        double val = 0.0;
        char extra = 0;
        int got = std::sscanf(line.c_str(), "%lld %lld %lf %c", &i, &j, &val, &extra);
        if (got != 3)
            throw validation_error(path.string() + " line " + std::to_string(ln + 1) +
                                   ": expected 'i j w', got '" + line + "'");
        if (i < 1 || i > n || j < 1 || j > n)
            throw validation_error(path.string() + " line " + std::to_string(ln + 1) + ": index out of range for n=" +
                                   std::to_string(n));
        int lo = static_cast<int>(std::min(i, j)), hi = static_cast<int>(std::max(i, j));
        if (!seen.insert({lo, hi}).second)
            throw validation_error(path.string() + " line " + std::to_string(ln + 1) + ": duplicate edge " +
                                   std::to_string(i) + " " + std::to_string(j));
        w[static_cast<std::size_t>(i - 1) * n + (j - 1)] = val;
        w[static_cast<std::size_t>(j - 1) * n + (i - 1)] = val;
    }
    return step_from_adjacency(n, std::move(w));
}

inline ordered_json analytic_kernel_json(const AnalyticGraphon& g) {
    ordered_json j;
    if (const auto* c = std::get_if<Constant>(&g)) {
        j["variant"] = "constant";
        j["p"] = c->p;
    } else if (const auto* s = std::get_if<Sbm2x2>(&g)) {
        j["variant"] = "sbm";
        j["a11"] = s->a11;
        j["a12"] = s->a12;
        j["a22"] = s->a22;
        j["split"] = s->split;
    } else if (const auto* b = std::get_if<Bipartite>(&g)) {
        j["variant"] = "bipartite";
        j["a"] = b->a;
    } else if (const auto* cm = std::get_if<Community>(&g)) {
        j["variant"] = "community";
        j["a"] = cm->a;
    } else {
        const auto& p = std::get<PowerKernel>(g);
        j["variant"] = "power";
        j["s"] = p.s;
        j["cap"] = p.cap;
    }
    return j;
}

inline AnalyticGraphon analytic_kernel_from_json(const ordered_json& j) {
    std::string variant = j.at("variant").get<std::string>();
    AnalyticGraphon g;
    if (variant == "constant")
        g = Constant{j.at("p").get<double>()};
    else if (variant == "sbm")
        g = Sbm2x2{j.at("a11").get<double>(), j.at("a12").get<double>(), j.at("a22").get<double>(),
                   j.at("split").get<double>()};
    else if (variant == "bipartite")
        g = Bipartite{j.at("a").get<double>()};
    else if (variant == "community")
        g = Community{j.at("a").get<double>()};
    else if (variant == "power")
        g = PowerKernel{j.at("s").get<double>(), j.at("cap").get<double>()};
    else
        throw validation_error("unknown kernel variant in JSON: '" + variant + "'");
    validate(g);
    return g;
}

// Descriptor written next to a sampled matrix: what it was sampled from, at
// which resolution, and the hash of the resulting entries.
inline ordered_json kernel_descriptor_json(const AnalyticGraphon& g, int resolution,
                                           const StepGraphon& sampled) {
    ordered_json j;
    j["schema"] = "kernel_descriptor/1";
    j["kernel"] = analytic_kernel_json(g);
    j["resolution"] = resolution;
    j["n"] = sampled.n;
    j["kernel_hash"] = hash_hex(kernel_hash(sampled));
    return j;
}

// --- states ---------------------------------------------------------------

inline StepFunction read_step_function_csv(const std::filesystem::path& path) {
    std::vector<std::string> lines = iodetail::lines_of(read_file(path));
    StepFunction u;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::string tok = iodetail::trim(lines[ln]);
        if (tok.empty()) continue;
        double v;
        if (!iodetail::parse_double(tok, v)) {
            if (ln == 0 && tok == "value") continue;  // header row
            throw validation_error(path.string() + " line " + std::to_string(ln + 1) +
                                   ": cannot parse '" + tok + "'");
        }
        u.values.push_back(v);
    }
    if (u.values.empty()) throw validation_error("state file has no values: " + path.string());
    return u;
}

inline void write_step_function_csv(const std::filesystem::path& path, const StepFunction& u) {
    std::string out = "value\n";
    for (double v : u.values) {
        out += iodetail::fmt(v);
        out += '\n';
    }
    atomic_write_file(path, out);
}

inline ordered_json measure_to_json(const YoungMeasure& nu) {
    ordered_json cells = ordered_json::array();
    std::string common;
    bool uniform = true;
    for (const MeasureCell& c : nu.cells) {
        ordered_json jc;
        std::string kind;
        if (const auto* d = std::get_if<DeltaCell>(&c)) {
            kind = "delta";
            jc["kind"] = kind;
            jc["value"] = d->value;
        } else if (const auto* t = std::get_if<TwoAtomCell>(&c)) {
            kind = "two_atom";
            jc["kind"] = kind;
            jc["a"] = t->a;
            jc["b"] = t->b;
            jc["theta"] = t->theta;
        } else {
            const auto& g = std::get<GridCell>(c);
            kind = "grid";
            jc["kind"] = kind;
            jc["atoms"] = g.atoms;
            jc["weights"] = g.weights;
        }
        if (common.empty())
            common = kind;
        else if (common != kind)
            uniform = false;
        cells.push_back(std::move(jc));
    }
    ordered_json j;
    j["schema"] = "young_measure/1";
    j["cells"] = nu.m();
    j["kind"] = uniform ? common : std::string("mixed");
    j["data"] = std::move(cells);
    return j;
}

inline YoungMeasure measure_from_json(const ordered_json& j) {
    if (!j.contains("data") || !j.at("data").is_array())
        throw validation_error("measure JSON: missing 'data' array");
    YoungMeasure nu;
    for (const auto& jc : j.at("data")) {
        std::string kind = jc.at("kind").get<std::string>();
        if (kind == "delta") {
            nu.cells.push_back(DeltaCell{jc.at("value").get<double>()});
        } else if (kind == "two_atom") {
            nu.cells.push_back(
                TwoAtomCell{jc.at("a").get<double>(), jc.at("b").get<double>(), jc.at("theta").get<double>()});
        } else if (kind == "grid") {
            GridCell g;
            g.atoms = jc.at("atoms").get<std::vector<double>>();
            g.weights = jc.at("weights").get<std::vector<double>>();
            nu.cells.push_back(std::move(g));
        } else {
            throw validation_error("measure JSON: unknown cell kind '" + kind + "'");
        }
    }
    if (j.contains("cells") && j.at("cells").get<int>() != nu.m())
        throw validation_error("measure JSON: 'cells' disagrees with data length");
    validate(nu);
    return nu;
}

inline YoungMeasure read_measure_json(const std::filesystem::path& path) {
    ordered_json j = ordered_json::parse(read_file(path), nullptr, true, /*ignore_comments=*/false);
    return measure_from_json(j);
}

// --- reports ----------------------------------------------------------------

inline ordered_json energy_to_json(const EnergyReport& r) {
    ordered_json j;
    j["schema"] = "energy_report/1";
    j["total"] = r.total;
    j["dirichlet"] = r.dirichlet;
    j["doublewell"] = r.doublewell;
    if (r.epsilon)
        j["epsilon"] = *r.epsilon;
    else
        j["epsilon"] = nullptr;
    j["finite"] = r.finite;
    if (r.quadrature_gap)
        j["quadrature_gap"] = *r.quadrature_gap;
    else
        j["quadrature_gap"] = nullptr;
    return j;
}

inline std::string energy_csv(const EnergyReport& r) {
    std::string out = "total,dirichlet,doublewell,finite\n";
    out += iodetail::fmt(r.total);
    out += ',';
    out += iodetail::fmt(r.dirichlet);
    out += ',';
    out += iodetail::fmt(r.doublewell);
    out += ',';
    out += r.finite ? "true" : "false";
    out += '\n';
    return out;
}

inline ordered_json state_to_json(const MinimizerState& s) {
    if (const auto* u = std::get_if<StepFunction>(&s)) {
        ordered_json j;
        j["kind"] = "step_function";
        j["values"] = u->values;
        return j;
    }
    return measure_to_json(std::get<YoungMeasure>(s));
}

inline ordered_json minimizer_to_json(const MinimizerResult& r) {
    ordered_json j;
    j["schema"] = "minimizer_result/1";
    j["state"] = state_to_json(r.state);
    j["energy"] = energy_to_json(r.energy);
    j["constraint_residual"] = r.constraint_residual;
    j["multiplier"] = r.multiplier;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["trace"] = r.trace;
    ordered_json log = ordered_json::array();
    for (const RestartRecord& rec : r.restart_log) {
        ordered_json e;
        e["restart"] = rec.restart;
        e["energy"] = rec.energy;
        e["converged"] = rec.converged;
        e["iterations"] = rec.iterations;
        log.push_back(std::move(e));
    }
    j["restart_log"] = std::move(log);
    if (r.v_space_energy)
        j["v_space_energy"] = *r.v_space_energy;
    else
        j["v_space_energy"] = nullptr;
    return j;
}

inline std::string restart_csv(const MinimizerResult& r) {
    std::string out = "restart,energy,converged,iterations\n";
    for (const RestartRecord& rec : r.restart_log) {
        out += std::to_string(rec.restart);
        out += ',';
        out += iodetail::fmt(rec.energy);
        out += ',';
        out += rec.converged ? "true" : "false";
        out += ',';
        out += std::to_string(rec.iterations);
        out += '\n';
    }
    return out;
}

inline ordered_json sweep_to_json(const SweepResult& r) {
    ordered_json j;
    j["schema"] = "sweep_result/1";
    j["axis"] = r.axis;
    j["reference"] = r.reference;
    ordered_json pts = ordered_json::array();
    for (const SweepPoint& p : r.points) {
        ordered_json e;
        e["parameter"] = p.parameter;
        e["energy"] = p.result.energy.total;
        e["reference_energy"] = p.reference_energy;
        e["energy_gap"] = p.energy_gap;
        e["narrow_distance"] = p.narrow_distance;
        e["result"] = minimizer_to_json(p.result);
        pts.push_back(std::move(e));
    }
    j["points"] = std::move(pts);
    return j;
}

inline std::string sweep_csv(const SweepResult& r) {
    std::string out = "parameter,energy,gap,narrow_distance,converged\n";
    for (const SweepPoint& p : r.points) {
        out += iodetail::fmt(p.parameter);
        out += ',';
        out += iodetail::fmt(p.result.energy.total);
        out += ',';
        out += iodetail::fmt(p.energy_gap);
        out += ',';
        out += iodetail::fmt(p.narrow_distance);
        out += ',';
        out += p.result.converged ? "true" : "false";
        out += '\n';
    }
    return out;
}

inline ordered_json cutnorm_to_json(const CutNormEstimate& e) {
    ordered_json j;
    j["schema"] = "cut_norm/1";
    j["value"] = e.value;
    j["method"] = e.method;
    j["is_exact"] = e.is_exact;
    j["subset"] = e.subset;
    j["f"] = e.f;
    j["g"] = e.g;
    return j;
}

// Two space-separated columns per line, ready for `plot "file" with lines`.
inline void write_plot_columns(const std::filesystem::path& path, const std::vector<double>& x,
                               const std::vector<double>& y) {
    if (x.size() != y.size()) throw validation_error("plot columns have mismatched lengths");
    std::string out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out += iodetail::fmt(x[i]);
        out += ' ';
        out += iodetail::fmt(y[i]);
        out += '\n';
    }
    atomic_write_file(path, out);
}

inline void write_json(const std::filesystem::path& path, const ordered_json& j) {
    atomic_write_file(path, j.dump(2) + "\n");
}

// Re-check a document against the schema its tag declares. Returns the tag.
inline std::string validate_output_json(const ordered_json& j) {
    if (!j.contains("schema") || !j.at("schema").is_string())
        throw validation_error("output JSON has no schema tag");
    std::string schema = j.at("schema").get<std::string>();
    auto need = [&](const char* key) {
        if (!j.contains(key))
            throw validation_error("schema " + schema + ": missing key '" + key + "'");
    };
    auto need_number = [&](const char* key) {
        need(key);
        if (!j.at(key).is_number())
            throw validation_error("schema " + schema + ": key '" + key + "' must be a number");
    };
    if (schema == "energy_report/1") {
        need_number("total");
        need_number("dirichlet");
        need_number("doublewell");
        need("epsilon");
        need("finite");
        if (!j.at("finite").is_boolean())
            throw validation_error("schema energy_report/1: 'finite' must be a boolean");
    } else if (schema == "minimizer_result/1") {
        need("state");
        need("energy");
        validate_output_json(j.at("energy"));
        need_number("constraint_residual");
        need_number("multiplier");
        need("converged");
        need("iterations");
        need("trace");
        need("restart_log");
        if (!j.at("restart_log").is_array())
            throw validation_error("schema minimizer_result/1: 'restart_log' must be an array");
    } else if (schema == "sweep_result/1") {
        need("axis");
        need("reference");
        need("points");
        if (!j.at("points").is_array())
            throw validation_error("schema sweep_result/1: 'points' must be an array");
        for (const auto& p : j.at("points")) {
            for (const char* k : {"parameter", "energy", "reference_energy", "energy_gap", "narrow_distance"})
                if (!p.contains(k) || !p.at(k).is_number())
                    throw validation_error("schema sweep_result/1: point missing number '" + std::string(k) +
                                           "'");
            if (p.contains("result")) validate_output_json(p.at("result"));
        }
    } else if (schema == "young_measure/1") {
        need("cells");
        need("kind");
        need("data");
        if (!j.at("data").is_array())
            throw validation_error("schema young_measure/1: 'data' must be an array");
    } else if (schema == "kernel_descriptor/1") {
        need("kernel");
        need("resolution");
        need("n");
        need("kernel_hash");
    } else if (schema == "cut_norm/1") {
        need_number("value");
        need("method");
        need("is_exact");
        need("subset");
        need("f");
        need("g");
    } else {
        throw validation_error("unknown schema tag '" + schema + "'");
    }
    return schema;
}

}  // namespace ggl
