#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>

#include "graphgl/config.hpp"
#include "graphgl/io.hpp"
#include "graphgl/sweep.hpp"
#include "oracles.hpp"

using namespace ggl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "graphgl_cfgio_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path scratch(const std::string& name) { return scratch_dir() / name; }

}  // namespace

TEST_CASE("config text subset") {
    toml::Table t = toml::parse(R"(
# comment only
title = "a # not-a-comment"  # trailing comment
count = 3
rate = 0.25
flag = true
[deep.nested]
xs = [1, 2, 3]
ys = [0.5, 1.5]
names = ["a", "b"]
)");
    CHECK(std::get<std::string>(t.at("title").v) == "a # not-a-comment");
    CHECK(std::get<long long>(t.at("count").v) == 3);
    CHECK(std::get<double>(t.at("rate").v) == 0.25);
    CHECK(std::get<bool>(t.at("flag").v) == true);
    CHECK(std::get<toml::Array>(t.at("deep.nested.xs").v).size() == 3);
    CHECK(std::get<toml::Array>(t.at("deep.nested.names").v).size() == 2);

    CHECK_THROWS_WITH_AS(toml::parse("a = 1\na = 2\n"), doctest::Contains("config line 2: duplicate key"),
                         validation_error);
    CHECK_THROWS_WITH_AS(toml::parse("a = [1, 2,]\n"), doctest::Contains("trailing comma"), validation_error);
    CHECK_THROWS_WITH_AS(toml::parse("a = [1, \"x\"]\n"), doctest::Contains("homogeneous"), validation_error);
    CHECK_THROWS_WITH_AS(toml::parse("a = \"oops\n"), doctest::Contains("unterminated string"),
                         validation_error);
    CHECK_THROWS_WITH_AS(toml::parse("\n\nwat\n"), doctest::Contains("config line 3"), validation_error);
    CHECK_THROWS_AS(toml::parse("a = 1 2\n"), validation_error);
    CHECK_THROWS_AS(toml::parse("a.b = 1\n"), validation_error);  // bare keys only
    CHECK_THROWS_AS(toml::parse("[bad\n"), validation_error);
    CHECK_THROWS_AS(toml::parse("a = zzz\n"), validation_error);
    CHECK_THROWS_AS(toml::parse("a = \"bad \\q escape\"\n"), validation_error);
}

TEST_CASE("run configs load strictly") {
    std::string minimize_cfg = R"(
schema_version = 1
command = "minimize"
seed = 7
[kernel]
variant = "constant"
p = 0.5
resolution = 16
[problem]
epsilon = 0.1
c = 0.3
restarts = 4
)";
    RunConfig cfg = load_run_config(minimize_cfg);
    CHECK(cfg.command == Command::minimize);
    REQUIRE(cfg.seed.has_value());
    CHECK(*cfg.seed == 7);
    CHECK(cfg.problem.restarts == 4);
    CHECK(cfg.problem.c == 0.3);
    CHECK(cfg.problem.resolution == 16);  // inherited from the kernel
    REQUIRE(cfg.kernel.analytic.has_value());
    CHECK(std::holds_alternative<Constant>(*cfg.kernel.analytic));

    CHECK_THROWS_WITH_AS(load_run_config(minimize_cfg + "\nbogus = 1\n"), doctest::Contains("unknown key"),
                         validation_error);
    CHECK_THROWS_WITH_AS(load_run_config("schema_version = 2\ncommand = \"gen\"\n"),
                         doctest::Contains("schema_version"), validation_error);

    // stochastic commands insist on a recorded seed
    CHECK_THROWS_WITH_AS(load_run_config(R"(
schema_version = 1
command = "sweep"
[kernel]
variant = "constant"
p = 1.0
[sweep]
axis = "n"
points = [8, 16]
epsilon = 0.1
)"),
                         doctest::Contains("seed"), validation_error);

    CHECK_THROWS_WITH_AS(load_run_config(R"(
schema_version = 1
command = "sweep"
seed = 1
[kernel]
variant = "constant"
p = 1.0
[sweep]
axis = "epsilon"
points = []
)"),
                         doctest::Contains("non-empty"), validation_error);

    // exactly one kernel source
    CHECK_THROWS_WITH_AS(load_run_config(R"(
schema_version = 1
command = "cutnorm"
[kernel]
variant = "constant"
p = 0.5
file = "adj.csv"
)"),
                         doctest::Contains("exactly one kernel source"), validation_error);

    // eval: functional whitelist, one state source, measures only at the graphon level
    std::string eval_head = R"(
schema_version = 1
command = "eval"
[kernel]
variant = "constant"
p = 0.5
resolution = 8
[functional]
)";
    CHECK_THROWS_WITH_AS(load_run_config(eval_head + "name = \"nope\"\n[state]\nfile = \"u.csv\"\n"),
                         doctest::Contains("unknown functional"), validation_error);
    CHECK_THROWS_WITH_AS(
        load_run_config(eval_head + "name = \"graph_gl\"\n[state]\nfile = \"u.csv\"\nmeasure = \"m.json\"\n"),
        doctest::Contains("exactly one of"), validation_error);
    CHECK_THROWS_WITH_AS(load_run_config(eval_head + "name = \"graph_tv\"\n[state]\nmeasure = \"m.json\"\n"),
                         doctest::Contains("step function"), validation_error);
    RunConfig ev = load_run_config(eval_head + "name = \"graphon_gl\"\n[state]\nmeasure = \"m.json\"\n");
    CHECK(ev.functional.epsilon == 0.1);
    CHECK(ev.state.measure == "m.json");

    // gen requires an analytic kernel and a resolution
    CHECK_THROWS_WITH_AS(load_run_config(R"(
schema_version = 1
command = "gen"
[kernel]
variant = "constant"
p = 0.5
)"),
                         doctest::Contains("resolution"), validation_error);

    RunConfig cut = load_run_config(R"(
schema_version = 1
command = "cutnorm"
[kernel]
variant = "bipartite"
a = 0.5
resolution = 12
[cutnorm]
method = "exhaustive"
)");
    CHECK(cut.cutnorm.method == "exhaustive");
    CHECK(cut.cutnorm.restarts == 16);
    CHECK_THROWS_WITH_AS(load_run_config(R"(
schema_version = 1
command = "cutnorm"
[kernel]
variant = "constant"
p = 0.5
resolution = 4
[cutnorm]
method = "magic"
)"),
                         doctest::Contains("cutnorm.method"), validation_error);
}

TEST_CASE("referenced files resolve against the config directory") {
    fs::path base = scratch_dir();
    write_adjacency_csv(base / "ref_adj.csv", oracles::four_cycle());
    RunConfig cfg = load_run_config(R"(
schema_version = 1
command = "cutnorm"
[kernel]
file = "ref_adj.csv"
)");
    CHECK_NOTHROW(check_referenced_files(cfg, base));
    cfg.kernel.file = "missing_adj.csv";
    CHECK_THROWS_WITH_AS(check_referenced_files(cfg, base), doctest::Contains("missing_adj.csv"),
                         validation_error);
}

TEST_CASE("adjacency files") {
    StepGraphon g = sample_step_graphon(Sbm2x2{0.9, 0.1, 0.7, 0.5}, 8);
    write_adjacency_csv(scratch("adj.csv"), g);
    StepGraphon g2 = read_adjacency_csv(scratch("adj.csv"));
    CHECK(g2.n == 8);
    CHECK(kernel_hash(g2) == kernel_hash(g));

    atomic_write_file(scratch("ragged.csv"), "0,1\n1\n");
    CHECK_THROWS_WITH_AS(read_adjacency_csv(scratch("ragged.csv")), doctest::Contains("row 2"),
                         validation_error);
    atomic_write_file(scratch("alpha.csv"), "0,x\n1,0\n");
    CHECK_THROWS_WITH_AS(read_adjacency_csv(scratch("alpha.csv")), doctest::Contains("column 2"),
                         validation_error);
    atomic_write_file(scratch("asym.csv"), "0,1\n0.5,0\n");
    CHECK_THROWS_AS(read_adjacency_csv(scratch("asym.csv")), validation_error);
    atomic_write_file(scratch("neg.csv"), "0,-1\n-1,0\n");
    CHECK_THROWS_AS(read_adjacency_csv(scratch("neg.csv")), validation_error);
    atomic_write_file(scratch("empty.csv"), "");
    CHECK_THROWS_AS(read_adjacency_csv(scratch("empty.csv")), validation_error);
}

TEST_CASE("edge lists") {
    atomic_write_file(scratch("edges.txt"), "1 2 0.5\n2 3 1.0\n\n3 1 0.25\n");
    StepGraphon g = read_edge_list(scratch("edges.txt"), 3);
    CHECK(g.at(0, 1) == 0.5);
    CHECK(g.at(1, 0) == 0.5);
    CHECK(g.at(2, 0) == 0.25);
    CHECK(g.at(0, 0) == 0.0);

    CHECK_THROWS_WITH_AS(read_edge_list(scratch("edges.txt"), 2), doctest::Contains("out of range"),
                         validation_error);
    atomic_write_file(scratch("edges_dup.txt"), "1 2 0.5\n2 1 0.5\n");
    CHECK_THROWS_WITH_AS(read_edge_list(scratch("edges_dup.txt"), 3), doctest::Contains("duplicate edge"),
                         validation_error);
    atomic_write_file(scratch("edges_bad.txt"), "1 2\n");
    CHECK_THROWS_WITH_AS(read_edge_list(scratch("edges_bad.txt"), 3), doctest::Contains("expected 'i j w'"),
                         validation_error);
    atomic_write_file(scratch("edges_extra.txt"), "1 2 0.5 9\n");
    CHECK_THROWS_AS(read_edge_list(scratch("edges_extra.txt"), 3), validation_error);
}

TEST_CASE("step-function files") {
    StepFunction u{{0.25, -1.0, 1.0, 0.974679434480896}};
    write_step_function_csv(scratch("state.csv"), u);
    StepFunction u2 = read_step_function_csv(scratch("state.csv"));
    CHECK(u2.values == u.values);

    // the header row is optional on ingest
    atomic_write_file(scratch("bare.csv"), "0.5\n-0.5\n");
    CHECK(read_step_function_csv(scratch("bare.csv")).values == std::vector<double>{0.5, -0.5});
    atomic_write_file(scratch("nan_state.csv"), "value\n0.5\noops\n");
    CHECK_THROWS_WITH_AS(read_step_function_csv(scratch("nan_state.csv")), doctest::Contains("line 3"),
                         validation_error);
    atomic_write_file(scratch("header_only.csv"), "value\n");
    CHECK_THROWS_AS(read_step_function_csv(scratch("header_only.csv")), validation_error);
}

TEST_CASE("measure JSON is lossless") {
    YoungMeasure nu;
    nu.cells.push_back(DeltaCell{0.3});
    nu.cells.push_back(TwoAtomCell{0.974679434480896, -0.974679434480896, 0.653882032022076});
    nu.cells.push_back(GridCell{{-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25}});
    ordered_json mj = measure_to_json(nu);
    CHECK(mj["kind"] == "mixed");
    CHECK(mj["cells"] == 3);
    CHECK(validate_output_json(mj) == "young_measure/1");

    YoungMeasure nu2 = measure_from_json(ordered_json::parse(mj.dump()));
    const auto& t2 = std::get<TwoAtomCell>(nu2.cells[1]);
    CHECK(t2.a == 0.974679434480896);
    CHECK(t2.theta == 0.653882032022076);
    const auto& g2 = std::get<GridCell>(nu2.cells[2]);
    CHECK(g2.weights == std::vector<double>{0.25, 0.5, 0.25});

    // random measures survive a dump/parse cycle bit for bit
    for (int t = 0; t < 50; ++t) {
        auto rng = rng_for(9200 + std::uint64_t(t), 0);
        YoungMeasure m;
        int cells = 1 + int(rng() % 5);
        for (int i = 0; i < cells; ++i) {
            switch (rng() % 3) {
                case 0:
                    m.cells.push_back(DeltaCell{uniform_pm1(rng)});
                    break;
                case 1:
                    m.cells.push_back(TwoAtomCell{uniform_pm1(rng), uniform_pm1(rng), uniform01(rng)});
                    break;
                default: {
                    double w0 = uniform01(rng) + 0.01, w1 = uniform01(rng) + 0.01;
                    GridCell g{{uniform_pm1(rng), uniform_pm1(rng)}, {w0 / (w0 + w1), 0.0}};
                    g.weights[1] = 1.0 - g.weights[0];
                    m.cells.push_back(std::move(g));
                }
            }
        }
        YoungMeasure back = measure_from_json(ordered_json::parse(measure_to_json(m).dump()));
        REQUIRE(back.cells.size() == m.cells.size());
        for (std::size_t i = 0; i < m.cells.size(); ++i) {
            for (int k : {1, 2, 4})
                CHECK(detail::cell_moment(back.cells[i], k) == detail::cell_moment(m.cells[i], k));
        }
    }

    ordered_json bad = measure_to_json(nu);
    bad["data"][2]["weights"] = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(measure_from_json(bad), validation_error);
    bad = measure_to_json(nu);
    bad["cells"] = 5;
    CHECK_THROWS_AS(measure_from_json(bad), validation_error);
    bad = measure_to_json(nu);
    bad["data"][0]["kind"] = "mystery";
    CHECK_THROWS_AS(measure_from_json(bad), validation_error);
}

TEST_CASE("analytic kernel descriptors") {
    std::vector<AnalyticGraphon> kernels = {Constant{0.42}, Sbm2x2{0.9, 0.1, 0.7, 0.25}, Bipartite{0.3},
                                            Community{0.5}, PowerKernel{0.3, 1e3}};
    for (const AnalyticGraphon& g : kernels) {
        AnalyticGraphon back = analytic_kernel_from_json(ordered_json::parse(analytic_kernel_json(g).dump()));
        CHECK(back.index() == g.index());
        StepGraphon a = sample_step_graphon(g, 6), b = sample_step_graphon(back, 6);
        CHECK(kernel_hash(a) == kernel_hash(b));
    }
    ordered_json j;
    j["variant"] = "mystery";
    CHECK_THROWS_WITH_AS(analytic_kernel_from_json(j), doctest::Contains("unknown kernel variant"),
                         validation_error);

    StepGraphon s = sample_step_graphon(Constant{0.5}, 16);
    ordered_json d = kernel_descriptor_json(Constant{0.5}, 16, s);
    CHECK(validate_output_json(d) == "kernel_descriptor/1");
    CHECK(d["n"] == 16);
    CHECK(d["kernel_hash"].get<std::string>().size() == 16);
}

TEST_CASE("report serialization and re-validation") {
    StepGraphon g = sample_step_graphon(Sbm2x2{0.9, 0.1, 0.7, 0.5}, 8);
    EnergyReport er = graph_gl(g, StepFunction{std::vector<double>(8, 0.3)}, 0.1);
    ordered_json ej = energy_to_json(er);
    CHECK(validate_output_json(ej) == "energy_report/1");
    CHECK(energy_csv(er).rfind("total,dirichlet,doublewell,finite\n", 0) == 0);

    // an infinite report keeps the JSON finite-valued
    EnergyReport inf = graph_tv(g, StepFunction{std::vector<double>(8, 0.3)});
    ordered_json ij = energy_to_json(inf);
    CHECK(ij["finite"] == false);
    CHECK(ij["total"].is_number());
    CHECK(energy_csv(inf).find("false") != std::string::npos);

    MinimizeProblem prob;
    prob.kernel = AnalyticGraphon{Constant{0.5}};
    prob.resolution = 8;
    prob.epsilon = 0.1;
    prob.volume_c = 0.3;
    prob.restarts = 2;
    prob.seed = 11;
    MinimizerResult mr = minimize(prob);
    ordered_json mrj = minimizer_to_json(mr);
    CHECK(validate_output_json(mrj) == "minimizer_result/1");
    CHECK(restart_csv(mr).rfind("restart,energy,converged,iterations\n", 0) == 0);
    CHECK(mrj["restart_log"].size() == 2);

    SweepResult sr = run_n_sweep(Constant{1.0}, 0.5, 0.9, {4, 8}, SweepFunctional::gl, 2, 5);
    ordered_json srj = sweep_to_json(sr);
    CHECK(validate_output_json(srj) == "sweep_result/1");
    CHECK(sweep_csv(sr).rfind("parameter,energy,gap,narrow_distance,converged\n", 0) == 0);

    // identical runs give byte-identical documents
    SweepResult sr2 = run_n_sweep(Constant{1.0}, 0.5, 0.9, {4, 8}, SweepFunctional::gl, 2, 5);
    CHECK(sweep_to_json(sr2).dump(2) == srj.dump(2));

    CutNormEstimate ce = cut_norm_exact(g);
    CHECK(validate_output_json(cutnorm_to_json(ce)) == "cut_norm/1");

    // validation rejects mangled documents
    ordered_json broken = ej;
    broken.erase("dirichlet");
    CHECK_THROWS_WITH_AS(validate_output_json(broken), doctest::Contains("missing key"), validation_error);
    broken = ej;
    broken["total"] = "lots";
    CHECK_THROWS_AS(validate_output_json(broken), validation_error);
    broken = mrj;
    broken["energy"].erase("finite");
    CHECK_THROWS_AS(validate_output_json(broken), validation_error);
    ordered_json untagged;
    untagged["x"] = 1;
    CHECK_THROWS_WITH_AS(validate_output_json(untagged), doctest::Contains("schema"), validation_error);
    ordered_json alien;
    alien["schema"] = "wat/9";
    CHECK_THROWS_WITH_AS(validate_output_json(alien), doctest::Contains("unknown schema"), validation_error);
}

TEST_CASE("plot columns") {
    write_plot_columns(scratch("plot.dat"), {1.0, 2.0}, {0.5, 0.25});
    std::string text = read_file(scratch("plot.dat"));
    CHECK(text == "1 0.5\n2 0.25\n");
    CHECK_THROWS_AS(write_plot_columns(scratch("plot.dat"), {1.0}, {}), validation_error);
}
