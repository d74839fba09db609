#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "causalkit/harness.hpp"
#include "causalkit/io.hpp"

#include <sstream>

using namespace causalkit;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.num_models = 1;
    cfg.n_grid = {200};
    cfg.replicates = 1;
    cfg.base_seed = 5;
    return cfg;
}

std::string strip_runtime_column(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        out += line.substr(0, line.rfind(','));
        out += '\n';
    }
    return out;
}

}  // namespace

TEST_CASE("a minimal sweep yields exactly one row") {
    ExperimentReport rep = run_experiment(tiny_config());
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].model_id == 0);
    CHECK(rep.rows[0].n == 200);
    CHECK(rep.rows[0].replicate == 0);
    CHECK_FALSE(rep.rows[0].error_kind.empty());
    CHECK_FALSE(rep.rows[0].psi_class.empty());
}

TEST_CASE("identical config and seed reproduce the report") {
    ExperimentConfig cfg = tiny_config();
    cfg.num_models = 2;
    cfg.n_grid = {200, 500};
    cfg.replicates = 3;
    cfg.jobs = 4;
    ExperimentReport a = run_experiment(cfg);
    ExperimentReport b = run_experiment(cfg);
    // identical apart from wall-clock runtimes
    CHECK(strip_runtime_column(report_to_csv(a)) == strip_runtime_column(report_to_csv(b)));
}

TEST_CASE("the harness pipeline row is reproducible by hand") {
    ExperimentConfig cfg = tiny_config();
    cfg.n_grid = {1000};
    ExperimentReport rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 1);

    ModelConstraints mc;
    mc.k = cfg.k;
    mc.L = cfg.L;
    mc.T = cfg.T;
    mc.num_vars = cfg.num_vars;
    mc.max_degree = cfg.max_degree;
    mc.cardinality = cfg.cardinality;
    mc.edge_prob = cfg.edge_prob;
    CausalModel model = random_model(cfg.family, mc, mix_seed(cfg.base_seed, 0xA11CEull, 0)).model;
    Dataset ds = sample(model, 1000, mix_seed(cfg.base_seed, 0, 0, 0));
    BinnedCiSource src(ds, TestSchedule{cfg.schedule_c});
    VcsgsOutput out = vcsgs(src);
    EstimatedModel est = edge_estimation(out, ds, cfg.L, cfg.T);
    double d = conditional_probability_distance(est, model);

    CHECK(rep.rows[0].distance == d);  // bit-identical: same code path, same seeds
    CHECK(rep.rows[0].error_kind ==
          to_string(classify_error(out, dag_of(model)).kind));
}

TEST_CASE("config validation") {
    ExperimentConfig cfg = tiny_config();
    cfg.n_grid = {500, 500};
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg = tiny_config();
    cfg.replicates = 0;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg = tiny_config();
    cfg.family = ModelFamily::LinearGaussian;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("psi classification") {
    Dag truth(3);
    truth.add_edge(0, 1);
    truth.add_edge(2, 1);

    SUBCASE("the true pattern is psi1") {
        MixedGraph out({"x0", "x1", "x2"});
        out.add_directed(0, 1);
        out.add_directed(2, 1);
        CHECK(psi_classify(out, truth) == PsiClass::Psi1);
    }
    SUBCASE("a missing edge with the rest correct is psi3") {
        MixedGraph out({"x0", "x1", "x2"});
        out.add_directed(0, 1);
        CHECK(psi_classify(out, truth) == PsiClass::Psi3);
    }
    SUBCASE("a false adjacency is psi2") {
        MixedGraph out({"x0", "x1", "x2"});
        out.add_directed(0, 1);
        out.add_directed(2, 1);
        out.add_undirected(0, 2);
        CHECK(psi_classify(out, truth) == PsiClass::Psi2);
    }
    SUBCASE("a flipped orientation is psi2") {
        MixedGraph out({"x0", "x1", "x2"});
        out.add_directed(1, 0);
        out.add_directed(2, 1);
        CHECK(psi_classify(out, truth) == PsiClass::Psi2);
    }
}

TEST_CASE("every row lands in exactly one psi class") {
    ExperimentConfig cfg = tiny_config();
    cfg.num_models = 2;
    cfg.replicates = 4;
    ExperimentReport rep = run_experiment(cfg);
    for (const ExperimentRow& r : rep.rows)
        CHECK((r.psi_class == "psi1" || r.psi_class == "psi2" || r.psi_class == "psi3"));
}

TEST_CASE("summaries aggregate counts that merge additively") {
    ExperimentReport rep;
    rep.rows = {
        {0, 200, 0, "none", "psi1", 0.05, false, 1},
        {0, 200, 1, "kind1", "psi2", 0.30, true, 1},
        {0, 500, 0, "none", "psi3", 0.02, false, 1},
        {1, 200, 0, "kind2", "psi2", 0.40, true, 1},
    };

    auto by_n = summarize(rep, {"n"});
    REQUIRE(by_n.size() == 2);
    const SummaryRow* n200 = nullptr;
    for (const auto& s : by_n)
        if (s.key == "n=200") n200 = &s;
    REQUIRE(n200);
    CHECK(n200->count == 3);
    CHECK(n200->kind1 == 1);
    CHECK(n200->kind2 == 1);
    CHECK(n200->err_any == 2);
    CHECK(n200->exceeded == 2);
    CHECK(n200->mean_distance() == doctest::Approx(0.25));
    CHECK(n200->err_rate() == doctest::Approx(2.0 / 3));

    // merging two half-reports equals summarizing the concatenation
    ExperimentReport first, second;
    first.rows = {rep.rows[0], rep.rows[1]};
    second.rows = {rep.rows[2], rep.rows[3]};
    auto s1 = summarize(first, {"n"});
    auto s2 = summarize(second, {"n"});
    std::map<std::string, SummaryRow> merged;
    for (const auto& s : s1) merged[s.key] = s;
    for (const auto& s : s2) {
        SummaryRow& t = merged[s.key];
        t.key = s.key;
        t.count += s.count;
        t.err_any += s.err_any;
        t.kind1 += s.kind1;
        t.kind2 += s.kind2;
        t.kind3 += s.kind3;
        t.exceeded += s.exceeded;
        t.sum_distance += s.sum_distance;
    }
    for (const auto& s : by_n) {
        const SummaryRow& t = merged.at(s.key);
        CHECK(t.count == s.count);
        CHECK(t.err_any == s.err_any);
        CHECK(t.exceeded == s.exceeded);
        CHECK(t.sum_distance == doctest::Approx(s.sum_distance));
    }

    CHECK_THROWS_AS(summarize(ExperimentReport{}, {"n"}), std::invalid_argument);
    CHECK_THROWS_AS(summarize(rep, {"bogus"}), std::invalid_argument);
}

TEST_CASE("report CSV carries the fixed header") {
    ExperimentReport rep;
    rep.rows = {{3, 1000, 7, "none", "psi1", 0.125, false, 42}};
    std::string csv = report_to_csv(rep);
    CHECK(csv.rfind("model_id,n,replicate,error_kind,psi_class,distance,exceeded,runtime_ms\n",
                    0) == 0);
    CHECK(csv.find("3,1000,7,none,psi1,0.125,0,42\n") != std::string::npos);
}

TEST_CASE("graph JSON round-trips") {
    MixedGraph g({"a", "b", "c", "d"});
    g.add_directed(0, 1);
    g.add_undirected(1, 2);
    g.add_undirected(2, 3);
    g.set_mark(Triple{1, 2, 3}, TripleMark::Ambiguous);
    g.set_definitely_nonadjacent(0, 3);
    MixedGraph back = mixed_graph_from_json(mixed_graph_to_json(g));
    CHECK(back == g);

    Dag d(3);
    d.add_edge(0, 2);
    d.add_edge(1, 2);
    CHECK(dag_from_json(dag_to_json(d)) == d);

    Pattern p = pattern_of(d);
    CHECK(pattern_from_json(pattern_to_json(p)) == p);
}

TEST_CASE("model JSON round-trips for all three families") {
    ModelConstraints c;
    c.num_vars = 4;
    for (ModelFamily fam :
         {ModelFamily::Discrete, ModelFamily::ContinuousSmooth, ModelFamily::LinearGaussian}) {
        CausalModel m = random_model(fam, c, 7).model;
        Json j = model_to_json(m);
        CausalModel back = model_from_json(j);
        CHECK(model_to_json(back) == j);  // field-level equality through the JSON form
        CHECK(family_of(back) == fam);
        CHECK(dag_of(back) == dag_of(m));
    }
}

TEST_CASE("dataset CSV round-trips exactly with metadata") {
    ModelConstraints c;
    c.num_vars = 3;
    CausalModel m = random_model(ModelFamily::ContinuousSmooth, c, 9).model;
    Dataset ds = sample(m, 50, 1234);
    std::string csv = dataset_to_csv(ds);
    Json meta = dataset_meta_to_json(ds);
    Dataset back = dataset_from_csv(csv, &meta);
    CHECK(back.rows == ds.rows);  // %.17g preserves doubles exactly
    CHECK(back.seed == ds.seed);
    REQUIRE(back.schema.size() == ds.schema.size());
    for (std::size_t i = 0; i < ds.schema.size(); ++i) {
        CHECK(back.schema[i].name == ds.schema[i].name);
        CHECK(back.schema[i].kind == ds.schema[i].kind);
    }

    // schema inference without metadata: discrete stays discrete
    CausalModel dm = random_model(ModelFamily::Discrete, c, 10).model;
    Dataset dds = sample(dm, 60, 1);
    Dataset inferred = dataset_from_csv(dataset_to_csv(dds), nullptr);
    CHECK(inferred.schema[0].kind == ColumnKind::Discrete);
    CHECK(inferred.schema[0].states == 2);
}

TEST_CASE("estimate JSON round-trips") {
    CausalModel m = random_model(ModelFamily::Discrete, ModelConstraints{.num_vars = 4}, 3).model;
    Dataset ds = sample(m, 5000, 77);
    MixedGraph g(dag_of(m).names());
    for (auto [a, b] : dag_of(m).edges()) g.add_directed(a, b);
    EstimatedModel est = edge_estimation(g, ds, 1.0, 0.05);
    EstimatedModel back = estimated_model_from_json(estimated_model_to_json(est));
    CHECK(back.graph == est.graph);
    CHECK(back.tv_violation == est.tv_violation);
    REQUIRE(back.vertices.size() == est.vertices.size());
    for (std::size_t v = 0; v < est.vertices.size(); ++v) {
        CHECK(back.vertices[v].has_value() == est.vertices[v].has_value());
        if (est.vertices[v]) {
            CHECK(back.vertices[v]->parents == est.vertices[v]->parents);
            CHECK(back.vertices[v]->table.values == est.vertices[v]->table.values);
        }
    }
}

TEST_CASE("experiment config JSON round-trips") {
    ExperimentConfig cfg;
    cfg.num_models = 7;
    cfg.n_grid = {100, 400};
    cfg.schedule_c = 0.2;
    cfg.base_seed = 99;
    ExperimentConfig back = experiment_config_from_json(experiment_config_to_json(cfg));
    CHECK(experiment_config_to_json(back) == experiment_config_to_json(cfg));
}

TEST_CASE("trace JSON is an array covering every step") {
    CausalModel m = random_model(ModelFamily::Discrete, ModelConstraints{.num_vars = 4}, 21).model;
    PopulationOracle oracle = population_ci_oracle(m);
    VcsgsOutput out = vcsgs(oracle);
    Json j = trace_to_json(out.trace);
    REQUIRE(j.is_array());
    bool saw_verdict = false;
    for (const auto& e : j) {
        CHECK(e.contains("step"));
        if (e.at("step") == "verdict") saw_verdict = true;
    }
    CHECK(saw_verdict);
}

TEST_CASE("atomic file writes land complete") {
    std::string path = "harness_io_test_scratch.json";
    write_file_atomic(path, "{\"ok\":true}\n");
    CHECK(read_file(path) == "{\"ok\":true}\n");
    std::remove(path.c_str());
}
