// causalkit command line: model generation, sampling, structure discovery,
// edge estimation, evaluation and experiment sweeps.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure. Every subcommand
// echoes its resolved options to <out>.meta.json. TC_LOG=debug|info|warn|error
// controls stderr verbosity.

#include "causalkit/io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

using namespace causalkit;

namespace {

int log_level() {
    static int level = [] {
        const char* env = std::getenv("TC_LOG");
        std::string s = env ? env : "warn";
        if (s == "debug") return 3;
        if (s == "info") return 2;
        if (s == "warn") return 1;
        return 0;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 2) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

void write_with_meta(const std::string& path, const std::string& content, const Json& meta) {
    write_file_atomic(path, content);
    write_file_atomic(path + ".meta.json", meta.dump(2) + "\n");
}

ModelFamily parse_family(const std::string& s) {
    if (s == "discrete") return ModelFamily::Discrete;
    if (s == "smooth" || s == "continuous_smooth") return ModelFamily::ContinuousSmooth;
    if (s == "gaussian" || s == "linear_gaussian") return ModelFamily::LinearGaussian;
    throw std::invalid_argument("unknown family (expected discrete, smooth or gaussian): " + s);
}

Dataset load_dataset(const std::string& path) {
    std::string csv = read_file(path);
    std::string meta_path = path + ".meta.json";
    std::ifstream probe(meta_path);
    if (probe.good()) {
        Json meta = Json::parse(read_file(meta_path));
        return dataset_from_csv(csv, &meta);
    }
    return dataset_from_csv(csv, nullptr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conservative causal discovery and edge estimation toolkit"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate a random model in the assumption family");
    std::string gen_family = "discrete", gen_out;
    ModelConstraints gen_c;
    std::uint64_t gen_seed = 0;
    gen->add_option("--family", gen_family, "discrete | smooth | gaussian");
    gen->add_option("--vars", gen_c.num_vars, "variable count");
    gen->add_option("--k", gen_c.k, "triangle-faithfulness constant");
    gen->add_option("--L", gen_c.L, "smoothness bound");
    gen->add_option("--T", gen_c.T, "density floor");
    gen->add_option("--max-degree", gen_c.max_degree, "max vertex degree");
    gen->add_option("--cardinality", gen_c.cardinality, "states per discrete variable");
    gen->add_option("--edge-prob", gen_c.edge_prob, "edge probability per ordered pair");
    gen->add_option("--attempts", gen_c.max_attempts, "rejection budget");
    gen->add_option("--seed", gen_seed, "generator seed")->required();
    gen->add_option("--out", gen_out, "model JSON path")->required();

    // sample
    auto* smp = app.add_subcommand("sample", "draw an i.i.d. sample from a model");
    std::string smp_model, smp_out;
    int smp_n = 0;
    std::uint64_t smp_seed = 0;
    smp->add_option("--model", smp_model, "model JSON path")->required();
    smp->add_option("--n", smp_n, "sample size")->required();
    smp->add_option("--seed", smp_seed, "sampling seed")->required();
    smp->add_option("--out", smp_out, "dataset CSV path")->required();

    // discover
    auto* dis = app.add_subcommand("discover", "run the conservative structure search");
    std::string dis_data, dis_out, dis_trace, dis_test = "binned";
    double dis_c = kDefaultScheduleC, dis_alpha = 0.01;
    int dis_min_n = 50;
    dis->add_option("--data", dis_data, "dataset CSV path")->required();
    dis->add_option("--schedule-c", dis_c, "binned-test threshold multiplier");
    dis->add_option("--test", dis_test, "binned | fisherz");
    dis->add_option("--alpha", dis_alpha, "fisher-z alpha");
    dis->add_option("--min-n", dis_min_n, "minimum sample size for the binned test");
    dis->add_option("--out", dis_out, "graph JSON path")->required();
    dis->add_option("--trace", dis_trace, "trace JSON path");

    // estimate
    auto* est =
        app.add_subcommand("estimate", "estimate parent conditionals on a discovered graph");
    std::string est_data, est_graph, est_out;
    double est_L = 1.0, est_T = 0.05;
    est->add_option("--data", est_data, "dataset CSV path")->required();
    est->add_option("--graph", est_graph, "graph JSON path")->required();
    est->add_option("--L", est_L, "smoothness bound");
    est->add_option("--T", est_T, "density floor");
    est->add_option("--out", est_out, "estimate JSON path")->required();

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "distance of an estimate from a reference model");
    std::string eva_est, eva_model, eva_graph, eva_out;
    eva->add_option("--est", eva_est, "estimate JSON path")->required();
    eva->add_option("--model", eva_model, "reference model JSON path")->required();
    eva->add_option("--graph", eva_graph, "discovered graph JSON (adds error/psi fields)");
    eva->add_option("--out", eva_out, "evaluation JSON path");

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a full sweep and emit a CSV report");
    std::string exp_config, exp_out;
    int exp_jobs = -1;
    exp->add_option("--config", exp_config, "experiment config JSON")->required();
    exp->add_option("--out", exp_out, "report CSV path")->required();
    exp->add_option("--jobs", exp_jobs, "worker count (overrides the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            ModelFamily family = parse_family(gen_family);
            GeneratedModel g = random_model(family, gen_c, gen_seed);
            log_info("accepted a model after " + std::to_string(g.attempts) + " attempt(s)");
            Json meta{{"command", "generate"},
                      {"family", gen_family},
                      {"vars", gen_c.num_vars},
                      {"k", gen_c.k},
                      {"L", gen_c.L},
                      {"T", gen_c.T},
                      {"max_degree", gen_c.max_degree},
                      {"cardinality", gen_c.cardinality},
                      {"edge_prob", gen_c.edge_prob},
                      {"seed", gen_seed},
                      {"attempts_used", g.attempts}};
            write_with_meta(gen_out, model_to_json(g.model).dump(2) + "\n", meta);
        } else if (*smp) {
            CausalModel m = model_from_json(Json::parse(read_file(smp_model)));
            Dataset ds = sample(m, smp_n, smp_seed);
            Json meta = dataset_meta_to_json(ds);
            meta["command"] = "sample";
            meta["model"] = smp_model;
            write_with_meta(smp_out, dataset_to_csv(ds), meta);
        } else if (*dis) {
            Dataset ds = load_dataset(dis_data);
            VcsgsOutput out;
            if (dis_test == "binned") {
                BinnedCiSource src(ds, TestSchedule{dis_c}, dis_min_n);
                out = vcsgs(src);
            } else if (dis_test == "fisherz") {
                FisherZCiSource src(ds, FisherZSchedule{dis_alpha, 0.0});
                out = vcsgs(src);
            } else {
                throw std::invalid_argument("unknown test kind: " + dis_test);
            }
            Json meta{{"command", "discover"},
                      {"data", dis_data},
                      {"test", dis_test},
                      {"schedule_c", dis_c},
                      {"alpha", dis_alpha},
                      {"min_n", dis_min_n},
                      {"n", ds.n()},
                      {"seed", ds.seed},
                      {"step5_passed", out.step5_passed}};
            write_with_meta(dis_out, mixed_graph_to_json(out.graph).dump(2) + "\n", meta);
            if (!dis_trace.empty())
                write_file_atomic(dis_trace, trace_to_json(out.trace).dump(2) + "\n");
        } else if (*est) {
            Dataset ds = load_dataset(est_data);
            MixedGraph g = mixed_graph_from_json(Json::parse(read_file(est_graph)));
            EstimatedModel em = edge_estimation(g, ds, est_L, est_T);
            Json meta{{"command", "estimate"},
                      {"data", est_data},
                      {"graph", est_graph},
                      {"L", est_L},
                      {"T", est_T},
                      {"tv_violation", em.tv_violation}};
            write_with_meta(est_out, estimated_model_to_json(em).dump(2) + "\n", meta);
        } else if (*eva) {
            EstimatedModel em = estimated_model_from_json(Json::parse(read_file(eva_est)));
            CausalModel m = model_from_json(Json::parse(read_file(eva_model)));
            std::vector<int> incompatible;
            double d = conditional_probability_distance(em, m, &incompatible);
            Json result{{"distance", d}, {"incompatible_vertices", incompatible}};
            if (!eva_graph.empty()) {
                MixedGraph g = mixed_graph_from_json(Json::parse(read_file(eva_graph)));
                auto err = classify_error(g, dag_of(m));
                result["error_kind"] = to_string(err.kind);
                result["error_witness"] = err.witness;
                result["psi_class"] = to_string(psi_classify(g, dag_of(m)));
            }
            std::string text = result.dump(2) + "\n";
            if (eva_out.empty()) {
                std::fputs(text.c_str(), stdout);
            } else {
                Json meta{{"command", "evaluate"},
                          {"est", eva_est},
                          {"model", eva_model},
                          {"graph", eva_graph}};
                write_with_meta(eva_out, text, meta);
            }
        } else if (*exp) {
            ExperimentConfig cfg = experiment_config_from_json(Json::parse(read_file(exp_config)));
            if (exp_jobs >= 0) cfg.jobs = exp_jobs;
            log_info("running " + std::to_string(cfg.num_models) + " models");
            ExperimentReport report = run_experiment(cfg);
            Json meta = experiment_config_to_json(report.config);
            meta["command"] = "experiment";
            meta["rows"] = report.rows.size();
            write_with_meta(exp_out, report_to_csv(report), meta);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
