#include "causalkit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>

namespace causalkit {

PsiClass psi_classify(const MixedGraph& out_graph, const Dag& truth) {
    if (out_graph.names() != truth.names())
        throw std::invalid_argument("output and truth must share the variable set");
    int n = truth.num_vars();
    bool false_adjacency_or_orientation = false;
    bool false_nonadjacency = false;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            bool out_adj = out_graph.adjacent(a, b);
            bool true_adj = truth.adjacent(a, b);
            if (out_adj && !true_adj) false_adjacency_or_orientation = true;
            if (!out_adj && true_adj) false_nonadjacency = true;
        }
    for (auto [from, to] : out_graph.directed_edges())
        if (!truth.has_edge(from, to)) false_adjacency_or_orientation = true;
    if (false_adjacency_or_orientation) return PsiClass::Psi2;
    if (false_nonadjacency) return PsiClass::Psi3;
    return PsiClass::Psi1;
}

const char* to_string(PsiClass c) {
    switch (c) {
        case PsiClass::Psi1: return "psi1";
        case PsiClass::Psi2: return "psi2";
        case PsiClass::Psi3: return "psi3";
    }
    return "?";
}

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::None: return "none";
        case ErrorKind::KindI: return "kind1";
        case ErrorKind::KindII: return "kind2";
        case ErrorKind::KindIII: return "kind3";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (family == ModelFamily::LinearGaussian)
        throw std::invalid_argument(
            "the experiment harness runs the discrete and continuous-smooth families");
    if (num_models < 1 || replicates < 1)
        throw std::invalid_argument("need at least one model and one replicate");
    if (n_grid.empty()) throw std::invalid_argument("empty sample-size grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("sample-size grid must be strictly increasing");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentReport report;
    report.config = cfg;

    ModelConstraints mc;
    mc.k = cfg.k;
    mc.L = cfg.L;
    mc.T = cfg.T;
    mc.num_vars = cfg.num_vars;
    mc.max_degree = cfg.max_degree;
    mc.cardinality = cfg.cardinality;
    mc.edge_prob = cfg.edge_prob;
    mc.max_attempts = cfg.max_attempts;

    std::vector<CausalModel> models;
    models.reserve(cfg.num_models);
    for (int i = 0; i < cfg.num_models; ++i) {
        std::uint64_t seed = mix_seed(cfg.base_seed, 0xA11CEull, i);
        models.push_back(random_model(cfg.family, mc, seed).model);
    }

    int n_ns = static_cast<int>(cfg.n_grid.size());
    std::size_t total = static_cast<std::size_t>(cfg.num_models) * n_ns * cfg.replicates;
    report.rows.assign(total, ExperimentRow{});

    TestSchedule schedule{cfg.schedule_c};
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            std::size_t task = next.fetch_add(1);
            if (task >= total) return;
            int rep = static_cast<int>(task % cfg.replicates);
            int n_idx = static_cast<int>((task / cfg.replicates) % n_ns);
            int model_id = static_cast<int>(task / (cfg.replicates * n_ns));
            int n = cfg.n_grid[n_idx];

            ExperimentRow& row = report.rows[task];
            row.model_id = model_id;
            row.n = n;
            row.replicate = rep;
            auto t0 = std::chrono::steady_clock::now();
            try {
                const CausalModel& model = models[model_id];
                std::uint64_t seed = mix_seed(cfg.base_seed, model_id, n_idx, rep);
                Dataset ds = sample(model, n, seed);
                BinnedCiSource src(ds, schedule);
                VcsgsOutput out = vcsgs(src);
                const Dag& truth = dag_of(model);
                row.error_kind = to_string(classify_error(out, truth).kind);
                row.psi_class = to_string(psi_classify(out.graph, truth));
                EstimatedModel est = edge_estimation(out, ds, cfg.L, cfg.T);
                row.distance = conditional_probability_distance(est, model);
                row.exceeded = row.distance > cfg.delta;
            } catch (const std::exception& e) {
                std::string what = e.what();
                std::replace(what.begin(), what.end(), ',', ';');
                row.error_kind = "error:" + what;
                row.psi_class = "";
                row.distance = 0.0;
                row.exceeded = false;
            }
            row.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
        }
    };

    int jobs = cfg.jobs > 0 ? cfg.jobs
                            : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = static_cast<int>(std::min<std::size_t>(jobs, total));
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return report;
}

double SummaryRow::err_se() const {
    if (count == 0) return 0.0;
    double p = err_rate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(count));
}

std::vector<SummaryRow> summarize(const ExperimentReport& report,
                                  const std::vector<std::string>& keys) {
    if (report.rows.empty()) throw std::invalid_argument("cannot summarize an empty report");
    for (const std::string& k : keys)
        if (k != "model_id" && k != "n")
            throw std::invalid_argument("unknown group key: " + k);

    std::map<std::string, SummaryRow> groups;
    for (const ExperimentRow& r : report.rows) {
        std::string key;
        for (const std::string& k : keys) {
            if (!key.empty()) key += ",";
            if (k == "model_id") key += "model=" + std::to_string(r.model_id);
            if (k == "n") key += "n=" + std::to_string(r.n);
        }
        SummaryRow& s = groups[key];
        s.key = key;
        ++s.count;
        if (r.error_kind == "kind1") ++s.kind1;
        if (r.error_kind == "kind2") ++s.kind2;
        if (r.error_kind == "kind3") ++s.kind3;
        if (r.error_kind.rfind("error:", 0) == 0) ++s.failures;
        s.err_any = s.kind1 + s.kind2 + s.kind3;
        if (r.exceeded) ++s.exceeded;
        s.sum_distance += r.distance;
    }
    std::vector<SummaryRow> out;
    out.reserve(groups.size());
    for (auto& [_, s] : groups) out.push_back(std::move(s));
    return out;
}

}  // namespace causalkit
