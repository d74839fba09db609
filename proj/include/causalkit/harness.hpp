#pragma once

#include "causalkit/discovery.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace causalkit {

enum class PsiClass { Psi1, Psi2, Psi3 };

// Partition of truth relative to an output graph: Psi1 when its adjacencies,
// non-adjacencies and orientations all hold in the truth; Psi2 when some
// adjacency or orientation is false; Psi3 when only some non-adjacency is.
PsiClass psi_classify(const MixedGraph& out_graph, const Dag& truth);

const char* to_string(PsiClass c);
const char* to_string(ErrorKind k);

struct ExperimentConfig {
    ModelFamily family = ModelFamily::Discrete;
    int num_vars = 5;
    int max_degree = 3;
    int num_models = 20;
    double k = 0.3;
    double L = 1.0;
    double T = 0.05;
    double schedule_c = kDefaultScheduleC;
    std::vector<int> n_grid = {200, 1000, 5000, 20000};
    int replicates = 50;
    std::uint64_t base_seed = 1;
    double delta = 0.1;
    int jobs = 0;  // 0 = hardware concurrency
    int cardinality = 2;
    double edge_prob = 0.35;
    int max_attempts = 10000;

    void validate() const;
};

struct ExperimentRow {
    int model_id = 0;
    int n = 0;
    int replicate = 0;
    std::string error_kind;  // none | kind1 | kind2 | kind3 | error:<what>
    std::string psi_class;   // psi1 | psi2 | psi3 (empty on row failure)
    double distance = 0.0;
    bool exceeded = false;
    std::int64_t runtime_ms = 0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ExperimentRow> rows;
};

// Per (model, n, replicate): sample, run the structure search, classify the
// error kind and psi class, estimate edges and measure the population
// distance. Rows are deterministic given the base seed (replicate seeds are a
// counter-based split); replicates run on a worker pool. Per-row failures are
// recorded in error_kind and the run continues.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
    std::string key;  // "n=200" or "model=3,n=200", in group-key order
    long count = 0;
    long err_any = 0;  // kind1 + kind2 + kind3
    long kind1 = 0, kind2 = 0, kind3 = 0;
    long failures = 0;  // rows that aborted with error:<what>
    long exceeded = 0;
    double sum_distance = 0.0;

    double err_rate() const { return count ? static_cast<double>(err_any) / count : 0.0; }
    double exceed_rate() const { return count ? static_cast<double>(exceeded) / count : 0.0; }
    double mean_distance() const { return count ? sum_distance / count : 0.0; }
    // binomial standard error of err_rate
    double err_se() const;
};

// Grouped frequencies and means; keys may include "model_id" and "n".
std::vector<SummaryRow> summarize(const ExperimentReport& report,
                                  const std::vector<std::string>& keys);

}  // namespace causalkit
