// One-off calibration sweep for the binned-test threshold multiplier. Prints
// level and power of the test at the sample sizes the experiment harness
// uses, plus summary statistics of a reduced harness sweep, for a range of
// candidate multipliers. The chosen value is frozen as kDefaultScheduleC.

#include "causalkit/harness.hpp"

#include <cstdio>

using namespace causalkit;

namespace {

DiscreteModel independent_pair() {
    Dag g(2);
    return DiscreteModel(g, {2, 2}, {{0.5, 0.5}, {0.5, 0.5}});
}

// epsilon(X0, X1) = |p1 - p0| for a binary pair with a root at 1/2
DiscreteModel dependent_pair(double gap) {
    Dag g(2);
    g.add_edge(0, 1);
    double p0 = 0.5 - gap / 2, p1 = 0.5 + gap / 2;
    return DiscreteModel(g, {2, 2}, {{0.5, 0.5}, {1 - p0, p0, 1 - p1, p1}});
}

// chain x0 -> x1 -> x2; the (x1, x2 | x0) query has a conditional null and
// (x1, x2) given nothing is dependent
DiscreteModel chain_with_gap(double delta) {
    Dag g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    return DiscreteModel(g, {2, 2, 2},
                         {{0.5, 0.5},
                          {0.7, 0.3, 0.3, 0.7},
                          {0.5 + delta / 2, 0.5 - delta / 2, 0.5 - delta / 2, 0.5 + delta / 2}});
}

struct Rates {
    double level2 = 0, level3 = 0;  // marginal / conditional nulls
    double power2 = 0, power3 = 0;  // boundary dependences
};

Rates measure(double c, int n, int reps) {
    TestSchedule sched{c};
    Rates r;
    CausalModel indep = independent_pair();
    CausalModel dep = dependent_pair(0.055);
    // conditional alternative: epsilon(x1, x2 | x0) = delta exactly
    CausalModel chain = chain_with_gap(0.055);
    for (int i = 0; i < reps; ++i) {
        Dataset a = sample(indep, n, 10000 + i);
        r.level2 += !ci_test_binned(a, 0, 1, VarSet(), sched).independent;
        Dataset b = sample(chain, n, 20000 + i);
        r.level3 += !ci_test_binned(b, 0, 2, VarSet::single(1), sched).independent;
        Dataset d2 = sample(dep, n, 30000 + i);
        r.power2 += !ci_test_binned(d2, 0, 1, VarSet(), sched).independent;
        Dataset d3 = sample(chain, n, 40000 + i);
        r.power3 += !ci_test_binned(d3, 1, 2, VarSet::single(0), sched).independent;
    }
    r.level2 /= reps;
    r.level3 /= reps;
    r.power2 /= reps;
    r.power3 /= reps;
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    int reps = argc > 1 ? std::atoi(argv[1]) : 200;
    {
        CausalModel chain = chain_with_gap(0.055);
        std::printf("boundary checks: eps(dep pair) = %.4f, eps(x1,x2|x0) = %.4f\n",
                    epsilon_dependence(dependent_pair(0.055), 0, 1, VarSet()),
                    epsilon_dependence(chain, 1, 2, VarSet::single(0)));
    }
    std::printf("%6s %8s | %8s %8s %8s %8s\n", "c", "n", "level_d2", "level_d3", "power_d2",
                "power_d3");
    for (double c : {0.12, 0.15, 0.18, 0.22, 0.26, 0.5}) {
        Rates r = measure(c, 20000, reps);
        std::printf("%6.2f %8d | %8.3f %8.3f %8.3f %8.3f\n", c, 20000, r.level2, r.level3,
                    r.power2, r.power3);
    }

    std::printf("\nreduced harness sweep (8 models, 12 replicates):\n");
    std::printf("%6s | %10s %10s %10s %10s %10s %10s\n", "c", "err@200", "err@20k", "exc@200",
                "exc@20k", "fail", "psi1@20k");
    for (double c : {0.12, 0.15, 0.18, 0.22, 0.26}) {
        ExperimentConfig cfg;
        cfg.num_models = 8;
        cfg.replicates = 12;
        cfg.schedule_c = c;
        cfg.base_seed = 97;
        ExperimentReport rep = run_experiment(cfg);
        auto rows = summarize(rep, {"n"});
        double e200 = 0, e20k = 0, x200 = 0, x20k = 0;
        long fail = 0;
        for (const SummaryRow& s : rows) {
            fail += s.failures;
            if (s.key == "n=200") {
                e200 = s.err_rate();
                x200 = s.exceed_rate();
            }
            if (s.key == "n=20000") {
                e20k = s.err_rate();
                x20k = s.exceed_rate();
            }
        }
        long psi1 = 0, cnt = 0;
        for (const ExperimentRow& row : rep.rows)
            if (row.n == 20000) {
                ++cnt;
                psi1 += row.psi_class == "psi1";
            }
        std::printf("%6.2f | %10.3f %10.3f %10.3f %10.3f %10ld %10.3f\n", c, e200, e20k, x200,
                    x20k, fail, double(psi1) / cnt);
    }
    return 0;
}
