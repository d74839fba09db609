#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "causalkit/scm.hpp"

#include <cmath>

using namespace causalkit;

namespace {

// X0 root Bernoulli(p0); X1 child with P(X1=1 | X0=x) = p1[x].
DiscreteModel binary_pair(double p0, double p1_given0, double p1_given1) {
    Dag g(2);
    g.add_edge(0, 1);
    return DiscreteModel(g, {2, 2},
                         {{1 - p0, p0},
                          {1 - p1_given0, p1_given0, 1 - p1_given1, p1_given1}});
}

DiscreteModel binary_chain3() {
    Dag g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    return DiscreteModel(g, {2, 2, 2},
                         {{0.5, 0.5},
                          {0.7, 0.3, 0.3, 0.7},
                          {0.65, 0.35, 0.35, 0.65}});
}

LinearGaussianModel gaussian_chain(double a, double b) {
    Dag g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(3, 3);
    coef(1, 0) = a;
    coef(2, 1) = b;
    return LinearGaussianModel(g, coef, Eigen::VectorXd::Ones(3));
}

}  // namespace

TEST_CASE("sampling rejects n = 0 and is deterministic under a seed") {
    CausalModel m = binary_pair(0.5, 0.3, 0.7);
    CHECK_THROWS_AS(sample(m, 0, 1), std::invalid_argument);
    Dataset a = sample(m, 200, 42);
    Dataset b = sample(m, 200, 42);
    CHECK(a.rows == b.rows);
    Dataset c = sample(m, 200, 43);
    CHECK(a.rows != c.rows);
}

TEST_CASE("sampling matches the model at n = 1e5") {
    CausalModel m = binary_pair(0.5, 0.3, 0.7);
    Dataset ds = sample(m, 100000, 7);
    double mean0 = ds.rows.col(0).mean();
    CHECK(std::abs(mean0 - 0.5) < 0.01);  // 3 sigma is ~0.0047

    // empirical conditional frequencies within 3 sigma of the CPT
    int n1 = 0, n1_y1 = 0, n0 = 0, n0_y1 = 0;
    for (int r = 0; r < ds.n(); ++r) {
        if (ds.rows(r, 0) == 1.0) {
            ++n1;
            n1_y1 += ds.rows(r, 1) == 1.0;
        } else {
            ++n0;
            n0_y1 += ds.rows(r, 1) == 1.0;
        }
    }
    double f1 = double(n1_y1) / n1, f0 = double(n0_y1) / n0;
    CHECK(std::abs(f1 - 0.7) < 3 * std::sqrt(0.7 * 0.3 / n1));
    CHECK(std::abs(f0 - 0.3) < 3 * std::sqrt(0.7 * 0.3 / n0));
}

TEST_CASE("smooth sampling stays on the unit interval") {
    Dag g(2);
    g.add_edge(0, 1);
    ContinuousSmoothModel m(g, {SmoothCpd{1.0, 0.5, {}, 0.35},
                                SmoothCpd{0.4, 0.3, {0.3}, 0.3}},
                            1.0, 0.05);
    Dataset ds = sample(CausalModel(m), 20000, 3);
    CHECK(ds.rows.minCoeff() >= 0.0);
    CHECK(ds.rows.maxCoeff() <= 1.0);
}

TEST_CASE("edge strength of a binary edge is the CPT contrast") {
    CausalModel m = binary_pair(0.5, 0.3, 0.7);
    CHECK(edge_strength(m, 0, 1) == doctest::Approx(0.8).epsilon(1e-12));

    CausalModel flat = binary_pair(0.5, 0.4, 0.4);
    CHECK(edge_strength(flat, 0, 1) == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(edge_strength(m, 1, 0), std::invalid_argument);
}

TEST_CASE("linear-Gaussian edge strength is the coefficient magnitude") {
    CausalModel m = gaussian_chain(0.5, -0.25);
    CHECK(edge_strength(m, 0, 1) == doctest::Approx(0.5));
    CHECK(edge_strength(m, 1, 2) == doctest::Approx(0.25));
}

TEST_CASE("epsilon of a coupled Bernoulli pair is 1") {
    Dag g(2);
    g.add_edge(0, 1);
    DiscreteModel m(g, {2, 2}, {{0.5, 0.5}, {1.0, 0.0, 0.0, 1.0}});
    CHECK(epsilon_dependence(CausalModel(m), 0, 1, VarSet()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("epsilon vanishes exactly on d-separated queries (discrete)") {
    CausalModel m = binary_chain3();
    CHECK(epsilon_dependence(m, 0, 2, VarSet::single(1)) < 1e-12);
    CHECK(epsilon_dependence(m, 0, 2, VarSet()) > 0.01);
}

TEST_CASE("epsilon vanishes on d-separated queries for the smooth grid") {
    Dag g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    ContinuousSmoothModel m(g, {SmoothCpd{1.0, 0.5, {}, 0.35},
                                SmoothCpd{0.4, 0.25, {0.4}, 0.3},
                                SmoothCpd{0.4, 0.7, {-0.4}, 0.3}},
                            1.0, 0.05);
    CausalModel cm(m);
    CHECK(epsilon_dependence(cm, 0, 2, VarSet::single(1)) < 1e-10);
    CHECK(epsilon_dependence(cm, 0, 2, VarSet()) > 0.005);
    CHECK_THROWS_AS(epsilon_dependence(gaussian_chain(0.5, 0.5), 0, 2, VarSet()),
                    std::logic_error);
}

TEST_CASE("smooth conditionals integrate to one") {
    Dag g(2);
    g.add_edge(0, 1);
    ContinuousSmoothModel m(g, {SmoothCpd{1.0, 0.5, {}, 0.35},
                                SmoothCpd{0.35, 0.2, {0.5}, 0.32}},
                            1.0, 0.05);
    for (double pa : {0.0, 0.33, 0.91}) {
        int pts = 2001;
        double h = 1.0 / (pts - 1), acc = 0.0;
        for (int i = 0; i < pts; ++i) {
            double w = (i == 0 || i == pts - 1) ? h / 2 : h;
            acc += w * m.density(1, i * h, {pa});
        }
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("partial correlation: chain is blocked by the middle variable") {
    LinearGaussianModel m = gaussian_chain(0.5, 0.5);
    CHECK(std::abs(partial_correlation(m, 0, 2, VarSet::single(1))) < 1e-10);
}

TEST_CASE("partial correlation matches a Monte-Carlo estimate") {
    LinearGaussianModel m = gaussian_chain(0.5, 0.5);
    double rho = partial_correlation(m, 0, 2, VarSet());
    Dataset ds = sample(CausalModel(m), 1000000, 99);
    auto col0 = ds.rows.col(0);
    auto col2 = ds.rows.col(2);
    double m0 = col0.mean(), m2 = col2.mean();
    double cov = ((col0.array() - m0) * (col2.array() - m2)).mean();
    double sd0 = std::sqrt((col0.array() - m0).square().mean());
    double sd2 = std::sqrt((col2.array() - m2).square().mean());
    CHECK(rho == doctest::Approx(cov / (sd0 * sd2)).epsilon(0.0).scale(1).epsilon(0.02));
    CHECK(std::abs(rho - cov / (sd0 * sd2)) < 0.005);
}

TEST_CASE("TV smoothness holds for integer-embedded discrete models with L = 1") {
    CausalModel m = binary_chain3();
    CHECK(check_tv_smoothness(m, 1.0).ok);
}

TEST_CASE("constant conditional density satisfies any smoothness bound") {
    Dag g(1);
    ContinuousSmoothModel m(g, {SmoothCpd{1.0, 0.5, {}, 0.35}}, 1.0, 0.05);
    CHECK(check_tv_smoothness(CausalModel(m), 1e-9).ok);
}

TEST_CASE("steep conditional family violates a small smoothness bound with witness") {
    Dag g(2);
    g.add_edge(0, 1);
    ContinuousSmoothModel m(g, {SmoothCpd{1.0, 0.5, {}, 0.35},
                                SmoothCpd{0.1, 0.1, {3.0}, 0.08}},
                            0.5, 0.01);
    auto res = check_tv_smoothness(CausalModel(m), 0.5);
    CHECK_FALSE(res.ok);
    REQUIRE_FALSE(res.violations.empty());
    CHECK(res.violations.front().var == 1);
    CHECK(res.violations.front().lhs > res.violations.front().rhs);
}

TEST_CASE("floor check flags a low CPT entry with witness") {
    CausalModel m = binary_pair(0.5, 0.05, 0.7);
    auto res = check_nz(m, 0.1);
    CHECK_FALSE(res.ok);
    REQUIRE_FALSE(res.violations.empty());
    CHECK(res.violations.front().lhs < 0.1);

    CausalModel uniform = binary_pair(0.5, 0.5, 0.5);
    CHECK(check_nz(uniform, 0.4).ok);
    CHECK_THROWS_AS(check_nz(uniform, 1.5), std::invalid_argument);
}

TEST_CASE("chain-rule corollary: configuration masses dominate T^|W|") {
    ModelConstraints c;
    c.num_vars = 5;
    GeneratedModel gen = random_model(ModelFamily::Discrete, c, 2024);
    const auto& m = std::get<DiscreteModel>(gen.model);
    REQUIRE(check_nz(gen.model, c.T).ok);
    for (VarSet w : subsets_sorted(VarSet::all(5))) {
        if (w.empty()) continue;
        JointTable marg = m.joint().marginal(w);
        std::vector<int> idx(w.size(), 0);
        bool more = true;
        double floor = std::pow(c.T, w.size());
        while (more) {
            CHECK(marg.mass_at(idx) >= floor - 1e-12);
            more = [&] {
                for (int i = static_cast<int>(idx.size()) - 1; i >= 0; --i) {
                    if (++idx[i] < marg.sizes()[i]) return true;
                    idx[i] = 0;
                }
                return false;
            }();
        }
    }
}

TEST_CASE("triangle check is vacuous without triangles") {
    CausalModel m = binary_chain3();
    CHECK(check_k_triangle_faithfulness(m, 0.5).ok);
}

TEST_CASE("near-cancelling Gaussian triangle violates triangle-faithfulness") {
    Dag g(3);  // 0 = X, 1 = Z, 2 = Y
    g.add_edge(0, 1);
    g.add_edge(0, 2);
    g.add_edge(1, 2);
    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(3, 3);
    coef(1, 0) = 0.7;           // X -> Z
    coef(2, 0) = 0.5;           // X -> Y
    coef(2, 1) = -0.5 / 0.7;    // Z -> Y cancels the direct path
    LinearGaussianModel m(g, coef, Eigen::VectorXd::Ones(3));
    CHECK(std::abs(partial_correlation(m, 0, 2, VarSet())) < 1e-12);
    auto res = check_k_triangle_faithfulness(CausalModel(m), 0.3);
    CHECK_FALSE(res.ok);
}

TEST_CASE("discrete triangle with strong uniform effects passes small k") {
    Dag g(3);
    g.add_edge(0, 1);
    g.add_edge(0, 2);
    g.add_edge(1, 2);
    DiscreteModel m(g, {2, 2, 2},
                    {{0.5, 0.5},
                     {0.65, 0.35, 0.35, 0.65},
                     // P(X2=1 | x0, x1): monotone in both parents
                     {0.70, 0.30, 0.55, 0.45, 0.45, 0.55, 0.30, 0.70}});
    auto res = check_k_triangle_faithfulness(CausalModel(m), 0.05);
    CHECK(res.ok);
}

TEST_CASE("random_model rejects an infeasible floor upfront") {
    ModelConstraints c;
    c.T = 0.9;
    c.cardinality = 2;
    CHECK_THROWS_AS(random_model(ModelFamily::Discrete, c, 1), std::invalid_argument);
}

TEST_CASE("generated models satisfy all validators") {
    ModelConstraints c;
    c.num_vars = 5;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GeneratedModel gen = random_model(ModelFamily::Discrete, c, seed);
        CHECK(check_tv_smoothness(gen.model, c.L).ok);
        CHECK(check_nz(gen.model, c.T).ok);
        CHECK(check_k_triangle_faithfulness(gen.model, c.k).ok);
    }
}

TEST_CASE("generated smooth models satisfy all validators") {
    ModelConstraints c;
    c.num_vars = 4;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        GeneratedModel gen = random_model(ModelFamily::ContinuousSmooth, c, seed);
        const auto& m = std::get<ContinuousSmoothModel>(gen.model);
        CHECK(check_tv_smoothness(gen.model, c.L).ok);
        CHECK(check_nz(gen.model, c.T).ok);
        CHECK(check_density_bound(m).ok);
        CHECK(check_k_triangle_faithfulness(gen.model, c.k).ok);
    }
}

TEST_CASE("generated Gaussian models satisfy triangle-faithfulness") {
    ModelConstraints c;
    c.num_vars = 4;
    GeneratedModel gen = random_model(ModelFamily::LinearGaussian, c, 5);
    CHECK(check_k_triangle_faithfulness(gen.model, c.k).ok);
}

TEST_CASE("sandwich bound holds exactly on generated discrete models") {
    ModelConstraints c;
    c.num_vars = 5;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        GeneratedModel gen = random_model(ModelFamily::Discrete, c, seed);
        const Dag& g = dag_of(gen.model);
        for (auto [x, y] : g.edges()) {
            double e = edge_strength(gen.model, x, y);
            VarSet pa = g.parents(y);
            for (VarSet a : subsets_sorted(VarSet::all(5).without(y))) {
                if (!pa.subset_of(a) || !g.is_ancestral(a)) continue;
                double eps = epsilon_dependence(gen.model, x, y, a.without(x));
                CHECK(eps <= e + 1e-9);
                CHECK(eps >= std::pow(c.T, a.size()) * e - 1e-9);
            }
        }
    }
}

TEST_CASE("Markov consistency of generated models") {
    ModelConstraints c;
    c.num_vars = 5;
    GeneratedModel gen = random_model(ModelFamily::Discrete, c, 77);
    const Dag& g = dag_of(gen.model);
    for (int x = 0; x < 5; ++x)
        for (int y = x + 1; y < 5; ++y) {
            VarSet rest = VarSet::all(5).without(x).without(y);
            for (VarSet s : subsets_sorted(rest))
                if (d_separated(g, x, y, s))
                    CHECK(epsilon_dependence(gen.model, x, y, s) < 1e-9);
        }
}
