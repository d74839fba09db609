#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "causalkit/graph.hpp"
#include "oracles.hpp"

#include <random>

using namespace causalkit;

namespace {

Dag chain3() {
    Dag g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    return g;
}

Dag collider3() {
    Dag g(3);
    g.add_edge(0, 1);
    g.add_edge(2, 1);
    return g;
}

}  // namespace

TEST_CASE("acyclicity on chains and cycles") {
    CHECK(is_acyclic(chain3()));

    Dag two_cycle(2);
    two_cycle.add_edge(0, 1);
    two_cycle.add_edge(1, 0);
    CHECK_FALSE(is_acyclic(two_cycle));
}

TEST_CASE("acyclicity agrees with DFS back-edge oracle on random 6-node graphs") {
    std::mt19937_64 rng(20240817);
    std::uniform_int_distribution<int> node(0, 5);
    for (int rep = 0; rep < 500; ++rep) {
        Dag g(6);
        std::vector<std::pair<int, int>> edges;
        int m = static_cast<int>(rng() % 10);
        for (int i = 0; i < m; ++i) {
            int a = node(rng), b = node(rng);
            if (a == b || g.has_edge(a, b)) continue;
            g.add_edge(a, b);
            edges.emplace_back(a, b);
        }
        CHECK(is_acyclic(g) == !oracles::has_cycle_dfs(6, edges));
    }
}

TEST_CASE("d-separation basics") {
    Dag chain = chain3();
    CHECK(d_separated(chain, 0, 2, VarSet::single(1)));
    CHECK_FALSE(d_separated(chain, 0, 2, VarSet()));

    Dag coll = collider3();
    CHECK(d_separated(coll, 0, 2, VarSet()));
    CHECK_FALSE(d_separated(coll, 0, 2, VarSet::single(1)));

    // descendant of a collider opens it
    Dag g(4);
    g.add_edge(0, 1);
    g.add_edge(2, 1);
    g.add_edge(1, 3);
    CHECK_FALSE(d_separated(g, 0, 2, VarSet::single(3)));

    CHECK_THROWS_AS(d_separated(chain, 0, 0, VarSet()), std::invalid_argument);
    CHECK_THROWS_AS(d_separated(chain, 0, 2, VarSet::single(0)), std::invalid_argument);
    CHECK_THROWS_AS(d_separated(chain, 0, 5, VarSet()), std::invalid_argument);
}

TEST_CASE("d-separation agrees with path enumeration on all 4-node DAGs") {
    auto dags = oracles::all_dags(4);
    CHECK(dags.size() == 543);
    for (const Dag& g : dags) {
        for (int x = 0; x < 4; ++x)
            for (int y = x + 1; y < 4; ++y) {
                VarSet rest = VarSet::all(4).without(x).without(y);
                for (VarSet s : subsets_sorted(rest)) {
                    CHECK(d_separated(g, x, y, s) == oracles::d_separated_paths(g, x, y, s));
                }
            }
    }
}

TEST_CASE("triple classification") {
    auto coll = classify_triples(collider3());
    REQUIRE(coll.size() == 1);
    CHECK(coll.at(Triple{0, 1, 2}) == TripleClass::UnshieldedCollider);

    Dag shielded = collider3();
    shielded.add_edge(0, 2);
    auto cls = classify_triples(shielded);
    CHECK(cls.at(Triple{0, 1, 2}) == TripleClass::ShieldedCollider);
    CHECK(cls.at(Triple{1, 0, 2}) == TripleClass::ShieldedNonCollider);
    CHECK(cls.at(Triple{0, 2, 1}) == TripleClass::ShieldedNonCollider);

    // exhaustive sanity on all 25 3-node DAGs: classification matches definition
    auto dags3 = oracles::all_dags(3);
    CHECK(dags3.size() == 25);
    for (const Dag& g : dags3) {
        for (const auto& [t, c] : classify_triples(g)) {
            bool collider = g.has_edge(t.a, t.mid) && g.has_edge(t.b, t.mid);
            bool shield = g.adjacent(t.a, t.b);
            TripleClass expect = collider ? (shield ? TripleClass::ShieldedCollider
                                                    : TripleClass::UnshieldedCollider)
                                          : (shield ? TripleClass::ShieldedNonCollider
                                                    : TripleClass::UnshieldedNonCollider);
            CHECK(c == expect);
        }
    }
}

TEST_CASE("markov equivalence basics") {
    Dag fwd = chain3();
    Dag bwd(3);
    bwd.add_edge(2, 1);
    bwd.add_edge(1, 0);
    CHECK(markov_equivalent(fwd, bwd));
    CHECK_FALSE(markov_equivalent(fwd, collider3()));

    Dag other(4);
    CHECK_THROWS_AS(markov_equivalent(fwd, other), std::invalid_argument);
}

TEST_CASE("markov equivalence agrees with independence-set equality on 4 nodes") {
    auto dags = oracles::all_dags(4);
    std::vector<std::vector<bool>> prints;
    prints.reserve(dags.size());
    for (const Dag& g : dags) prints.push_back(oracles::independence_fingerprint(g));
    for (size_t i = 0; i < dags.size(); ++i)
        for (size_t j = i + 1; j < dags.size(); ++j) {
            CHECK(markov_equivalent(dags[i], dags[j]) == (prints[i] == prints[j]));
        }
}

TEST_CASE("pattern_of basics") {
    Pattern coll = pattern_of(collider3());
    CHECK(coll.has_directed(0, 1));
    CHECK(coll.has_directed(2, 1));
    CHECK(coll.undirected_edges().empty());

    Pattern ch = pattern_of(chain3());
    CHECK(ch.directed_edges().empty());
    CHECK(ch.has_undirected(0, 1));
    CHECK(ch.has_undirected(1, 2));
}

TEST_CASE("pattern_of matches brute-force class intersection on 4 nodes") {
    auto dags = oracles::all_dags(4);
    for (const Dag& g : dags) {
        Pattern expect = oracles::brute_force_pattern(g, dags);
        CHECK(pattern_of(g) == expect);
    }
}

TEST_CASE("pattern_of is constant on equivalence classes (4 nodes)") {
    auto dags = oracles::all_dags(4);
    for (size_t i = 0; i < dags.size(); i += 7)
        for (size_t j = i + 1; j < dags.size(); j += 11)
            if (markov_equivalent(dags[i], dags[j]))
                CHECK(pattern_of(dags[i]) == pattern_of(dags[j]));
}

TEST_CASE("consistent extension round-trips patterns of 4-node DAGs") {
    auto dags = oracles::all_dags(4);
    for (const Dag& g : dags) {
        Pattern p = pattern_of(g);
        Dag ext = consistent_dag_extension(p);
        CHECK(is_acyclic(ext));
        CHECK(pattern_of(ext) == p);
        CHECK(markov_equivalent(ext, g));
    }
}

TEST_CASE("fully directed pattern extends to itself") {
    Dag g = collider3();
    Pattern p = pattern_of(g);
    Dag ext = consistent_dag_extension(p);
    CHECK(ext == g);
}

TEST_CASE("undirected chain pattern extends to a class member") {
    Pattern p = pattern_of(chain3());
    Dag ext = consistent_dag_extension(p);
    CHECK(pattern_of(ext) == p);
}

TEST_CASE("non-extendable pattern is reported") {
    // square of undirected edges with the diagonal pair non-adjacent cannot be
    // oriented without a new unshielded collider or a cycle
    Pattern p;
    p.names = {"a", "b", "c", "d"};
    p.dir_parents.assign(4, VarSet());
    p.undirected.assign(4, VarSet());
    auto link = [&](int u, int v) {
        p.undirected[u] = p.undirected[u].with(v);
        p.undirected[v] = p.undirected[v].with(u);
    };
    link(0, 1);
    link(1, 2);
    link(2, 3);
    link(3, 0);
    CHECK_THROWS_AS(consistent_dag_extension(p), std::runtime_error);
}

TEST_CASE("disambiguation with zero ambiguous triples returns the closed graph") {
    MixedGraph m({"a", "b", "c"});
    m.add_directed(0, 1);
    m.add_directed(2, 1);
    m.set_mark(Triple{0, 1, 2}, TripleMark::ColliderOriented);
    auto patterns = consistent_disambiguations(m);
    REQUIRE(patterns.size() == 1);
    CHECK(patterns[0].has_directed(0, 1));
    CHECK(patterns[0].has_directed(2, 1));
}

TEST_CASE("one ambiguous triple with both choices valid yields two patterns") {
    MixedGraph m({"a", "b", "c"});
    m.add_undirected(0, 1);
    m.add_undirected(1, 2);
    m.set_mark(Triple{0, 1, 2}, TripleMark::Ambiguous);
    auto patterns = consistent_disambiguations(m);
    REQUIRE(patterns.size() == 2);
    // non-collider assignment keeps both edges undirected, collider orients both
    bool saw_undirected = false, saw_collider = false;
    for (const Pattern& p : patterns) {
        if (p.directed_edges().empty()) saw_undirected = true;
        if (p.has_directed(0, 1) && p.has_directed(2, 1)) saw_collider = true;
    }
    CHECK(saw_undirected);
    CHECK(saw_collider);
}

TEST_CASE("disambiguation excludes assignments that force a cycle") {
    // directed path 0 -> 3 -> 1 with the ambiguous triple <1, 0, 2>: taking
    // it as a collider orients 1 -> 0 and closes the cycle 0 -> 3 -> 1 -> 0,
    // so only the non-collider reading survives
    MixedGraph m({"a", "b", "c", "d"});
    m.add_directed(0, 3);
    m.add_directed(3, 1);
    m.add_undirected(0, 1);
    m.add_undirected(0, 2);
    m.set_mark(Triple{1, 0, 2}, TripleMark::Ambiguous);
    auto patterns = consistent_disambiguations(m);
    REQUIRE(patterns.size() == 1);
    CHECK(patterns[0].has_directed(0, 1));  // rule 2 closes the 0 - 1 edge
    Dag ext = consistent_dag_extension(patterns[0]);
    CHECK(is_acyclic(ext));
}

TEST_CASE("mixed graph invariants") {
    MixedGraph m({"a", "b", "c"});
    m.add_undirected(0, 1);
    m.add_undirected(1, 2);
    CHECK_THROWS_AS(m.add_directed(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(m.set_mark(Triple{0, 2, 1}, TripleMark::Ambiguous), std::invalid_argument);
    m.set_mark(Triple{0, 1, 2}, TripleMark::NonCollider);
    CHECK(m.mark_of(Triple{2, 1, 0}).value() == TripleMark::NonCollider);

    CHECK(m.nonadjacency_status(0, 2) == AdjacencyStatus::ApparentlyNonAdjacent);
    m.set_all_nonadjacent_definite();
    CHECK(m.nonadjacency_status(0, 2) == AdjacencyStatus::DefinitelyNonAdjacent);
    CHECK_THROWS_AS(m.nonadjacency_status(0, 1), std::invalid_argument);

    auto triples = m.unshielded_triples();
    REQUIRE(triples.size() == 1);
    CHECK(triples[0] == Triple{0, 1, 2});
}

TEST_CASE("subset enumeration is ordered by size then lexicographically") {
    auto subs = subsets_sorted(VarSet::of({0, 1, 3}));
    REQUIRE(subs.size() == 8);
    CHECK(subs[0] == VarSet());
    CHECK(subs[1] == VarSet::single(0));
    CHECK(subs[2] == VarSet::single(1));
    CHECK(subs[3] == VarSet::single(3));
    CHECK(subs[4] == VarSet::of({0, 1}));
    CHECK(subs[7] == VarSet::of({0, 1, 3}));
}
