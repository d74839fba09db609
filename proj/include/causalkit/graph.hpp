#pragma once

#include "causalkit/types.hpp"

#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace causalkit {

// Directed graph over named variables. Cycles are representable so that
// acyclicity can be validated; every algorithm that needs a DAG checks.
class Dag {
public:
    Dag() = default;
    explicit Dag(int num_vars);
    explicit Dag(std::vector<std::string> names);

    int num_vars() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }

    void add_edge(int from, int to);
    bool has_edge(int from, int to) const;
    bool adjacent(int a, int b) const;
    VarSet parents(int v) const;
    VarSet children(int v) const;
    int num_edges() const { return num_edges_; }
    std::vector<std::pair<int, int>> edges() const;

    // Proper ancestors/descendants (v itself excluded).
    VarSet ancestors(int v) const;
    VarSet descendants(int v) const;
    // s together with all ancestors of its members.
    VarSet ancestral_closure(VarSet s) const;
    bool is_ancestral(VarSet s) const;

    std::optional<std::vector<int>> topological_order() const;

    bool operator==(const Dag&) const = default;

private:
    void check_var(int v) const;

    std::vector<std::string> names_;
    std::vector<VarSet> parents_;
    std::vector<VarSet> children_;
    int num_edges_ = 0;
};

bool is_acyclic(const Dag& g);

// Standard d-separation semantics, computed by ball-bouncing reachability.
bool d_separated(const Dag& g, int x, int y, VarSet cond);

// Unordered triple <a, mid, b>: endpoints are canonicalized a < b.
struct Triple {
    int a = 0;
    int mid = 0;
    int b = 0;
    auto operator<=>(const Triple&) const = default;
};
Triple make_triple(int x, int mid, int z);

enum class TripleClass {
    UnshieldedCollider,
    ShieldedCollider,
    UnshieldedNonCollider,
    ShieldedNonCollider,
};

enum class TripleMark { ColliderOriented, NonCollider, Ambiguous };

// Classifies every path <x, mid, z> with both legs adjacent: collider iff mid
// is a child of both endpoints, shielded iff the endpoints are adjacent.
std::map<Triple, TripleClass> classify_triples(const Dag& g);

// Same adjacencies and same unshielded colliders.
bool markov_equivalent(const Dag& g1, const Dag& g2);

// Mixed graph representing a Markov equivalence class: directed edges are
// compelled, undirected edges vary across the class.
struct Pattern {
    std::vector<std::string> names;
    std::vector<VarSet> dir_parents;  // dir_parents[v] = sources of edges into v
    std::vector<VarSet> undirected;   // symmetric

    int num_vars() const { return static_cast<int>(names.size()); }
    bool has_directed(int from, int to) const { return dir_parents[to].contains(from); }
    bool has_undirected(int a, int b) const { return undirected[a].contains(b); }
    bool adjacent(int a, int b) const {
        return has_undirected(a, b) || has_directed(a, b) || has_directed(b, a);
    }
    std::vector<std::pair<int, int>> directed_edges() const;
    std::vector<std::pair<int, int>> undirected_edges() const;

    bool operator==(const Pattern&) const = default;
};

enum class AdjacencyStatus { ApparentlyNonAdjacent, DefinitelyNonAdjacent };

// Partially oriented graph with triple marks and non-adjacency statuses, as
// produced by the discovery search.
class MixedGraph {
public:
    MixedGraph() = default;
    explicit MixedGraph(std::vector<std::string> names);

    int num_vars() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }

    void add_directed(int from, int to);
    void add_undirected(int a, int b);
    // Turns the undirected edge a-b into a->b.
    void orient(int from, int to);

    bool has_directed(int from, int to) const { return dir_parents_[to].contains(from); }
    bool has_undirected(int a, int b) const { return undirected_[a].contains(b); }
    bool adjacent(int a, int b) const;
    VarSet dir_parents(int v) const { return dir_parents_[v]; }
    VarSet dir_children(int v) const { return dir_children_[v]; }
    VarSet undirected_neighbors(int v) const { return undirected_[v]; }
    std::vector<std::pair<int, int>> directed_edges() const;
    std::vector<std::pair<int, int>> undirected_edges() const;

    void set_mark(const Triple& t, TripleMark mark);
    std::optional<TripleMark> mark_of(const Triple& t) const;
    const std::map<Triple, TripleMark>& marks() const { return marks_; }

    // Unshielded triples of the current skeleton, canonical order.
    std::vector<Triple> unshielded_triples() const;

    void set_definitely_nonadjacent(int a, int b);
    void set_all_nonadjacent_definite();
    // Only defined for non-adjacent pairs.
    AdjacencyStatus nonadjacency_status(int a, int b) const;
    std::vector<std::pair<int, int>> definitely_nonadjacent_pairs() const;

    Pattern to_pattern() const;

    bool operator==(const MixedGraph&) const = default;

private:
    void check_var(int v) const;

    std::vector<std::string> names_;
    std::vector<VarSet> dir_parents_;
    std::vector<VarSet> dir_children_;
    std::vector<VarSet> undirected_;
    std::map<Triple, TripleMark> marks_;
    std::set<std::pair<int, int>> definite_nonadjacent_;
};

// Compelled-edge pattern of a DAG: unshielded colliders oriented, then closed
// under the orientation rules below.
Pattern pattern_of(const Dag& g);

// Working state for the orientation-rule closure shared by pattern
// construction, disambiguation and the discovery search.
struct OrientationState {
    std::vector<VarSet> dir_parents;
    std::vector<VarSet> dir_children;
    std::vector<VarSet> undirected;

    static OrientationState from_skeleton(const Dag& g);
    bool adjacent(int a, int b) const;
    // Returns false on a conflicting request (edge already directed the other
    // way); true otherwise (including no-ops).
    bool orient(int from, int to);
    bool directed_part_acyclic() const;
};

struct RuleFiring {
    int rule = 0;  // 1..3
    int from = 0;
    int to = 0;
    Triple premise;
};

// Closes the state under the three orientation rules:
//  1. x -> mid - z with <x, mid, z> a marked non-collider  =>  mid -> z
//  2. x -> y -> z with x - z                               =>  x -> z
//  3. x -> y <- z with <x, w, z> a marked non-collider and w - y  =>  w -> y
// Conflicting orientation requests are skipped and reported.
void close_orientation_rules(OrientationState& st, const std::set<Triple>& noncolliders,
                             std::vector<RuleFiring>* firings,
                             std::vector<std::pair<int, int>>* conflicts);

// Orients all undirected edges without creating a cycle or a new unshielded
// collider (sink-elimination). Returns nullopt when no such extension exists.
std::optional<Dag> try_consistent_extension(const std::vector<std::string>& names,
                                            const OrientationState& st);

struct Disambiguation {
    std::uint32_t assignment = 0;  // bit i set = i-th ambiguous triple is a collider
    Pattern pattern;
    Dag extension;
};

// Every assignment of collider/non-collider to the ambiguous triples that,
// after re-closing the orientation rules, yields an extendable pattern.
std::vector<Disambiguation> enumerate_disambiguations(const MixedGraph& m, int max_ambiguous);

std::vector<Pattern> consistent_disambiguations(const MixedGraph& m);

// One DAG in the class represented by p; throws if p is not extendable.
Dag consistent_dag_extension(const Pattern& p);

}  // namespace causalkit
