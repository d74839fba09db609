#pragma once

#include "causalkit/citest.hpp"
#include "causalkit/estimation.hpp"
#include "causalkit/graph.hpp"

#include <string>
#include <vector>

namespace causalkit {

struct EdgeRemovalRecord {
    int x = 0, y = 0;
    VarSet sepset;
    CiDecision decision;
};

struct TripleEvidence {
    VarSet cond;
    bool independent = false;
};

struct TripleRecord {
    Triple triple;
    TripleMark mark = TripleMark::Ambiguous;
    std::vector<TripleEvidence> evidence;  // every queried subset with its decision
};

struct OrientationConflictRecord {
    int from = 0, to = 0;
    std::string stage;  // "collider" or "rules"
};

struct DisambiguationRecord {
    std::uint32_t assignment = 0;  // bit i = i-th ambiguous triple taken as a collider
    bool valid = false;            // closes to an extendable pattern
    bool markov_ok = false;
    int fail_x = -1, fail_y = -1;  // first failing Markov query, if any
    VarSet fail_cond;
};

struct Step5Record {
    int ambiguous_count = 0;
    bool aborted_too_many = false;
    std::vector<DisambiguationRecord> disambiguations;
    bool passed = false;
};

struct VcsgsTrace {
    std::vector<EdgeRemovalRecord> removals;
    std::vector<TripleRecord> triples;
    std::vector<RuleFiring> rule_firings;
    std::vector<OrientationConflictRecord> conflicts;
    Step5Record step5;
};

struct VcsgsOptions {
    int max_exhaustive_vars = 12;  // the subset searches are exponential in |V|
    int max_ambiguous = 12;        // disambiguation guard: 2^t patterns
};

struct VcsgsOutput {
    MixedGraph graph;
    VcsgsTrace trace;
    bool step5_passed = false;
};

// The conservative structure search over a conditional-independence decision
// source:
//   1. start from the complete undirected graph;
//   2. remove an edge iff some subset of the remaining variables renders the
//      pair independent (first hit in (size, lexicographic) order recorded);
//   3. classify each unshielded triple: collider iff the endpoints stay
//      dependent given every subset containing the mid-node, non-collider iff
//      dependent given every subset excluding it, ambiguous otherwise;
//   4. close the orientation rules over the marks;
//   5. for every consistent disambiguation, extend to a DAG and verify each
//      variable's independence from its non-descendants given its parents;
//      when all pass, apparently non-adjacent pairs become definite.
// Decisions are cached per run, so repeated queries are answered once.
VcsgsOutput vcsgs(CiSource& ci, const VcsgsOptions& opts = {});

enum class ErrorKind { None, KindI, KindII, KindIII };

struct ErrorClassification {
    ErrorKind kind = ErrorKind::None;
    std::string witness;
};

// Lexicographic error taxonomy against the true graph: a false adjacency, or
// else a false marked non-collider, or else a false orientation. Missing
// edges are not errors.
ErrorClassification classify_error(const MixedGraph& out_graph, const Dag& truth);
ErrorClassification classify_error(const VcsgsOutput& out, const Dag& truth);

// Vertices with every incident edge oriented; their parent sets are read off
// the directed in-edges.
VarSet estimable_vertices(const VcsgsOutput& out);

inline EstimatedModel edge_estimation(const VcsgsOutput& out, const Dataset& data, double L,
                                      double T) {
    return edge_estimation(out.graph, data, L, T);
}

}  // namespace causalkit
