#include "causalkit/discovery.hpp"

#include <algorithm>
#include <unordered_map>

namespace causalkit {

namespace {

class CachedCi {
public:
    explicit CachedCi(CiSource& src) : src_(&src) {}

    const CiDecision& query(int x, int y, VarSet cond) {
        int a = std::min(x, y), b = std::max(x, y);
        std::uint64_t key =
            (static_cast<std::uint64_t>(cond.bits()) << 12) | (static_cast<std::uint64_t>(a) << 6) |
            static_cast<std::uint64_t>(b);
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, src_->query(a, b, cond)).first;
        return it->second;
    }

private:
    CiSource* src_;
    std::unordered_map<std::uint64_t, CiDecision> cache_;
};

}  // namespace

VcsgsOutput vcsgs(CiSource& ci, const VcsgsOptions& opts) {
    int n = ci.num_vars();
    if (n < 2) throw std::invalid_argument("the search needs at least two variables");
    if (n > opts.max_exhaustive_vars)
        throw std::invalid_argument("variable count exceeds the exhaustive-search cap");

    CachedCi cached(ci);
    VcsgsOutput out;
    out.graph = MixedGraph(ci.names());
    VcsgsTrace& trace = out.trace;

    // Steps 1 and 2: complete skeleton, then exhaustive separating-set search.
    std::vector<std::vector<bool>> adjacent(n, std::vector<bool>(n, false));
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
            adjacent[x][y] = adjacent[y][x] = true;
            VarSet rest = VarSet::all(n).without(x).without(y);
            for (VarSet s : subsets_sorted(rest)) {
                const CiDecision& d = cached.query(x, y, s);
                if (d.independent) {
                    adjacent[x][y] = adjacent[y][x] = false;
                    trace.removals.push_back(EdgeRemovalRecord{x, y, s, d});
                    break;
                }
            }
        }

    // Step 3: conservative triple classification over all subsets.
    std::vector<Triple> collider_triples;
    std::set<Triple> noncollider_marks;
    std::vector<Triple> ambiguous_triples;
    for (int mid = 0; mid < n; ++mid)
        for (int x = 0; x < n; ++x) {
            if (x == mid || !adjacent[x][mid]) continue;
            for (int z = x + 1; z < n; ++z) {
                if (z == mid || !adjacent[z][mid] || adjacent[x][z]) continue;
                TripleRecord rec;
                rec.triple = Triple{x, mid, z};
                bool dependent_with_mid = true;   // given every subset containing mid
                bool dependent_without_mid = true;
                VarSet rest = VarSet::all(n).without(x).without(z);
                for (VarSet s : subsets_sorted(rest)) {
                    const CiDecision& d = cached.query(x, z, s);
                    rec.evidence.push_back(TripleEvidence{s, d.independent});
                    if (d.independent) {
                        if (s.contains(mid)) dependent_with_mid = false;
                        else dependent_without_mid = false;
                    }
                }
                if (dependent_with_mid) {
                    rec.mark = TripleMark::ColliderOriented;
                    collider_triples.push_back(rec.triple);
                } else if (dependent_without_mid) {
                    rec.mark = TripleMark::NonCollider;
                    noncollider_marks.insert(rec.triple);
                } else {
                    rec.mark = TripleMark::Ambiguous;
                    ambiguous_triples.push_back(rec.triple);
                }
                trace.triples.push_back(std::move(rec));
            }
        }

    // Step 4: orient colliders, then close the rules.
    OrientationState st;
    st.dir_parents.assign(n, VarSet());
    st.dir_children.assign(n, VarSet());
    st.undirected.assign(n, VarSet());
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            if (adjacent[x][y]) {
                st.undirected[x] = st.undirected[x].with(y);
                st.undirected[y] = st.undirected[y].with(x);
            }
    for (const Triple& t : collider_triples) {
        if (!st.orient(t.a, t.mid))
            trace.conflicts.push_back(OrientationConflictRecord{t.a, t.mid, "collider"});
        if (!st.orient(t.b, t.mid))
            trace.conflicts.push_back(OrientationConflictRecord{t.b, t.mid, "collider"});
    }
    std::vector<std::pair<int, int>> rule_conflicts;
    close_orientation_rules(st, noncollider_marks, &trace.rule_firings, &rule_conflicts);
    for (auto [from, to] : rule_conflicts)
        trace.conflicts.push_back(OrientationConflictRecord{from, to, "rules"});

    for (int v = 0; v < n; ++v)
        for (int p : st.dir_parents[v]) out.graph.add_directed(p, v);
    for (int a = 0; a < n; ++a)
        for (int b : st.undirected[a])
            if (a < b) out.graph.add_undirected(a, b);
    for (const Triple& t : collider_triples) out.graph.set_mark(t, TripleMark::ColliderOriented);
    for (const Triple& t : noncollider_marks) out.graph.set_mark(t, TripleMark::NonCollider);
    for (const Triple& t : ambiguous_triples) out.graph.set_mark(t, TripleMark::Ambiguous);

    // Step 5: Markov verification over every consistent disambiguation.
    Step5Record& s5 = trace.step5;
    s5.ambiguous_count = static_cast<int>(ambiguous_triples.size());
    if (s5.ambiguous_count > opts.max_ambiguous) {
        s5.aborted_too_many = true;
        s5.passed = false;
    } else {
        auto disambiguations = enumerate_disambiguations(out.graph, opts.max_ambiguous);
        bool all_pass = !disambiguations.empty();
        for (const Disambiguation& d : disambiguations) {
            DisambiguationRecord rec;
            rec.assignment = d.assignment;
            rec.valid = true;
            rec.markov_ok = true;
            const Dag& ext = d.extension;
            for (int v = 0; v < n && rec.markov_ok; ++v) {
                VarSet pa = ext.parents(v);
                VarSet nondesc = VarSet::all(n).minus(ext.descendants(v)).without(v).minus(pa);
                for (int u : nondesc) {
                    const CiDecision& dec = cached.query(v, u, pa);
                    if (!dec.independent) {
                        rec.markov_ok = false;
                        rec.fail_x = v;
                        rec.fail_y = u;
                        rec.fail_cond = pa;
                        break;
                    }
                }
            }
            all_pass = all_pass && rec.markov_ok;
            s5.disambiguations.push_back(rec);
        }
        s5.passed = all_pass;
    }
    out.step5_passed = s5.passed;
    if (s5.passed) out.graph.set_all_nonadjacent_definite();
    return out;
}

ErrorClassification classify_error(const MixedGraph& out_graph, const Dag& truth) {
    if (out_graph.names() != truth.names())
        throw std::invalid_argument("output and truth must share the variable set");
    int n = truth.num_vars();

    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (out_graph.adjacent(a, b) && !truth.adjacent(a, b))
                return {ErrorKind::KindI, "adjacency " + out_graph.names()[a] + "-" +
                                              out_graph.names()[b] + " not in the true graph"};

    for (const auto& [t, mark] : out_graph.marks()) {
        if (mark != TripleMark::NonCollider) continue;
        if (truth.has_edge(t.a, t.mid) && truth.has_edge(t.b, t.mid))
            return {ErrorKind::KindII, "non-collider mark at (" + out_graph.names()[t.a] + "," +
                                           out_graph.names()[t.mid] + "," +
                                           out_graph.names()[t.b] + ") is a collider in truth"};
    }

    for (auto [from, to] : out_graph.directed_edges())
        if (!truth.has_edge(from, to))
            return {ErrorKind::KindIII, "orientation " + out_graph.names()[from] + "->" +
                                            out_graph.names()[to] + " not in the true graph"};

    return {ErrorKind::None, ""};
}

ErrorClassification classify_error(const VcsgsOutput& out, const Dag& truth) {
    return classify_error(out.graph, truth);
}

VarSet estimable_vertices(const VcsgsOutput& out) {
    VarSet s;
    for (int v = 0; v < out.graph.num_vars(); ++v)
        if (out.graph.undirected_neighbors(v).empty()) s = s.with(v);
    return s;
}

}  // namespace causalkit
