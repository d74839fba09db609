#include "causalkit/graph.hpp"

#include <algorithm>
#include <numeric>

namespace causalkit {

std::vector<VarSet> subsets_sorted(VarSet ground) {
    std::vector<VarSet> out;
    std::uint32_t g = ground.bits();
    std::uint32_t s = 0;
    while (true) {
        out.push_back(VarSet(s));
        if (s == g) break;
        s = (s - g) & g;  // next submask in increasing numeric order
    }
    std::stable_sort(out.begin(), out.end(), [](VarSet a, VarSet b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a.bits() < b.bits();
    });
    return out;
}

namespace {

std::vector<std::string> default_names(int n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
    return names;
}

void check_unique_names(const std::vector<std::string>& names) {
    if (names.size() > 32)
        throw std::invalid_argument("graphs support at most 32 variables");
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("variable names must be unique");
}

}  // namespace

Dag::Dag(int num_vars) : Dag(default_names(num_vars)) {}

Dag::Dag(std::vector<std::string> names) : names_(std::move(names)) {
    check_unique_names(names_);
    parents_.assign(names_.size(), VarSet());
    children_.assign(names_.size(), VarSet());
}

void Dag::check_var(int v) const {
    if (v < 0 || v >= num_vars()) throw std::invalid_argument("variable index out of range");
}

void Dag::add_edge(int from, int to) {
    check_var(from);
    check_var(to);
    if (from == to) throw std::invalid_argument("self-loops are not allowed");
    if (has_edge(from, to)) return;
    parents_[to] = parents_[to].with(from);
    children_[from] = children_[from].with(to);
    ++num_edges_;
}

bool Dag::has_edge(int from, int to) const {
    check_var(from);
    check_var(to);
    return parents_[to].contains(from);
}

bool Dag::adjacent(int a, int b) const { return has_edge(a, b) || has_edge(b, a); }

VarSet Dag::parents(int v) const {
    check_var(v);
    return parents_[v];
}

VarSet Dag::children(int v) const {
    check_var(v);
    return children_[v];
}

std::vector<std::pair<int, int>> Dag::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(num_edges_);
    for (int v = 0; v < num_vars(); ++v)
        for (int p : parents_[v]) out.emplace_back(p, v);
    std::sort(out.begin(), out.end());
    return out;
}

VarSet Dag::ancestors(int v) const {
    check_var(v);
    VarSet seen;
    VarSet frontier = parents_[v];
    while (!frontier.empty()) {
        VarSet next;
        for (int u : frontier) {
            if (seen.contains(u)) continue;
            seen = seen.with(u);
            next = next | parents_[u];
        }
        frontier = next.minus(seen);
    }
    return seen.without(v);
}

VarSet Dag::descendants(int v) const {
    check_var(v);
    VarSet seen;
    VarSet frontier = children_[v];
    while (!frontier.empty()) {
        VarSet next;
        for (int u : frontier) {
            if (seen.contains(u)) continue;
            seen = seen.with(u);
            next = next | children_[u];
        }
        frontier = next.minus(seen);
    }
    return seen.without(v);
}

VarSet Dag::ancestral_closure(VarSet s) const {
    VarSet out = s;
    for (int v : s) out = out | ancestors(v);
    return out;
}

bool Dag::is_ancestral(VarSet s) const {
    for (int v : s)
        if (!parents(v).subset_of(s)) return false;
    return true;
}

std::optional<std::vector<int>> Dag::topological_order() const {
    int n = num_vars();
    std::vector<int> indegree(n);
    for (int v = 0; v < n; ++v) indegree[v] = parents_[v].size();
    std::vector<int> order;
    order.reserve(n);
    std::vector<int> ready;
    for (int v = 0; v < n; ++v)
        if (indegree[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
        int v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (int c : children_[v])
            if (--indegree[c] == 0) ready.push_back(c);
    }
    if (static_cast<int>(order.size()) != n) return std::nullopt;
    return order;
}

bool is_acyclic(const Dag& g) { return g.topological_order().has_value(); }

bool d_separated(const Dag& g, int x, int y, VarSet cond) {
    if (x < 0 || x >= g.num_vars() || y < 0 || y >= g.num_vars())
        throw std::invalid_argument("variable index out of range");
    if (x == y) throw std::invalid_argument("d-separation requires distinct variables");
    if (cond.contains(x) || cond.contains(y))
        throw std::invalid_argument("conditioning set must not contain the tested pair");

    // an_cond = cond plus its ancestors: a collider is open iff it lies there.
    VarSet an_cond = g.ancestral_closure(cond);

    // Visit states are (node, arrived-from-parent?) pairs.
    const int n = g.num_vars();
    std::vector<char> seen_down(n, 0), seen_up(n, 0);
    std::vector<std::pair<int, bool>> stack;
    stack.emplace_back(x, false);  // as if entered against an edge
    while (!stack.empty()) {
        auto [v, from_parent] = stack.back();
        stack.pop_back();
        char& seen = from_parent ? seen_down[v] : seen_up[v];
        if (seen) continue;
        seen = 1;
        if (v == y) return false;
        if (!from_parent) {
            if (!cond.contains(v)) {
                for (int p : g.parents(v)) stack.emplace_back(p, false);
                for (int c : g.children(v)) stack.emplace_back(c, true);
            }
        } else {
            if (!cond.contains(v))
                for (int c : g.children(v)) stack.emplace_back(c, true);
            if (an_cond.contains(v))
                for (int p : g.parents(v)) stack.emplace_back(p, false);
        }
    }
    return true;
}

Triple make_triple(int x, int mid, int z) {
    if (x == z || x == mid || z == mid) throw std::invalid_argument("degenerate triple");
    return Triple{std::min(x, z), mid, std::max(x, z)};
}

std::map<Triple, TripleClass> classify_triples(const Dag& g) {
    if (!is_acyclic(g)) throw std::invalid_argument("classify_triples requires a DAG");
    std::map<Triple, TripleClass> out;
    int n = g.num_vars();
    for (int mid = 0; mid < n; ++mid) {
        for (int a = 0; a < n; ++a) {
            if (a == mid || !g.adjacent(a, mid)) continue;
            for (int b = a + 1; b < n; ++b) {
                if (b == mid || !g.adjacent(b, mid)) continue;
                bool collider = g.has_edge(a, mid) && g.has_edge(b, mid);
                bool shielded = g.adjacent(a, b);
                TripleClass cls = collider
                                      ? (shielded ? TripleClass::ShieldedCollider
                                                  : TripleClass::UnshieldedCollider)
                                      : (shielded ? TripleClass::ShieldedNonCollider
                                                  : TripleClass::UnshieldedNonCollider);
                out.emplace(Triple{a, mid, b}, cls);
            }
        }
    }
    return out;
}

namespace {

std::set<Triple> unshielded_colliders_of(const Dag& g) {
    std::set<Triple> out;
    for (const auto& [t, cls] : classify_triples(g))
        if (cls == TripleClass::UnshieldedCollider) out.insert(t);
    return out;
}

std::set<Triple> unshielded_noncolliders_of(const Dag& g) {
    std::set<Triple> out;
    for (const auto& [t, cls] : classify_triples(g))
        if (cls == TripleClass::UnshieldedNonCollider) out.insert(t);
    return out;
}

}  // namespace

bool markov_equivalent(const Dag& g1, const Dag& g2) {
    if (g1.names() != g2.names())
        throw std::invalid_argument("markov_equivalent requires the same variable set");
    int n = g1.num_vars();
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (g1.adjacent(a, b) != g2.adjacent(a, b)) return false;
    return unshielded_colliders_of(g1) == unshielded_colliders_of(g2);
}

std::vector<std::pair<int, int>> Pattern::directed_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int v = 0; v < num_vars(); ++v)
        for (int p : dir_parents[v]) out.emplace_back(p, v);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<int, int>> Pattern::undirected_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < num_vars(); ++a)
        for (int b : undirected[a])
            if (a < b) out.emplace_back(a, b);
    return out;
}

MixedGraph::MixedGraph(std::vector<std::string> names) : names_(std::move(names)) {
    check_unique_names(names_);
    dir_parents_.assign(names_.size(), VarSet());
    dir_children_.assign(names_.size(), VarSet());
    undirected_.assign(names_.size(), VarSet());
}

void MixedGraph::check_var(int v) const {
    if (v < 0 || v >= num_vars()) throw std::invalid_argument("variable index out of range");
}

bool MixedGraph::adjacent(int a, int b) const {
    check_var(a);
    check_var(b);
    return undirected_[a].contains(b) || dir_parents_[a].contains(b) ||
           dir_parents_[b].contains(a);
}

void MixedGraph::add_directed(int from, int to) {
    check_var(from);
    check_var(to);
    if (from == to) throw std::invalid_argument("self-loops are not allowed");
    if (adjacent(from, to) && !has_directed(from, to))
        throw std::invalid_argument("edge already present with a different kind");
    dir_parents_[to] = dir_parents_[to].with(from);
    dir_children_[from] = dir_children_[from].with(to);
}

void MixedGraph::add_undirected(int a, int b) {
    check_var(a);
    check_var(b);
    if (a == b) throw std::invalid_argument("self-loops are not allowed");
    if (adjacent(a, b) && !has_undirected(a, b))
        throw std::invalid_argument("edge already present with a different kind");
    undirected_[a] = undirected_[a].with(b);
    undirected_[b] = undirected_[b].with(a);
}

void MixedGraph::orient(int from, int to) {
    if (!has_undirected(from, to)) throw std::invalid_argument("no undirected edge to orient");
    undirected_[from] = undirected_[from].without(to);
    undirected_[to] = undirected_[to].without(from);
    add_directed(from, to);
}

std::vector<std::pair<int, int>> MixedGraph::directed_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int v = 0; v < num_vars(); ++v)
        for (int p : dir_parents_[v]) out.emplace_back(p, v);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<int, int>> MixedGraph::undirected_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < num_vars(); ++a)
        for (int b : undirected_[a])
            if (a < b) out.emplace_back(a, b);
    return out;
}

void MixedGraph::set_mark(const Triple& t, TripleMark mark) {
    Triple c = make_triple(t.a, t.mid, t.b);
    if (!adjacent(c.a, c.mid) || !adjacent(c.b, c.mid) || adjacent(c.a, c.b))
        throw std::invalid_argument("marked triple must be unshielded in the graph");
    marks_[c] = mark;
}

std::optional<TripleMark> MixedGraph::mark_of(const Triple& t) const {
    auto it = marks_.find(make_triple(t.a, t.mid, t.b));
    if (it == marks_.end()) return std::nullopt;
    return it->second;
}

std::vector<Triple> MixedGraph::unshielded_triples() const {
    std::vector<Triple> out;
    int n = num_vars();
    for (int mid = 0; mid < n; ++mid)
        for (int a = 0; a < n; ++a) {
            if (a == mid || !adjacent(a, mid)) continue;
            for (int b = a + 1; b < n; ++b) {
                if (b == mid || !adjacent(b, mid) || adjacent(a, b)) continue;
                out.push_back(Triple{a, mid, b});
            }
        }
    std::sort(out.begin(), out.end());
    return out;
}

void MixedGraph::set_definitely_nonadjacent(int a, int b) {
    check_var(a);
    check_var(b);
    if (adjacent(a, b))
        throw std::invalid_argument("cannot mark an adjacent pair as non-adjacent");
    definite_nonadjacent_.emplace(std::min(a, b), std::max(a, b));
}

void MixedGraph::set_all_nonadjacent_definite() {
    for (int a = 0; a < num_vars(); ++a)
        for (int b = a + 1; b < num_vars(); ++b)
            if (!adjacent(a, b)) definite_nonadjacent_.emplace(a, b);
}

AdjacencyStatus MixedGraph::nonadjacency_status(int a, int b) const {
    if (adjacent(a, b)) throw std::invalid_argument("pair is adjacent");
    auto key = std::make_pair(std::min(a, b), std::max(a, b));
    return definite_nonadjacent_.count(key) ? AdjacencyStatus::DefinitelyNonAdjacent
                                            : AdjacencyStatus::ApparentlyNonAdjacent;
}

std::vector<std::pair<int, int>> MixedGraph::definitely_nonadjacent_pairs() const {
    return {definite_nonadjacent_.begin(), definite_nonadjacent_.end()};
}

Pattern MixedGraph::to_pattern() const {
    return Pattern{names_, dir_parents_, undirected_};
}

OrientationState OrientationState::from_skeleton(const Dag& g) {
    OrientationState st;
    int n = g.num_vars();
    st.dir_parents.assign(n, VarSet());
    st.dir_children.assign(n, VarSet());
    st.undirected.assign(n, VarSet());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b && g.adjacent(a, b)) st.undirected[a] = st.undirected[a].with(b);
    return st;
}

bool OrientationState::adjacent(int a, int b) const {
    return undirected[a].contains(b) || dir_parents[a].contains(b) || dir_parents[b].contains(a);
}

bool OrientationState::orient(int from, int to) {
    if (dir_parents[to].contains(from)) return true;    // already as requested
    if (dir_parents[from].contains(to)) return false;   // conflict
    undirected[from] = undirected[from].without(to);
    undirected[to] = undirected[to].without(from);
    dir_parents[to] = dir_parents[to].with(from);
    dir_children[from] = dir_children[from].with(to);
    return true;
}

bool OrientationState::directed_part_acyclic() const {
    int n = static_cast<int>(dir_parents.size());
    std::vector<int> indegree(n);
    for (int v = 0; v < n; ++v) indegree[v] = dir_parents[v].size();
    std::vector<int> ready;
    for (int v = 0; v < n; ++v)
        if (indegree[v] == 0) ready.push_back(v);
    int emitted = 0;
    while (!ready.empty()) {
        int v = ready.back();
        ready.pop_back();
        ++emitted;
        for (int c : dir_children[v])
            if (--indegree[c] == 0) ready.push_back(c);
    }
    return emitted == n;
}

void close_orientation_rules(OrientationState& st, const std::set<Triple>& noncolliders,
                             std::vector<RuleFiring>* firings,
                             std::vector<std::pair<int, int>>* conflicts) {
    int n = static_cast<int>(st.dir_parents.size());
    auto fire = [&](int rule, int from, int to, const Triple& premise) -> bool {
        if (!st.undirected[from].contains(to)) return false;
        if (!st.orient(from, to)) {
            if (conflicts) conflicts->emplace_back(from, to);
            return false;
        }
        if (firings) firings->push_back(RuleFiring{rule, from, to, premise});
        return true;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Triple& t : noncolliders) {
            // Rule 1, both endpoint roles.
            if (st.dir_parents[t.mid].contains(t.a) && st.undirected[t.mid].contains(t.b))
                changed |= fire(1, t.mid, t.b, t);
            if (st.dir_parents[t.mid].contains(t.b) && st.undirected[t.mid].contains(t.a))
                changed |= fire(1, t.mid, t.a, t);
            // Rule 3: x -> y <- z for x,z the endpoints, w the mid.
            VarSet common = st.dir_children[t.a] & st.dir_children[t.b];
            for (int y : common)
                if (st.undirected[t.mid].contains(y)) changed |= fire(3, t.mid, y, t);
        }
        // Rule 2.
        for (int x = 0; x < n; ++x)
            for (int z : st.undirected[x]) {
                VarSet between = st.dir_children[x] & st.dir_parents[z];
                if (!between.empty())
                    changed |= fire(2, x, z, Triple{x, *between.begin(), z});
            }
    }
}

Pattern pattern_of(const Dag& g) {
    if (!is_acyclic(g)) throw std::invalid_argument("pattern_of requires a DAG");
    OrientationState st = OrientationState::from_skeleton(g);
    for (const Triple& t : unshielded_colliders_of(g)) {
        st.orient(t.a, t.mid);
        st.orient(t.b, t.mid);
    }
    std::set<Triple> noncolliders = unshielded_noncolliders_of(g);
    std::vector<std::pair<int, int>> conflicts;
    close_orientation_rules(st, noncolliders, nullptr, &conflicts);
    if (!conflicts.empty())
        throw std::logic_error("orientation conflict while building a pattern from a DAG");
    return Pattern{g.names(), st.dir_parents, st.undirected};
}

std::optional<Dag> try_consistent_extension(const std::vector<std::string>& names,
                                            const OrientationState& st) {
    int n = static_cast<int>(st.dir_parents.size());
    OrientationState work = st;
    std::vector<std::pair<int, int>> new_edges;
    VarSet remaining = VarSet::all(n);

    auto adjacency = [&](int v) {
        return work.dir_parents[v] | work.dir_children[v] | work.undirected[v];
    };

    while (!remaining.empty()) {
        int sink = -1;
        for (int x : remaining) {
            if (!(work.dir_children[x] & remaining).empty()) continue;
            VarSet nb_undir = work.undirected[x] & remaining;
            VarSet nb_all = (work.dir_parents[x] | nb_undir) & remaining;
            bool ok = true;
            for (int u : nb_undir) {
                VarSet others = nb_all.without(u);
                if (!others.subset_of(adjacency(u))) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                sink = x;
                break;
            }
        }
        if (sink < 0) return std::nullopt;
        for (int u : work.undirected[sink] & remaining) {
            work.orient(u, sink);
            new_edges.emplace_back(u, sink);
        }
        remaining = remaining.without(sink);
    }

    Dag out{names};
    for (int v = 0; v < n; ++v)
        for (int p : st.dir_parents[v]) out.add_edge(p, v);
    for (auto [from, to] : new_edges) out.add_edge(from, to);
    if (!is_acyclic(out)) return std::nullopt;  // directed part of st was cyclic
    return out;
}

std::vector<Disambiguation> enumerate_disambiguations(const MixedGraph& m, int max_ambiguous) {
    std::vector<Triple> ambiguous;
    std::set<Triple> base_noncolliders;
    for (const auto& [t, mark] : m.marks()) {
        if (mark == TripleMark::Ambiguous) ambiguous.push_back(t);
        if (mark == TripleMark::NonCollider) base_noncolliders.insert(t);
    }
    int t_count = static_cast<int>(ambiguous.size());
    if (t_count > max_ambiguous)
        throw std::runtime_error("too many ambiguous triples to disambiguate (" +
                                 std::to_string(t_count) + ")");

    std::vector<Disambiguation> out;
    for (std::uint32_t assignment = 0; assignment < (1u << t_count); ++assignment) {
        OrientationState st;
        st.dir_parents.assign(m.num_vars(), VarSet());
        st.dir_children.assign(m.num_vars(), VarSet());
        st.undirected.assign(m.num_vars(), VarSet());
        for (auto [from, to] : m.directed_edges()) st.orient(from, to);
        for (auto [a, b] : m.undirected_edges()) {
            st.undirected[a] = st.undirected[a].with(b);
            st.undirected[b] = st.undirected[b].with(a);
        }
        std::set<Triple> noncolliders = base_noncolliders;
        bool ok = true;
        for (int i = 0; i < t_count && ok; ++i) {
            const Triple& t = ambiguous[i];
            if (assignment & (1u << i)) {
                ok = st.orient(t.a, t.mid) && st.orient(t.b, t.mid);
            } else {
                noncolliders.insert(t);
            }
        }
        if (!ok) continue;
        std::vector<std::pair<int, int>> conflicts;
        close_orientation_rules(st, noncolliders, nullptr, &conflicts);
        if (!conflicts.empty()) continue;
        if (!st.directed_part_acyclic()) continue;
        auto ext = try_consistent_extension(m.names(), st);
        if (!ext) continue;
        out.push_back(Disambiguation{assignment,
                                     Pattern{m.names(), st.dir_parents, st.undirected},
                                     std::move(*ext)});
    }
    return out;
}

std::vector<Pattern> consistent_disambiguations(const MixedGraph& m) {
    std::vector<Pattern> out;
    for (auto& d : enumerate_disambiguations(m, 20)) out.push_back(std::move(d.pattern));
    return out;
}

Dag consistent_dag_extension(const Pattern& p) {
    OrientationState st;
    st.dir_parents = p.dir_parents;
    st.undirected = p.undirected;
    st.dir_children.assign(p.num_vars(), VarSet());
    for (int v = 0; v < p.num_vars(); ++v)
        for (int u : p.dir_parents[v]) st.dir_children[u] = st.dir_children[u].with(v);
    auto ext = try_consistent_extension(p.names, st);
    if (!ext) throw std::runtime_error("pattern has no consistent DAG extension");
    return *ext;
}

}  // namespace causalkit
