#include "causalkit/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace causalkit {

namespace {

const char* mark_name(TripleMark m) {
    switch (m) {
        case TripleMark::ColliderOriented: return "collider";
        case TripleMark::NonCollider: return "noncollider";
        case TripleMark::Ambiguous: return "ambiguous";
    }
    return "?";
}

TripleMark mark_from_name(const std::string& s) {
    if (s == "collider") return TripleMark::ColliderOriented;
    if (s == "noncollider") return TripleMark::NonCollider;
    if (s == "ambiguous") return TripleMark::Ambiguous;
    throw std::invalid_argument("unknown triple mark: " + s);
}

Json edges_json(const std::vector<std::pair<int, int>>& edges) {
    Json arr = Json::array();
    for (auto [a, b] : edges) arr.push_back(Json::array({a, b}));
    return arr;
}

std::vector<std::string> vars_from_json(const Json& j) {
    std::vector<std::string> names;
    for (const auto& v : j.at("vars")) names.push_back(v.get<std::string>());
    return names;
}

}  // namespace

Json dag_to_json(const Dag& g) {
    Json j;
    j["vars"] = g.names();
    j["directed"] = edges_json(g.edges());
    j["undirected"] = Json::array();
    j["marks"] = Json::array();
    return j;
}

Dag dag_from_json(const Json& j) {
    Dag g(vars_from_json(j));
    for (const auto& e : j.value("directed", Json::array()))
        g.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
    if (!j.value("undirected", Json::array()).empty())
        throw std::invalid_argument("a DAG file cannot carry undirected edges");
    return g;
}

Json mixed_graph_to_json(const MixedGraph& g) {
    Json j;
    j["vars"] = g.names();
    j["directed"] = edges_json(g.directed_edges());
    j["undirected"] = edges_json(g.undirected_edges());
    Json marks = Json::array();
    for (const auto& [t, mark] : g.marks())
        marks.push_back(Json{{"triple", Json::array({t.a, t.mid, t.b})},
                             {"mark", mark_name(mark)}});
    j["marks"] = marks;
    j["definite_nonadjacent"] = edges_json(g.definitely_nonadjacent_pairs());
    return j;
}

MixedGraph mixed_graph_from_json(const Json& j) {
    MixedGraph g(vars_from_json(j));
    for (const auto& e : j.value("directed", Json::array()))
        g.add_directed(e.at(0).get<int>(), e.at(1).get<int>());
    for (const auto& e : j.value("undirected", Json::array()))
        g.add_undirected(e.at(0).get<int>(), e.at(1).get<int>());
    for (const auto& m : j.value("marks", Json::array())) {
        const auto& t = m.at("triple");
        g.set_mark(Triple{t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()},
                   mark_from_name(m.at("mark").get<std::string>()));
    }
    for (const auto& e : j.value("definite_nonadjacent", Json::array()))
        g.set_definitely_nonadjacent(e.at(0).get<int>(), e.at(1).get<int>());
    return g;
}

Json pattern_to_json(const Pattern& p) {
    Json j;
    j["vars"] = p.names;
    j["directed"] = edges_json(p.directed_edges());
    j["undirected"] = edges_json(p.undirected_edges());
    j["marks"] = Json::array();
    return j;
}

Pattern pattern_from_json(const Json& j) {
    std::vector<std::string> names = vars_from_json(j);
    Pattern p;
    p.names = names;
    p.dir_parents.assign(names.size(), VarSet());
    p.undirected.assign(names.size(), VarSet());
    for (const auto& e : j.value("directed", Json::array())) {
        int a = e.at(0).get<int>(), b = e.at(1).get<int>();
        p.dir_parents[b] = p.dir_parents[b].with(a);
    }
    for (const auto& e : j.value("undirected", Json::array())) {
        int a = e.at(0).get<int>(), b = e.at(1).get<int>();
        p.undirected[a] = p.undirected[a].with(b);
        p.undirected[b] = p.undirected[b].with(a);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Models

Json model_to_json(const CausalModel& m) {
    Json j;
    j["dag"] = dag_to_json(dag_of(m));
    if (const auto* dm = std::get_if<DiscreteModel>(&m)) {
        j["family"] = "discrete";
        j["cardinalities"] = dm->cardinalities();
        Json cpts = Json::array();
        for (int v = 0; v < dm->num_vars(); ++v) {
            Json table = Json::array();
            for (int cfg = 0; cfg < dm->parent_config_count(v); ++cfg) {
                Json row = Json::array();
                for (int s = 0; s < dm->cardinality(v); ++s) row.push_back(dm->cpt(v, cfg, s));
                table.push_back(row);
            }
            cpts.push_back(Json{{"var", v},
                                {"parents", dm->dag().parents(v).to_vector()},
                                {"table", table}});
        }
        j["cpts"] = cpts;
    } else if (const auto* sm = std::get_if<ContinuousSmoothModel>(&m)) {
        j["family"] = "continuous_smooth";
        j["smoothness_L"] = sm->smoothness_L();
        j["floor_T"] = sm->floor_T();
        Json cpds = Json::array();
        for (int v = 0; v < sm->num_vars(); ++v) {
            const SmoothCpd& c = sm->cpds()[v];
            cpds.push_back(Json{{"var", v},
                                {"floor_weight", c.floor_weight},
                                {"bump_base", c.bump_base},
                                {"bump_coefs", c.bump_coefs},
                                {"bump_sigma", c.bump_sigma}});
        }
        j["cpds"] = cpds;
    } else {
        const auto& gm = std::get<LinearGaussianModel>(m);
        j["family"] = "linear_gaussian";
        Json coefs = Json::array();
        for (auto [from, to] : gm.dag().edges())
            coefs.push_back(
                Json{{"from", from}, {"to", to}, {"value", gm.coefficient(from, to)}});
        j["coefficients"] = coefs;
        std::vector<double> noise(gm.noise_variances().data(),
                                  gm.noise_variances().data() + gm.num_vars());
        j["noise_variances"] = noise;
    }
    return j;
}

CausalModel model_from_json(const Json& j) {
    Dag dag = dag_from_json(j.at("dag"));
    std::string family = j.at("family").get<std::string>();
    if (family == "discrete") {
        std::vector<int> cards = j.at("cardinalities").get<std::vector<int>>();
        std::vector<std::vector<double>> cpts(dag.num_vars());
        for (const auto& entry : j.at("cpts")) {
            int v = entry.at("var").get<int>();
            if (v < 0 || v >= dag.num_vars()) throw std::invalid_argument("cpt var out of range");
            auto parents = entry.value("parents", Json::array()).get<std::vector<int>>();
            if (parents != dag.parents(v).to_vector())
                throw std::invalid_argument("cpt parent list does not match the graph");
            for (const auto& row : entry.at("table"))
                for (const auto& p : row) cpts[v].push_back(p.get<double>());
        }
        return DiscreteModel(std::move(dag), std::move(cards), std::move(cpts));
    }
    if (family == "continuous_smooth") {
        std::vector<SmoothCpd> cpds(dag.num_vars());
        for (const auto& entry : j.at("cpds")) {
            int v = entry.at("var").get<int>();
            if (v < 0 || v >= dag.num_vars()) throw std::invalid_argument("cpd var out of range");
            SmoothCpd c;
            c.floor_weight = entry.at("floor_weight").get<double>();
            c.bump_base = entry.at("bump_base").get<double>();
            c.bump_coefs = entry.at("bump_coefs").get<std::vector<double>>();
            c.bump_sigma = entry.at("bump_sigma").get<double>();
            cpds[v] = std::move(c);
        }
        return ContinuousSmoothModel(std::move(dag), std::move(cpds),
                                     j.at("smoothness_L").get<double>(),
                                     j.at("floor_T").get<double>());
    }
    if (family == "linear_gaussian") {
        int n = dag.num_vars();
        Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(n, n);
        for (const auto& e : j.at("coefficients"))
            coef(e.at("to").get<int>(), e.at("from").get<int>()) = e.at("value").get<double>();
        auto noise = j.at("noise_variances").get<std::vector<double>>();
        Eigen::VectorXd nv = Eigen::Map<Eigen::VectorXd>(noise.data(), noise.size());
        return LinearGaussianModel(std::move(dag), std::move(coef), std::move(nv));
    }
    throw std::invalid_argument("unknown model family: " + family);
}

// ---------------------------------------------------------------------------
// Datasets

namespace {

const char* kind_name(ColumnKind k) {
    switch (k) {
        case ColumnKind::ContinuousUnit: return "continuous";
        case ColumnKind::Discrete: return "discrete";
        case ColumnKind::Real: return "real";
    }
    return "?";
}

ColumnKind kind_from_name(const std::string& s) {
    if (s == "continuous") return ColumnKind::ContinuousUnit;
    if (s == "discrete") return ColumnKind::Discrete;
    if (s == "real") return ColumnKind::Real;
    throw std::invalid_argument("unknown column kind: " + s);
}

}  // namespace

std::string dataset_to_csv(const Dataset& ds) {
    std::string out;
    for (int v = 0; v < ds.num_vars(); ++v) {
        if (v) out += ',';
        out += ds.schema[v].name;
    }
    out += '\n';
    char buf[64];
    for (int r = 0; r < ds.n(); ++r) {
        for (int v = 0; v < ds.num_vars(); ++v) {
            if (v) out += ',';
            if (ds.schema[v].kind == ColumnKind::Discrete) {
                std::snprintf(buf, sizeof buf, "%d", static_cast<int>(ds.rows(r, v)));
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", ds.rows(r, v));
            }
            out += buf;
        }
        out += '\n';
    }
    return out;
}

Json dataset_meta_to_json(const Dataset& ds) {
    Json j;
    j["seed"] = ds.seed;
    j["n"] = ds.n();
    Json schema = Json::array();
    for (const ColumnSchema& c : ds.schema) {
        Json col{{"name", c.name}, {"kind", kind_name(c.kind)}};
        if (c.kind == ColumnKind::Discrete) col["states"] = c.states;
        schema.push_back(col);
    }
    j["schema"] = schema;
    return j;
}

Dataset dataset_from_csv(const std::string& csv, const Json* meta) {
    Dataset ds;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty dataset file");
    std::vector<std::string> names;
    {
        std::istringstream hdr(line);
        std::string cell;
        while (std::getline(hdr, cell, ',')) names.push_back(cell);
    }
    int nv = static_cast<int>(names.size());
    std::vector<std::vector<double>> cols(nv);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        int v = 0;
        while (std::getline(row, cell, ',')) {
            if (v >= nv) throw std::invalid_argument("row wider than the header");
            cols[v++].push_back(std::stod(cell));
        }
        if (v != nv) throw std::invalid_argument("row narrower than the header");
    }
    std::size_t n = cols.empty() ? 0 : cols[0].size();
    if (n == 0) throw std::invalid_argument("dataset has no rows");
    ds.rows.resize(n, nv);
    for (int v = 0; v < nv; ++v)
        for (std::size_t r = 0; r < n; ++r) ds.rows(r, v) = cols[v][r];

    if (meta) {
        ds.seed = meta->value("seed", 0ull);
        for (const auto& col : meta->at("schema")) {
            ColumnSchema c;
            c.name = col.at("name").get<std::string>();
            c.kind = kind_from_name(col.at("kind").get<std::string>());
            c.states = col.value("states", 0);
            ds.schema.push_back(c);
        }
        if (static_cast<int>(ds.schema.size()) != nv ||
            [&] {
                for (int v = 0; v < nv; ++v)
                    if (ds.schema[v].name != names[v]) return true;
                return false;
            }())
            throw std::invalid_argument("metadata schema does not match the CSV header");
        for (int v = 0; v < nv; ++v) {
            const ColumnSchema& c = ds.schema[v];
            for (std::size_t r = 0; r < n; ++r) {
                double x = ds.rows(r, v);
                bool ok = true;
                if (c.kind == ColumnKind::Discrete)
                    ok = x == std::floor(x) && x >= 0 && x < c.states;
                else if (c.kind == ColumnKind::ContinuousUnit)
                    ok = x >= 0.0 && x <= 1.0;
                if (!ok)
                    throw std::invalid_argument("value outside the declared domain of column " +
                                                c.name);
            }
        }
    } else {
        // infer: integer-valued small-range columns are discrete, unit-interval
        // columns continuous, anything else real
        for (int v = 0; v < nv; ++v) {
            ColumnSchema c;
            c.name = names[v];
            bool integral = true;
            double lo = cols[v][0], hi = cols[v][0];
            for (double x : cols[v]) {
                if (x != std::floor(x)) integral = false;
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            if (integral && lo >= 0 && hi <= 9) {
                c.kind = ColumnKind::Discrete;
                c.states = static_cast<int>(hi) + 1;
            } else if (lo >= 0.0 && hi <= 1.0) {
                c.kind = ColumnKind::ContinuousUnit;
            } else {
                c.kind = ColumnKind::Real;
            }
            ds.schema.push_back(c);
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Estimates

Json estimated_model_to_json(const EstimatedModel& est) {
    Json j;
    j["graph"] = mixed_graph_to_json(est.graph);
    j["tv_violation"] = est.tv_violation;
    Json verts = Json::array();
    for (int v = 0; v < est.graph.num_vars(); ++v) {
        if (!est.vertices[v]) {
            verts.push_back(Json{{"var", v}, {"entry", "unknown"}});
            continue;
        }
        const VertexEstimate& ve = *est.vertices[v];
        Json table = Json::array();
        for (int pc = 0; pc < ve.table.parent_cell_count(); ++pc) {
            Json row = Json::array();
            for (int yc = 0; yc < ve.table.y.bins; ++yc) row.push_back(ve.table.value(pc, yc));
            table.push_back(row);
        }
        Json parent_bins = Json::array(), parent_discrete = Json::array();
        for (const TableAxis& a : ve.table.parents) {
            parent_bins.push_back(a.bins);
            parent_discrete.push_back(a.discrete);
        }
        verts.push_back(Json{{"var", v},
                             {"parents", ve.parents},
                             {"bins", ve.table.y.bins},
                             {"y_discrete", ve.table.y.discrete},
                             {"parent_bins", parent_bins},
                             {"parent_discrete", parent_discrete},
                             {"table", table}});
    }
    j["vertices"] = verts;
    return j;
}

EstimatedModel estimated_model_from_json(const Json& j) {
    EstimatedModel est;
    est.graph = mixed_graph_from_json(j.at("graph"));
    est.tv_violation = j.value("tv_violation", false);
    est.vertices.assign(est.graph.num_vars(), std::nullopt);
    for (const auto& entry : j.at("vertices")) {
        int v = entry.at("var").get<int>();
        if (entry.contains("entry")) continue;  // unknown
        VertexEstimate ve;
        ve.parents = entry.at("parents").get<std::vector<int>>();
        ve.table.y = TableAxis{entry.at("bins").get<int>(), entry.at("y_discrete").get<bool>()};
        auto pb = entry.at("parent_bins").get<std::vector<int>>();
        auto pd = entry.at("parent_discrete").get<std::vector<bool>>();
        for (std::size_t i = 0; i < pb.size(); ++i)
            ve.table.parents.push_back(TableAxis{pb[i], pd[i]});
        for (const auto& row : entry.at("table"))
            for (const auto& val : row) ve.table.values.push_back(val.get<double>());
        ve.table.low_mass.assign(ve.table.parent_cell_count(), 0);
        est.vertices[v] = std::move(ve);
    }
    return est;
}

// ---------------------------------------------------------------------------
// Traces

Json trace_to_json(const VcsgsTrace& trace) {
    Json arr = Json::array();
    for (const EdgeRemovalRecord& r : trace.removals)
        arr.push_back(Json{{"step", "remove"},
                           {"x", r.x},
                           {"y", r.y},
                           {"sepset", r.sepset.to_vector()},
                           {"statistic", r.decision.statistic},
                           {"threshold", r.decision.threshold}});
    for (const TripleRecord& t : trace.triples) {
        Json evidence = Json::array();
        for (const TripleEvidence& e : t.evidence)
            evidence.push_back(Json{{"cond", e.cond.to_vector()}, {"independent", e.independent}});
        arr.push_back(Json{{"step", "triple"},
                           {"triple", Json::array({t.triple.a, t.triple.mid, t.triple.b})},
                           {"mark", mark_name(t.mark)},
                           {"evidence", evidence}});
    }
    for (const RuleFiring& f : trace.rule_firings)
        arr.push_back(Json{{"step", "rule"},
                           {"rule", f.rule},
                           {"from", f.from},
                           {"to", f.to},
                           {"premise", Json::array({f.premise.a, f.premise.mid, f.premise.b})}});
    for (const OrientationConflictRecord& c : trace.conflicts)
        arr.push_back(
            Json{{"step", "conflict"}, {"from", c.from}, {"to", c.to}, {"stage", c.stage}});
    for (const DisambiguationRecord& d : trace.step5.disambiguations) {
        Json rec{{"step", "disambiguation"},
                 {"assignment", d.assignment},
                 {"valid", d.valid},
                 {"markov_ok", d.markov_ok}};
        if (!d.markov_ok)
            rec["failing_query"] = Json{{"x", d.fail_x},
                                        {"y", d.fail_y},
                                        {"cond", d.fail_cond.to_vector()}};
        arr.push_back(rec);
    }
    arr.push_back(Json{{"step", "verdict"},
                       {"ambiguous_triples", trace.step5.ambiguous_count},
                       {"aborted", trace.step5.aborted_too_many},
                       {"passed", trace.step5.passed}});
    return arr;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

const char* family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::Discrete: return "discrete";
        case ModelFamily::ContinuousSmooth: return "continuous_smooth";
        case ModelFamily::LinearGaussian: return "linear_gaussian";
    }
    return "?";
}

ModelFamily family_from_name(const std::string& s) {
    if (s == "discrete") return ModelFamily::Discrete;
    if (s == "continuous_smooth" || s == "smooth") return ModelFamily::ContinuousSmooth;
    if (s == "linear_gaussian" || s == "gaussian") return ModelFamily::LinearGaussian;
    throw std::invalid_argument("unknown model family: " + s);
}

}  // namespace

Json experiment_config_to_json(const ExperimentConfig& cfg) {
    return Json{{"family", family_name(cfg.family)},
                {"num_vars", cfg.num_vars},
                {"max_degree", cfg.max_degree},
                {"num_models", cfg.num_models},
                {"k", cfg.k},
                {"L", cfg.L},
                {"T", cfg.T},
                {"schedule_c", cfg.schedule_c},
                {"n_grid", cfg.n_grid},
                {"replicates", cfg.replicates},
                {"base_seed", cfg.base_seed},
                {"delta", cfg.delta},
                {"jobs", cfg.jobs},
                {"cardinality", cfg.cardinality},
                {"edge_prob", cfg.edge_prob},
                {"max_attempts", cfg.max_attempts}};
}

ExperimentConfig experiment_config_from_json(const Json& j) {
    ExperimentConfig cfg;
    if (j.contains("family")) cfg.family = family_from_name(j.at("family").get<std::string>());
    cfg.num_vars = j.value("num_vars", cfg.num_vars);
    cfg.max_degree = j.value("max_degree", cfg.max_degree);
    cfg.num_models = j.value("num_models", cfg.num_models);
    cfg.k = j.value("k", cfg.k);
    cfg.L = j.value("L", cfg.L);
    cfg.T = j.value("T", cfg.T);
    cfg.schedule_c = j.value("schedule_c", cfg.schedule_c);
    if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<int>>();
    cfg.replicates = j.value("replicates", cfg.replicates);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.cardinality = j.value("cardinality", cfg.cardinality);
    cfg.edge_prob = j.value("edge_prob", cfg.edge_prob);
    cfg.max_attempts = j.value("max_attempts", cfg.max_attempts);
    return cfg;
}

std::string report_to_csv(const ExperimentReport& report) {
    std::string out = "model_id,n,replicate,error_kind,psi_class,distance,exceeded,runtime_ms\n";
    char buf[128];
    for (const ExperimentRow& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,", r.model_id, r.n, r.replicate);
        out += buf;
        out += r.error_kind;
        out += ',';
        out += r.psi_class;
        std::snprintf(buf, sizeof buf, ",%.12g,%d,%" PRId64 "\n", r.distance,
                      r.exceeded ? 1 : 0, static_cast<std::int64_t>(r.runtime_ms));
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out) throw std::runtime_error("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move " + tmp + " into place");
}

}  // namespace causalkit
