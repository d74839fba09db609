#include "causalkit/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace causalkit {

namespace {

bool next_cell(std::vector<int>& idx, const std::vector<int>& sizes) {
    for (int i = static_cast<int>(idx.size()) - 1; i >= 0; --i) {
        if (++idx[i] < sizes[i]) return true;
        idx[i] = 0;
    }
    return false;
}

std::size_t cells_of(const std::vector<int>& sizes) {
    std::size_t c = 1;
    for (int s : sizes) c *= static_cast<std::size_t>(s);
    return c;
}

}  // namespace

int histogram_bins_per_axis(std::int64_t n, int dims) {
    if (dims < 1) throw std::invalid_argument("dimensionality must be positive");
    if (n < 2) return 1;
    double ratio = static_cast<double>(n) / std::log(static_cast<double>(n));
    int b = static_cast<int>(std::llround(std::pow(ratio, 1.0 / (2.0 + dims))));
    return std::max(1, b);
}

HistogramDensity::HistogramDensity(int dims, int bins_per_axis, std::vector<double> counts,
                                   std::int64_t n)
    : dims_(dims), bins_(bins_per_axis), counts_(std::move(counts)), n_(n) {
    if (dims_ < 1 || bins_ < 1) throw std::invalid_argument("invalid histogram shape");
    if (n_ < 1) throw std::invalid_argument("histogram requires data");
    std::size_t want = 1;
    for (int i = 0; i < dims_; ++i) want *= static_cast<std::size_t>(bins_);
    if (counts_.size() != want) throw std::invalid_argument("histogram count size mismatch");
    double total = std::accumulate(counts_.begin(), counts_.end(), 0.0);
    if (std::abs(total - static_cast<double>(n_)) > 1e-6)
        throw std::invalid_argument("histogram counts must sum to n");
}

int HistogramDensity::cell_of(double v) const {
    int c = static_cast<int>(v * bins_);
    return std::clamp(c, 0, bins_ - 1);  // right-closed final bin
}

double HistogramDensity::count_at(const std::vector<int>& cell) const {
    if (static_cast<int>(cell.size()) != dims_) throw std::invalid_argument("cell rank mismatch");
    std::size_t flat = 0;
    for (int i = 0; i < dims_; ++i) flat = flat * bins_ + cell[i];
    return counts_[flat];
}

double HistogramDensity::density_at(const std::vector<int>& cell) const {
    return count_at(cell) * std::pow(static_cast<double>(bins_), dims_) / static_cast<double>(n_);
}

double HistogramDensity::density(const std::vector<double>& point) const {
    std::vector<int> cell(dims_);
    for (int i = 0; i < dims_; ++i) cell[i] = cell_of(point[i]);
    return density_at(cell);
}

HistogramDensity fit_histogram(const Eigen::MatrixXd& columns, int bins_override) {
    std::int64_t n = columns.rows();
    int d = static_cast<int>(columns.cols());
    if (n < 1) throw std::invalid_argument("cannot fit a histogram to empty data");
    if (d < 1) throw std::invalid_argument("dimensionality must be positive");
    int b = bins_override > 0 ? bins_override : histogram_bins_per_axis(n, d);
    std::size_t cells = 1;
    for (int i = 0; i < d; ++i) cells *= static_cast<std::size_t>(b);
    std::vector<double> counts(cells, 0.0);
    for (std::int64_t r = 0; r < n; ++r) {
        std::size_t flat = 0;
        for (int i = 0; i < d; ++i) {
            double v = columns(r, i);
            if (v < 0.0 || v > 1.0)
                throw std::invalid_argument("histogram data must lie in [0,1]");
            int c = std::clamp(static_cast<int>(v * b), 0, b - 1);
            flat = flat * b + c;
        }
        counts[flat] += 1.0;
    }
    return HistogramDensity(d, b, std::move(counts), n);
}

int ConditionalDensityTable::parent_cell_count() const {
    int c = 1;
    for (const TableAxis& a : parents) c *= a.bins;
    return c;
}

bool ConditionalDensityTable::any_low_mass() const {
    return std::any_of(low_mass.begin(), low_mass.end(), [](char c) { return c != 0; });
}

ConditionalDensityTable conditional_estimate(const HistogramDensity& joint,
                                             const HistogramDensity& marginal, double T) {
    int d = joint.dims();
    if (marginal.dims() != d - 1)
        throw std::invalid_argument("marginal must drop exactly the target axis");
    if (joint.n() != marginal.n())
        throw std::invalid_argument("joint and marginal must come from the same sample");
    int bj = joint.bins_per_axis(), bm = marginal.bins_per_axis();
    if (bm > bj || bj % bm != 0)
        throw std::invalid_argument("marginal bins must coarsen the joint bins exactly");
    int coarsen = bj / bm;

    ConditionalDensityTable out;
    out.y = TableAxis{bj, false};
    out.parents.assign(d - 1, TableAxis{bj, false});
    std::size_t pa_cells = 1;
    for (int i = 0; i < d - 1; ++i) pa_cells *= static_cast<std::size_t>(bj);
    out.values.assign(pa_cells * bj, 0.0);
    out.low_mass.assign(pa_cells, 0);

    double n = static_cast<double>(joint.n());
    std::vector<int> pa(d - 1, 0), mcell(d - 1, 0), jcell(d, 0);
    std::vector<int> pa_sizes(d - 1, bj);
    std::size_t pa_flat = 0;
    bool more = true;
    while (more) {
        for (int i = 0; i < d - 1; ++i) mcell[i] = pa[i] / coarsen;
        double marg_count = marginal.count_at(mcell);
        double marg_density =
            marg_count * std::pow(static_cast<double>(bm), d - 1) / n;
        if (marg_count <= 0.0 || marg_density < T / 2.0) {
            out.low_mass[pa_flat] = 1;
        } else {
            for (int yc = 0; yc < bj; ++yc) {
                for (int i = 0; i < d - 1; ++i) jcell[i] = pa[i];
                jcell[d - 1] = yc;
                // conditional mass within the coarse parent cell, scaled to a
                // density over the target bin
                double cond_mass =
                    joint.count_at(jcell) / marg_count * std::pow(static_cast<double>(coarsen), d - 1);
                out.values[pa_flat * bj + yc] = cond_mass * bj;
            }
        }
        ++pa_flat;
        more = d > 1 && next_cell(pa, pa_sizes);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Edge estimation

namespace {

struct AxisPlan {
    TableAxis axis;
    int column = 0;
};

int cell_of_value(const TableAxis& a, double v) {
    if (a.discrete) return std::clamp(static_cast<int>(std::llround(v)), 0, a.bins - 1);
    return std::clamp(static_cast<int>(v * a.bins), 0, a.bins - 1);
}

}  // namespace

bool EstimatedModel::all_unknown() const {
    return std::none_of(vertices.begin(), vertices.end(),
                        [](const auto& v) { return v.has_value(); });
}

EstimatedModel edge_estimation(const MixedGraph& graph, const Dataset& data, double L, double T) {
    int nv = graph.num_vars();
    if (data.num_vars() != nv)
        throw std::invalid_argument("dataset columns must match the graph variables");
    std::int64_t n = data.n();

    EstimatedModel out;
    out.graph = graph;
    out.vertices.assign(nv, std::nullopt);

    for (int v = 0; v < nv; ++v) {
        if (!graph.undirected_neighbors(v).empty()) continue;  // not estimable

        std::vector<int> parents = graph.dir_parents(v).to_vector();
        int d = static_cast<int>(parents.size()) + 1;
        int cont_bins = histogram_bins_per_axis(n, d);
        auto axis_for = [&](int col) {
            const ColumnSchema& s = data.schema[col];
            if (s.kind == ColumnKind::Discrete) return TableAxis{s.states, true};
            if (s.kind == ColumnKind::ContinuousUnit) return TableAxis{cont_bins, false};
            throw std::invalid_argument("edge estimation requires unit-interval or discrete data");
        };

        std::vector<AxisPlan> plan;  // parents..., target last
        for (int p : parents) plan.push_back({axis_for(p), p});
        plan.push_back({axis_for(v), v});

        std::vector<int> sizes;
        for (const AxisPlan& a : plan) sizes.push_back(a.axis.bins);
        std::size_t cells = cells_of(sizes);
        std::vector<double> counts(cells, 0.0);
        for (std::int64_t r = 0; r < n; ++r) {
            std::size_t flat = 0;
            for (const AxisPlan& a : plan)
                flat = flat * a.axis.bins + cell_of_value(a.axis, data.rows(r, a.column));
            counts[flat] += 1.0;
        }

        int yb = plan.back().axis.bins;
        std::size_t pa_cells = cells / yb;

        ConditionalDensityTable table;
        table.y = plan.back().axis;
        for (std::size_t i = 0; i + 1 < plan.size(); ++i) table.parents.push_back(plan[i].axis);
        table.values.assign(cells, 0.0);
        table.low_mass.assign(pa_cells, 0);

        double parent_volume = 1.0;  // product of continuous parent cell widths
        for (const TableAxis& a : table.parents)
            if (!a.discrete) parent_volume /= a.bins;
        double y_scale = table.y.discrete ? 1.0 : table.y.bins;

        bool ok = true;
        for (std::size_t pc = 0; pc < pa_cells && ok; ++pc) {
            double marg = 0.0;
            for (int yc = 0; yc < yb; ++yc) marg += counts[pc * yb + yc];
            double marg_density = (marg / n) / parent_volume;
            if (marg <= 0.0 || marg_density < T / 2.0) {
                table.low_mass[pc] = 1;
                ok = false;  // unreliable cell: abandon this vertex
                break;
            }
            for (int yc = 0; yc < yb; ++yc) {
                double val = counts[pc * yb + yc] / marg * y_scale;
                table.values[pc * yb + yc] = val;
                if (val > 1.0 + L * static_cast<double>(parents.size()) + 1e-12) ok = false;
            }
        }

        // finite-sample smoothness gate between adjacent parent cells, with a
        // factor-2 allowance on L
        if (ok && !table.parents.empty()) {
            std::vector<int> pa_sizes;
            for (const TableAxis& a : table.parents) pa_sizes.push_back(a.bins);
            std::vector<int> idx(pa_sizes.size(), 0);
            std::vector<std::size_t> strides(pa_sizes.size());
            std::size_t acc = 1;
            for (int i = static_cast<int>(pa_sizes.size()) - 1; i >= 0; --i) {
                strides[i] = acc;
                acc *= static_cast<std::size_t>(pa_sizes[i]);
            }
            double y_width = table.y.discrete ? 1.0 : 1.0 / table.y.bins;
            do {
                std::size_t pc = 0;
                for (std::size_t i = 0; i < idx.size(); ++i) pc += strides[i] * idx[i];
                for (std::size_t ax = 0; ax < pa_sizes.size() && ok; ++ax) {
                    if (idx[ax] + 1 >= pa_sizes[ax]) continue;
                    std::size_t qc = pc + strides[ax];
                    double l1 = 0.0;
                    for (int yc = 0; yc < yb; ++yc)
                        l1 += std::abs(table.values[pc * yb + yc] - table.values[qc * yb + yc]) *
                              y_width;
                    if (l1 > 2.0 * L * table.parents[ax].step() + 1e-12) ok = false;
                }
            } while (ok && next_cell(idx, pa_sizes));
        }

        if (ok) {
            out.vertices[v] = VertexEstimate{std::move(parents), std::move(table)};
        } else {
            out.tv_violation = true;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Conditional probability distance

namespace {

constexpr int kExtraParentGrid = 17;

double distance_vs_discrete(const VertexEstimate& est, const DiscreteModel& m, int v) {
    const Dag& g = m.dag();
    std::vector<int> model_parents = g.parents(v).to_vector();
    std::vector<int> model_sizes;
    for (int p : model_parents) model_sizes.push_back(m.cardinality(p));

    // positions of the estimated parents inside the model's parent list
    std::vector<int> slot(est.parents.size());
    for (std::size_t i = 0; i < est.parents.size(); ++i) {
        auto it = std::find(model_parents.begin(), model_parents.end(), est.parents[i]);
        slot[i] = static_cast<int>(it - model_parents.begin());
    }

    double worst = 0.0;
    std::vector<int> cfg(model_parents.size(), 0);
    bool more = true;
    while (more) {
        int pa_cell = 0;
        for (std::size_t i = 0; i < est.parents.size(); ++i)
            pa_cell = pa_cell * est.table.parents[i].bins + cfg[slot[i]];
        int model_cfg = 0;
        for (std::size_t i = 0; i < model_parents.size(); ++i)
            model_cfg = model_cfg * model_sizes[i] + cfg[i];
        for (int s = 0; s < m.cardinality(v); ++s) {
            double gap = std::abs(est.table.value(pa_cell, s) - m.cpt(v, model_cfg, s));
            worst = std::max(worst, gap);
        }
        more = !model_parents.empty() && next_cell(cfg, model_sizes);
    }
    return worst;
}

double distance_vs_smooth(const VertexEstimate& est, const ContinuousSmoothModel& m, int v) {
    const Dag& g = m.dag();
    std::vector<int> model_parents = g.parents(v).to_vector();
    std::vector<int> est_slot(model_parents.size(), -1);  // model slot -> est slot
    for (std::size_t i = 0; i < model_parents.size(); ++i) {
        auto it = std::find(est.parents.begin(), est.parents.end(), model_parents[i]);
        if (it != est.parents.end()) est_slot[i] = static_cast<int>(it - est.parents.begin());
    }
    std::vector<int> model_slot(est.parents.size(), -1);  // est slot -> model slot
    for (std::size_t i = 0; i < model_parents.size(); ++i)
        if (est_slot[i] >= 0) model_slot[est_slot[i]] = static_cast<int>(i);

    // evaluation grid: estimated parent-bin centres for shared parents, a
    // fixed grid for model-only parents, the estimate's target bin centres
    std::vector<int> sizes;
    for (std::size_t i = 0; i < model_parents.size(); ++i)
        sizes.push_back(est_slot[i] >= 0 ? est.table.parents[est_slot[i]].bins : kExtraParentGrid);

    double worst = 0.0;
    std::vector<int> cfg(sizes.size(), 0);
    std::vector<double> pa_vals(sizes.size(), 0.0);
    bool more = true;
    while (more) {
        int pa_cell = 0;
        for (std::size_t i = 0; i < est.parents.size(); ++i)
            pa_cell = pa_cell * est.table.parents[i].bins + cfg[model_slot[i]];
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            if (est_slot[i] >= 0) {
                const TableAxis& a = est.table.parents[est_slot[i]];
                pa_vals[i] = a.discrete ? cfg[i] : (cfg[i] + 0.5) / a.bins;
            } else {
                pa_vals[i] = static_cast<double>(cfg[i]) / (kExtraParentGrid - 1);
            }
        }
        for (int yc = 0; yc < est.table.y.bins; ++yc) {
            double yv = est.table.y.discrete ? yc : (yc + 0.5) / est.table.y.bins;
            double truth = m.density(v, yv, pa_vals);
            double gap = std::abs(est.table.value(pa_cell, yc) - truth);
            worst = std::max(worst, gap);
        }
        more = !sizes.empty() && next_cell(cfg, sizes);
    }
    return worst;
}

}  // namespace

double conditional_probability_distance(const EstimatedModel& est, const CausalModel& model,
                                        std::vector<int>* incompatible) {
    const Dag& g = dag_of(model);
    if (g.num_vars() != est.graph.num_vars())
        throw std::invalid_argument("estimate and model must share the variable set");
    if (family_of(model) == ModelFamily::LinearGaussian)
        throw std::invalid_argument(
            "conditional probability distance is not defined for the linear-Gaussian family");

    double worst = 0.0;
    for (int v = 0; v < g.num_vars(); ++v) {
        if (!est.vertices[v]) continue;  // unknown contributes zero
        const VertexEstimate& ve = *est.vertices[v];
        VarSet model_pa = g.parents(v);
        bool contained = true;
        for (int p : ve.parents)
            if (!model_pa.contains(p)) contained = false;
        if (!contained) {
            if (incompatible) incompatible->push_back(v);
            continue;
        }
        if (const auto* dm = std::get_if<DiscreteModel>(&model)) {
            worst = std::max(worst, distance_vs_discrete(ve, *dm, v));
        } else {
            worst = std::max(worst,
                             distance_vs_smooth(ve, std::get<ContinuousSmoothModel>(model), v));
        }
    }
    return worst;
}

}  // namespace causalkit
