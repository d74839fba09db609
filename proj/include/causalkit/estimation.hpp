#pragma once

#include "causalkit/graph.hpp"
#include "causalkit/scm.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace causalkit {

// Per-axis bin count b = max(1, round((n / log n)^(1/(2+d)))), so the cell
// width shrinks at the sup-norm rate (log n / n)^(1/(2+d)) for d dimensions.
int histogram_bins_per_axis(std::int64_t n, int dims);

// Equal-width histogram on [0,1]^d with the same bin count per axis; the last
// bin is right-closed. density = count * b^d / n integrates to one exactly.
class HistogramDensity {
public:
    HistogramDensity(int dims, int bins_per_axis, std::vector<double> counts, std::int64_t n);

    int dims() const { return dims_; }
    int bins_per_axis() const { return bins_; }
    std::int64_t n() const { return n_; }
    const std::vector<double>& counts() const { return counts_; }

    int cell_of(double v) const;  // per-axis cell index
    double count_at(const std::vector<int>& cell) const;
    double density_at(const std::vector<int>& cell) const;
    double density(const std::vector<double>& point) const;

private:
    int dims_;
    int bins_;
    std::vector<double> counts_;
    std::int64_t n_;
};

// columns: n x d matrix with all values in [0,1]. bins_override = 0 uses the
// bin schedule above.
HistogramDensity fit_histogram(const Eigen::MatrixXd& columns, int bins_override = 0);

struct TableAxis {
    int bins = 1;
    bool discrete = false;  // continuous axes span [0,1]

    double step() const { return discrete ? 1.0 : 1.0 / bins; }
    bool operator==(const TableAxis&) const = default;
};

// Conditional density (probability for a discrete target) per parent cell,
// stored row-major with the target axis last.
struct ConditionalDensityTable {
    TableAxis y;
    std::vector<TableAxis> parents;
    std::vector<double> values;   // [parent_cell * y.bins + y_cell]
    std::vector<char> low_mass;   // per parent cell

    int parent_cell_count() const;
    double value(int parent_cell, int y_cell) const { return values[parent_cell * y.bins + y_cell]; }
    bool any_low_mass() const;

    bool operator==(const ConditionalDensityTable&) const = default;
};

// Ratio estimator p^(y | pa) = p^(y, pa) / p^(pa) from a joint histogram over
// (Pa..., Y) — target axis last — and a marginal histogram over Pa whose bins
// coarsen the joint's parent bins exactly. Parent cells whose marginal
// density estimate falls below T/2 (in particular empty cells) are flagged
// low-mass instead of divided through.
ConditionalDensityTable conditional_estimate(const HistogramDensity& joint,
                                             const HistogramDensity& marginal, double T);

struct VertexEstimate {
    std::vector<int> parents;  // ascending variable ids
    ConditionalDensityTable table;
};

// Output of the edge estimation pass: per vertex either a conditional
// estimate or nothing ("unknown").
struct EstimatedModel {
    MixedGraph graph;
    std::vector<std::optional<VertexEstimate>> vertices;
    bool tv_violation = false;  // some vertex was abandoned by the smoothness gate

    bool all_unknown() const;
};

// Estimates p(y | parents) for every vertex whose incident edges are all
// oriented, using exact frequencies on discrete axes and scheduled histograms
// on continuous ones. A vertex estimate is kept only if it passes the
// finite-sample smoothness gate: no low-mass parent cell, every value within
// the density cap 1 + L * |Pa|, and adjacent parent cells within 2 * L * step
// in L1. Everything else is unknown.
EstimatedModel edge_estimation(const MixedGraph& graph, const Dataset& data, double L, double T);

// Max over estimated vertices, target cells and parent configurations of
// |p^(y | pa_est) - p(y | pa_model)|, where the estimate's parent set must be
// contained in the model's and the shared coordinates agree. Unknown entries
// contribute zero. Vertices whose estimated parent set is not contained in
// the model's are skipped and reported through `incompatible`.
double conditional_probability_distance(const EstimatedModel& est, const CausalModel& model,
                                        std::vector<int>* incompatible = nullptr);

}  // namespace causalkit
