#pragma once

#include "causalkit/graph.hpp"
#include "causalkit/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace causalkit {

// ---------------------------------------------------------------------------
// Datasets

enum class ColumnKind { ContinuousUnit, Discrete, Real };

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::ContinuousUnit;
    int states = 0;  // Discrete only
};

struct Dataset {
    std::vector<ColumnSchema> schema;
    Eigen::MatrixXd rows;  // n x |V|; discrete states stored as 0.0, 1.0, ...
    std::uint64_t seed = 0;

    int n() const { return static_cast<int>(rows.rows()); }
    int num_vars() const { return static_cast<int>(schema.size()); }
};

// ---------------------------------------------------------------------------
// Exact population tables
//
// Discrete joints are exact; continuous-smooth joints are discretized on a
// tensor grid with trapezoid weights. Because the grid mass is a product of
// conditional factors, every conditional independence entailed by the
// factorization holds exactly in the discretized table; only the values of
// genuinely nonzero dependences are grid-limited.

class JointTable {
public:
    JointTable(std::vector<int> vars, std::vector<int> sizes, std::vector<double> mass,
               std::vector<std::vector<double>> coords, std::vector<std::vector<double>> weights);

    const std::vector<int>& vars() const { return vars_; }
    const std::vector<int>& sizes() const { return sizes_; }
    int axis_of(int var) const;  // throws if absent
    std::size_t cell_count() const { return mass_.size(); }
    double mass_at(const std::vector<int>& idx) const;
    const std::vector<double>& coords(int axis) const { return coords_[axis]; }
    const std::vector<double>& weights(int axis) const { return weights_[axis]; }

    JointTable marginal(VarSet keep) const;

    // L1 distance between the joint over (x, y, cond) and the
    // conditional-independence factorization; 0 iff x and y are independent
    // given cond in this table.
    double epsilon_dependence(int x, int y, VarSet cond) const;

    // Conditional mass vector of `target` given a configuration of the other
    // axes in `given` (indices into this table's axes).
    std::vector<double> conditional_of(int target_axis, const std::vector<int>& given_axes,
                                       const std::vector<int>& given_states) const;

private:
    std::size_t flat_index(const std::vector<int>& idx) const;

    std::vector<int> vars_;   // ascending variable ids
    std::vector<int> sizes_;  // states (or grid nodes) per axis
    std::vector<std::size_t> strides_;
    std::vector<double> mass_;  // sums to 1
    std::vector<std::vector<double>> coords_;   // embedded value per state
    std::vector<std::vector<double>> weights_;  // integration weight per state (1 if discrete)
};

// ---------------------------------------------------------------------------
// Model families

class DiscreteModel {
public:
    // cpts[v] is row-major [parent_config][state]; parent configurations run
    // over the parents of v in ascending variable order, first parent slowest.
    DiscreteModel(Dag dag, std::vector<int> cardinalities,
                  std::vector<std::vector<double>> cpts);

    const Dag& dag() const { return dag_; }
    int num_vars() const { return dag_.num_vars(); }
    int cardinality(int v) const { return cards_[v]; }
    const std::vector<int>& cardinalities() const { return cards_; }
    const std::vector<std::vector<double>>& cpts() const { return cpts_; }

    int parent_config_count(int v) const;
    // Parent configuration index from a full assignment of all variables.
    int parent_config_index(int v, const std::vector<int>& assignment) const;
    double cpt(int v, int parent_config, int state) const;

    const JointTable& joint() const { return joint_; }

private:
    Dag dag_;
    std::vector<int> cards_;
    std::vector<std::vector<double>> cpts_;
    JointTable joint_;
};

// Conditional density on [0,1]: a uniform floor mixed with a truncated
// Gaussian bump whose centre moves affinely with the parent values. The floor
// keeps densities bounded away from zero; the bump scale controls the
// L1-Lipschitz constant in the parents.
struct SmoothCpd {
    double floor_weight = 1.0;          // in [0,1]; 1 = pure uniform
    double bump_base = 0.5;             // centre when all parents are 0
    std::vector<double> bump_coefs;     // one per parent, ascending order
    double bump_sigma = 0.35;
};

class ContinuousSmoothModel {
public:
    ContinuousSmoothModel(Dag dag, std::vector<SmoothCpd> cpds, double smoothness_L,
                          double floor_T);

    const Dag& dag() const { return dag_; }
    int num_vars() const { return dag_.num_vars(); }
    const std::vector<SmoothCpd>& cpds() const { return cpds_; }
    double smoothness_L() const { return smoothness_L_; }
    double floor_T() const { return floor_T_; }

    double density(int v, double y, const std::vector<double>& parent_values) const;
    double bump_center(int v, const std::vector<double>& parent_values) const;

    // Grid discretization over an ancestral variable set.
    JointTable grid_joint(VarSet over, int points_per_axis) const;
    static int default_grid_points(int dims);

private:
    Dag dag_;
    std::vector<SmoothCpd> cpds_;
    double smoothness_L_;
    double floor_T_;
};

class LinearGaussianModel {
public:
    // coefficients(i, j) is the weight of X_j in the equation of X_i; nonzero
    // exactly on the edges j -> i.
    LinearGaussianModel(Dag dag, Eigen::MatrixXd coefficients, Eigen::VectorXd noise_variances);

    const Dag& dag() const { return dag_; }
    int num_vars() const { return dag_.num_vars(); }
    double coefficient(int from, int to) const { return coef_(to, from); }
    const Eigen::MatrixXd& coefficients() const { return coef_; }
    const Eigen::VectorXd& noise_variances() const { return noise_var_; }

    Eigen::MatrixXd covariance() const;

private:
    Dag dag_;
    Eigen::MatrixXd coef_;
    Eigen::VectorXd noise_var_;
};

using CausalModel = std::variant<DiscreteModel, ContinuousSmoothModel, LinearGaussianModel>;

enum class ModelFamily { Discrete, ContinuousSmooth, LinearGaussian };

ModelFamily family_of(const CausalModel& m);
const Dag& dag_of(const CausalModel& m);

// ---------------------------------------------------------------------------
// Sampling and population queries

Dataset sample(const CausalModel& m, int n, std::uint64_t seed);

// Maximum L1 change of Y's conditional when moving x across its values while
// holding the other parents fixed; the coefficient magnitude in the
// linear-Gaussian case. Requires x to be a parent of y.
double edge_strength(const CausalModel& m, int x, int y);

// || p_{x,y,cond} - p_{x|cond} p_{y|cond} p_{cond} ||_1. Exact for discrete,
// grid quadrature for continuous-smooth (at most 3 conditioning variables).
// Not provided for linear-Gaussian models; query partial_correlation instead.
double epsilon_dependence(const CausalModel& m, int x, int y, VarSet cond);

// Exact partial correlation from the model-implied covariance.
double partial_correlation(const LinearGaussianModel& m, int x, int y, VarSet cond);

// ---------------------------------------------------------------------------
// Assumption validators

struct CheckViolation {
    int var = -1;
    std::string detail;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct CheckResult {
    bool ok = true;
    std::vector<CheckViolation> violations;
    explicit operator bool() const { return ok; }
};

// L1-Lipschitz continuity of every conditional in its conditioning values;
// discrete states are embedded at integers. Trivially true for
// linear-Gaussian models.
CheckResult check_tv_smoothness(const CausalModel& m, double L);

// Uniform floor T on every conditional p(X | U) over all subsets U, checked
// by exact marginalization (discrete) or on the verification grid (smooth).
CheckResult check_nz(const CausalModel& m, double T);

// Density cap 1 + L * |Pa(Y)| for continuous-smooth conditionals, checked on
// the verification grid.
CheckResult check_density_bound(const ContinuousSmoothModel& m);

// Triangle-faithfulness: within every triangle, the dependence between the
// endpoints of an edge is at least k times that edge's strength, for every
// admissible conditioning set. Gaussian models use partial correlations; the
// other families use min-over-values L1 contrasts.
CheckResult check_k_triangle_faithfulness(const CausalModel& m, double k);

// ---------------------------------------------------------------------------
// Random model generation

struct ModelConstraints {
    double k = 0.3;
    double L = 1.0;
    double T = 0.05;
    int num_vars = 5;
    int max_degree = 3;
    int cardinality = 2;      // discrete family
    double edge_prob = 0.35;  // per topologically ordered pair
    int max_attempts = 10000;
};

struct GeneratedModel {
    CausalModel model;
    int attempts = 0;  // rejection count + 1
};

// Rejection-samples a random DAG plus parameters until all three validators
// pass. Throws when the constraints are detectably infeasible or the attempt
// budget runs out.
GeneratedModel random_model(ModelFamily family, const ModelConstraints& c, std::uint64_t seed);

}  // namespace causalkit
