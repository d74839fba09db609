#include "causalkit/scm.hpp"

#include "causalkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace causalkit {

namespace {

// Row-major odometer over mixed-radix configurations, first axis slowest.
bool next_config(std::vector<int>& idx, const std::vector<int>& sizes) {
    for (int i = static_cast<int>(idx.size()) - 1; i >= 0; --i) {
        if (++idx[i] < sizes[i]) return true;
        idx[i] = 0;
    }
    return false;
}

// Deterministic sampling primitives: the standard library distributions are
// implementation-defined, so draws are built from raw engine output.
class SampleRng {
public:
    explicit SampleRng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        int span = hi - lo + 1;
        int v = lo + static_cast<int>(uniform01() * span);
        return std::min(v, hi);
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 1.0 - uniform01();  // (0, 1]
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 eng_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

std::vector<std::size_t> strides_for(const std::vector<int>& sizes) {
    std::vector<std::size_t> strides(sizes.size());
    std::size_t acc = 1;
    for (int i = static_cast<int>(sizes.size()) - 1; i >= 0; --i) {
        strides[i] = acc;
        acc *= static_cast<std::size_t>(sizes[i]);
    }
    return strides;
}

constexpr std::size_t kMaxTableCells = std::size_t(1) << 24;

}  // namespace

// ---------------------------------------------------------------------------
// JointTable

JointTable::JointTable(std::vector<int> vars, std::vector<int> sizes, std::vector<double> mass,
                       std::vector<std::vector<double>> coords,
                       std::vector<std::vector<double>> weights)
    : vars_(std::move(vars)),
      sizes_(std::move(sizes)),
      mass_(std::move(mass)),
      coords_(std::move(coords)),
      weights_(std::move(weights)) {
    if (!std::is_sorted(vars_.begin(), vars_.end()))
        throw std::invalid_argument("JointTable variables must be ascending");
    if (sizes_.size() != vars_.size() || coords_.size() != vars_.size() ||
        weights_.size() != vars_.size())
        throw std::invalid_argument("JointTable axis metadata mismatch");
    std::size_t cells = 1;
    for (std::size_t a = 0; a < sizes_.size(); ++a) {
        if (sizes_[a] <= 0) throw std::invalid_argument("JointTable axis of size zero");
        if (static_cast<int>(coords_[a].size()) != sizes_[a] ||
            static_cast<int>(weights_[a].size()) != sizes_[a])
            throw std::invalid_argument("JointTable axis metadata mismatch");
        cells *= static_cast<std::size_t>(sizes_[a]);
    }
    if (cells != mass_.size()) throw std::invalid_argument("JointTable mass size mismatch");
    strides_ = strides_for(sizes_);
    double total = std::accumulate(mass_.begin(), mass_.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument("JointTable mass must be positive");
    for (double& m : mass_) m /= total;
}

int JointTable::axis_of(int var) const {
    auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
    if (it == vars_.end() || *it != var) throw std::invalid_argument("variable not in table");
    return static_cast<int>(it - vars_.begin());
}

std::size_t JointTable::flat_index(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) flat += strides_[a] * idx[a];
    return flat;
}

double JointTable::mass_at(const std::vector<int>& idx) const {
    if (idx.size() != sizes_.size()) throw std::invalid_argument("index rank mismatch");
    return mass_[flat_index(idx)];
}

JointTable JointTable::marginal(VarSet keep) const {
    std::vector<int> kept_axes;
    for (int v : keep) kept_axes.push_back(axis_of(v));
    std::vector<int> kvars, ksizes;
    std::vector<std::vector<double>> kcoords, kweights;
    for (int a : kept_axes) {
        kvars.push_back(vars_[a]);
        ksizes.push_back(sizes_[a]);
        kcoords.push_back(coords_[a]);
        kweights.push_back(weights_[a]);
    }
    std::size_t kcells = 1;
    for (int s : ksizes) kcells *= static_cast<std::size_t>(s);
    auto kstrides = strides_for(ksizes);
    std::vector<double> kmass(kcells, 0.0);

    std::vector<int> idx(sizes_.size(), 0);
    std::size_t flat = 0;
    do {
        std::size_t kflat = 0;
        for (std::size_t i = 0; i < kept_axes.size(); ++i)
            kflat += kstrides[i] * idx[kept_axes[i]];
        kmass[kflat] += mass_[flat];
        ++flat;
    } while (next_config(idx, sizes_));
    return JointTable(std::move(kvars), std::move(ksizes), std::move(kmass), std::move(kcoords),
                      std::move(kweights));
}

double JointTable::epsilon_dependence(int x, int y, VarSet cond) const {
    if (x == y) throw std::invalid_argument("epsilon requires distinct variables");
    if (cond.contains(x) || cond.contains(y))
        throw std::invalid_argument("conditioning set must not contain the tested pair");
    JointTable marg = marginal(cond.with(x).with(y));

    int ax = marg.axis_of(x), ay = marg.axis_of(y);
    int sx = marg.sizes_[ax], sy = marg.sizes_[ay];
    std::vector<int> cond_axes;
    for (std::size_t a = 0; a < marg.sizes_.size(); ++a)
        if (static_cast<int>(a) != ax && static_cast<int>(a) != ay)
            cond_axes.push_back(static_cast<int>(a));
    std::size_t n_cfg = 1;
    std::vector<std::size_t> cfg_strides(cond_axes.size());
    for (int i = static_cast<int>(cond_axes.size()) - 1; i >= 0; --i) {
        cfg_strides[i] = n_cfg;
        n_cfg *= static_cast<std::size_t>(marg.sizes_[cond_axes[i]]);
    }
    auto cfg_of = [&](const std::vector<int>& idx) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < cond_axes.size(); ++i)
            c += cfg_strides[i] * idx[cond_axes[i]];
        return c;
    };

    std::vector<double> row(n_cfg * sx, 0.0), col(n_cfg * sy, 0.0), tot(n_cfg, 0.0);
    std::vector<int> idx(marg.sizes_.size(), 0);
    std::size_t flat = 0;
    do {
        std::size_t c = cfg_of(idx);
        double m = marg.mass_[flat++];
        row[c * sx + idx[ax]] += m;
        col[c * sy + idx[ay]] += m;
        tot[c] += m;
    } while (next_config(idx, marg.sizes_));

    double eps = 0.0;
    idx.assign(marg.sizes_.size(), 0);
    flat = 0;
    do {
        std::size_t c = cfg_of(idx);
        if (tot[c] > 0.0) {
            double expected = row[c * sx + idx[ax]] * col[c * sy + idx[ay]] / tot[c];
            eps += std::abs(marg.mass_[flat] - expected);
        }
        ++flat;
    } while (next_config(idx, marg.sizes_));
    return eps;
}

std::vector<double> JointTable::conditional_of(int target_axis,
                                               const std::vector<int>& given_axes,
                                               const std::vector<int>& given_states) const {
    if (given_axes.size() != given_states.size())
        throw std::invalid_argument("given axes/states mismatch");
    int st = sizes_[target_axis];
    std::vector<double> out(st, 0.0);
    if (given_axes.size() + 1 == sizes_.size()) {
        std::vector<int> idx(sizes_.size(), 0);
        for (std::size_t i = 0; i < given_axes.size(); ++i) idx[given_axes[i]] = given_states[i];
        for (int s = 0; s < st; ++s) {
            idx[target_axis] = s;
            out[s] = mass_[flat_index(idx)];
        }
    } else {
        std::vector<int> idx(sizes_.size(), 0);
        std::size_t flat = 0;
        do {
            bool match = true;
            for (std::size_t i = 0; i < given_axes.size(); ++i)
                if (idx[given_axes[i]] != given_states[i]) {
                    match = false;
                    break;
                }
            if (match) out[idx[target_axis]] += mass_[flat];
            ++flat;
        } while (next_config(idx, sizes_));
    }
    double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (total <= 0.0) return {};
    for (double& v : out) v /= total;
    return out;
}

// ---------------------------------------------------------------------------
// DiscreteModel

namespace {

JointTable build_discrete_joint(const Dag& dag, const std::vector<int>& cards,
                                const std::vector<std::vector<double>>& cpts) {
    int n = dag.num_vars();
    std::size_t cells = 1;
    for (int c : cards) {
        cells *= static_cast<std::size_t>(c);
        if (cells > kMaxTableCells) throw std::invalid_argument("joint table too large");
    }
    std::vector<int> vars(n);
    std::iota(vars.begin(), vars.end(), 0);
    std::vector<std::vector<double>> coords(n), weights(n);
    for (int v = 0; v < n; ++v) {
        coords[v].resize(cards[v]);
        std::iota(coords[v].begin(), coords[v].end(), 0.0);
        weights[v].assign(cards[v], 1.0);
    }
    std::vector<double> mass(cells, 0.0);
    std::vector<int> idx(n, 0);
    std::vector<int> sizes = cards;
    std::size_t flat = 0;
    do {
        double m = 1.0;
        for (int v = 0; v < n; ++v) {
            int cfg = 0;
            for (int p : dag.parents(v)) cfg = cfg * cards[p] + idx[p];
            m *= cpts[v][static_cast<std::size_t>(cfg) * cards[v] + idx[v]];
        }
        mass[flat++] = m;
    } while (next_config(idx, sizes));
    return JointTable(std::move(vars), std::move(sizes), std::move(mass), std::move(coords),
                      std::move(weights));
}

}  // namespace

DiscreteModel::DiscreteModel(Dag dag, std::vector<int> cardinalities,
                             std::vector<std::vector<double>> cpts)
    : dag_(std::move(dag)),
      cards_(std::move(cardinalities)),
      cpts_(std::move(cpts)),
      joint_({0}, {1}, {1.0}, {{0.0}}, {{1.0}}) {
    int n = dag_.num_vars();
    if (!is_acyclic(dag_)) throw std::invalid_argument("model graph must be acyclic");
    if (static_cast<int>(cards_.size()) != n || static_cast<int>(cpts_.size()) != n)
        throw std::invalid_argument("model field sizes must match the variable count");
    for (int v = 0; v < n; ++v) {
        if (cards_[v] < 2) throw std::invalid_argument("cardinalities must be at least 2");
        std::size_t want = static_cast<std::size_t>(parent_config_count(v)) * cards_[v];
        if (cpts_[v].size() != want)
            throw std::invalid_argument("CPT size does not match parent cardinalities");
        for (int cfg = 0; cfg < parent_config_count(v); ++cfg) {
            double sum = 0.0;
            for (int s = 0; s < cards_[v]; ++s) {
                double p = cpts_[v][static_cast<std::size_t>(cfg) * cards_[v] + s];
                if (p < 0.0) throw std::invalid_argument("CPT entries must be non-negative");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("CPT rows must sum to 1");
            for (int s = 0; s < cards_[v]; ++s)
                cpts_[v][static_cast<std::size_t>(cfg) * cards_[v] + s] /= sum;
        }
    }
    joint_ = build_discrete_joint(dag_, cards_, cpts_);
}

int DiscreteModel::parent_config_count(int v) const {
    int count = 1;
    for (int p : dag_.parents(v)) count *= cards_[p];
    return count;
}

int DiscreteModel::parent_config_index(int v, const std::vector<int>& assignment) const {
    int cfg = 0;
    for (int p : dag_.parents(v)) cfg = cfg * cards_[p] + assignment[p];
    return cfg;
}

double DiscreteModel::cpt(int v, int parent_config, int state) const {
    return cpts_[v][static_cast<std::size_t>(parent_config) * cards_[v] + state];
}

// ---------------------------------------------------------------------------
// ContinuousSmoothModel

ContinuousSmoothModel::ContinuousSmoothModel(Dag dag, std::vector<SmoothCpd> cpds,
                                             double smoothness_L, double floor_T)
    : dag_(std::move(dag)),
      cpds_(std::move(cpds)),
      smoothness_L_(smoothness_L),
      floor_T_(floor_T) {
    if (!is_acyclic(dag_)) throw std::invalid_argument("model graph must be acyclic");
    if (static_cast<int>(cpds_.size()) != dag_.num_vars())
        throw std::invalid_argument("one conditional per variable required");
    if (!(smoothness_L_ > 0.0)) throw std::invalid_argument("smoothness bound must be positive");
    if (!(floor_T_ > 0.0 && floor_T_ < 1.0))
        throw std::invalid_argument("density floor must lie in (0,1)");
    for (int v = 0; v < dag_.num_vars(); ++v) {
        const SmoothCpd& c = cpds_[v];
        if (c.floor_weight < 0.0 || c.floor_weight > 1.0)
            throw std::invalid_argument("floor weight must lie in [0,1]");
        if (static_cast<int>(c.bump_coefs.size()) != dag_.parents(v).size())
            throw std::invalid_argument("bump coefficients must match the parent count");
        if (!(c.bump_sigma >= 0.05)) throw std::invalid_argument("bump sigma too small");
    }
}

double ContinuousSmoothModel::bump_center(int v, const std::vector<double>& parent_values) const {
    const SmoothCpd& c = cpds_[v];
    double mu = c.bump_base;
    for (std::size_t j = 0; j < c.bump_coefs.size(); ++j) mu += c.bump_coefs[j] * parent_values[j];
    return std::clamp(mu, 0.0, 1.0);
}

double ContinuousSmoothModel::density(int v, double y,
                                      const std::vector<double>& parent_values) const {
    const SmoothCpd& c = cpds_[v];
    if (c.floor_weight >= 1.0) return 1.0;
    double mu = bump_center(v, parent_values);
    double s = c.bump_sigma;
    double z = normal_cdf((1.0 - mu) / s) - normal_cdf((0.0 - mu) / s);
    double bump = normal_pdf((y - mu) / s) / (s * z);
    return c.floor_weight + (1.0 - c.floor_weight) * bump;
}

int ContinuousSmoothModel::default_grid_points(int dims) {
    if (dims <= 4) return 33;
    if (dims == 5) return 17;
    if (dims == 6) return 9;
    throw std::invalid_argument("grid quadrature limited to 6 continuous dimensions");
}

JointTable ContinuousSmoothModel::grid_joint(VarSet over, int points_per_axis) const {
    if (!dag_.is_ancestral(over))
        throw std::invalid_argument("grid_joint requires an ancestral variable set");
    std::vector<int> vars = over.to_vector();
    int d = static_cast<int>(vars.size());
    int g = points_per_axis;
    if (g < 2) throw std::invalid_argument("need at least 2 grid points");
    std::vector<int> sizes(d, g);
    double h = 1.0 / (g - 1);
    std::vector<double> nodes(g), wts(g, h);
    for (int i = 0; i < g; ++i) nodes[i] = i * h;
    wts.front() = wts.back() = h / 2.0;  // trapezoid

    std::vector<std::vector<double>> coords(d, nodes), weights(d, wts);
    std::size_t cells = 1;
    for (int i = 0; i < d; ++i) {
        cells *= static_cast<std::size_t>(g);
        if (cells > kMaxTableCells) throw std::invalid_argument("grid joint too large");
    }

    std::vector<int> axis_of_var(dag_.num_vars(), -1);
    for (int i = 0; i < d; ++i) axis_of_var[vars[i]] = i;

    std::vector<double> mass(cells, 0.0);
    std::vector<int> idx(d, 0);
    std::vector<double> pa_vals;
    std::size_t flat = 0;
    do {
        double m = 1.0;
        for (int i = 0; i < d; ++i) {
            int v = vars[i];
            pa_vals.clear();
            for (int p : dag_.parents(v)) pa_vals.push_back(nodes[idx[axis_of_var[p]]]);
            m *= density(v, nodes[idx[i]], pa_vals) * wts[idx[i]];
        }
        mass[flat++] = m;
    } while (next_config(idx, sizes));
    return JointTable(std::move(vars), std::move(sizes), std::move(mass), std::move(coords),
                      std::move(weights));
}

// ---------------------------------------------------------------------------
// LinearGaussianModel

LinearGaussianModel::LinearGaussianModel(Dag dag, Eigen::MatrixXd coefficients,
                                         Eigen::VectorXd noise_variances)
    : dag_(std::move(dag)),
      coef_(std::move(coefficients)),
      noise_var_(std::move(noise_variances)) {
    int n = dag_.num_vars();
    if (!is_acyclic(dag_)) throw std::invalid_argument("model graph must be acyclic");
    if (coef_.rows() != n || coef_.cols() != n || noise_var_.size() != n)
        throw std::invalid_argument("coefficient/noise dimensions must match the variable count");
    for (int i = 0; i < n; ++i) {
        if (!(noise_var_(i) > 0.0)) throw std::invalid_argument("noise variances must be positive");
        for (int j = 0; j < n; ++j) {
            bool edge = dag_.has_edge(j, i);
            if (edge && coef_(i, j) == 0.0) throw std::invalid_argument("edge with zero coefficient");
            if (!edge && coef_(i, j) != 0.0)
                throw std::invalid_argument("nonzero coefficient without an edge");
        }
    }
}

Eigen::MatrixXd LinearGaussianModel::covariance() const {
    int n = num_vars();
    Eigen::MatrixXd ima = Eigen::MatrixXd::Identity(n, n) - coef_;
    Eigen::MatrixXd minv = ima.inverse();
    return minv * noise_var_.asDiagonal() * minv.transpose();
}

ModelFamily family_of(const CausalModel& m) {
    return std::visit(
        [](const auto& mm) {
            using T = std::decay_t<decltype(mm)>;
            if constexpr (std::is_same_v<T, DiscreteModel>) return ModelFamily::Discrete;
            else if constexpr (std::is_same_v<T, ContinuousSmoothModel>)
                return ModelFamily::ContinuousSmooth;
            else
                return ModelFamily::LinearGaussian;
        },
        m);
}

const Dag& dag_of(const CausalModel& m) {
    return std::visit([](const auto& mm) -> const Dag& { return mm.dag(); }, m);
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

std::vector<int> topo_order_of(const Dag& g) {
    auto order = g.topological_order();
    if (!order) throw std::invalid_argument("model graph must be acyclic");
    return *order;
}

Dataset sample_discrete(const DiscreteModel& m, int n, std::uint64_t seed) {
    Dataset ds;
    ds.seed = seed;
    int nv = m.num_vars();
    for (int v = 0; v < nv; ++v)
        ds.schema.push_back({m.dag().names()[v], ColumnKind::Discrete, m.cardinality(v)});
    ds.rows.resize(n, nv);
    SampleRng rng(seed);
    auto order = topo_order_of(m.dag());
    std::vector<int> assignment(nv, 0);
    for (int r = 0; r < n; ++r) {
        for (int v : order) {
            int cfg = m.parent_config_index(v, assignment);
            double u = rng.uniform01();
            int state = m.cardinality(v) - 1;
            double acc = 0.0;
            for (int s = 0; s < m.cardinality(v); ++s) {
                acc += m.cpt(v, cfg, s);
                if (u < acc) {
                    state = s;
                    break;
                }
            }
            assignment[v] = state;
            ds.rows(r, v) = state;
        }
    }
    return ds;
}

Dataset sample_smooth(const ContinuousSmoothModel& m, int n, std::uint64_t seed) {
    Dataset ds;
    ds.seed = seed;
    int nv = m.num_vars();
    for (int v = 0; v < nv; ++v)
        ds.schema.push_back({m.dag().names()[v], ColumnKind::ContinuousUnit, 0});
    ds.rows.resize(n, nv);
    SampleRng rng(seed);
    auto order = topo_order_of(m.dag());
    std::vector<double> pa_vals;
    for (int r = 0; r < n; ++r) {
        for (int v : order) {
            pa_vals.clear();
            for (int p : m.dag().parents(v)) pa_vals.push_back(ds.rows(r, p));
            const SmoothCpd& c = m.cpds()[v];
            double y;
            if (rng.uniform01() < c.floor_weight) {
                y = rng.uniform01();
            } else {
                double mu = m.bump_center(v, pa_vals);
                int guard = 0;
                do {
                    y = mu + c.bump_sigma * rng.normal();
                    if (++guard > 100000)
                        throw std::runtime_error("truncated normal sampling stalled");
                } while (y < 0.0 || y > 1.0);
            }
            ds.rows(r, v) = y;
        }
    }
    return ds;
}

Dataset sample_gaussian(const LinearGaussianModel& m, int n, std::uint64_t seed) {
    Dataset ds;
    ds.seed = seed;
    int nv = m.num_vars();
    for (int v = 0; v < nv; ++v)
        ds.schema.push_back({m.dag().names()[v], ColumnKind::Real, 0});
    ds.rows.resize(n, nv);
    SampleRng rng(seed);
    auto order = topo_order_of(m.dag());
    for (int r = 0; r < n; ++r) {
        for (int v : order) {
            double val = std::sqrt(m.noise_variances()(v)) * rng.normal();
            for (int p : m.dag().parents(v)) val += m.coefficient(p, v) * ds.rows(r, p);
            ds.rows(r, v) = val;
        }
    }
    return ds;
}

}  // namespace

Dataset sample(const CausalModel& m, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample size must be at least 1");
    return std::visit(
        [&](const auto& mm) -> Dataset {
            using T = std::decay_t<decltype(mm)>;
            if constexpr (std::is_same_v<T, DiscreteModel>) return sample_discrete(mm, n, seed);
            else if constexpr (std::is_same_v<T, ContinuousSmoothModel>)
                return sample_smooth(mm, n, seed);
            else
                return sample_gaussian(mm, n, seed);
        },
        m);
}

// ---------------------------------------------------------------------------
// Edge strength

namespace {

double edge_strength_discrete(const DiscreteModel& m, int x, int y) {
    std::vector<int> parents = m.dag().parents(y).to_vector();
    int cy = m.cardinality(y);
    int xpos = static_cast<int>(std::find(parents.begin(), parents.end(), x) - parents.begin());
    std::vector<int> other;
    std::vector<int> other_sizes;
    for (int p : parents)
        if (p != x) {
            other.push_back(p);
            other_sizes.push_back(m.cardinality(p));
        }

    auto config_of = [&](const std::vector<int>& pstates) {
        int cfg = 0;
        for (std::size_t i = 0; i < parents.size(); ++i)
            cfg = cfg * m.cardinality(parents[i]) + pstates[i];
        return cfg;
    };

    double best = 0.0;
    std::vector<int> oidx(other.size(), 0);
    std::vector<int> pstates(parents.size(), 0);
    int cx = m.cardinality(x);
    do {
        for (std::size_t i = 0, oi = 0; i < parents.size(); ++i)
            if (static_cast<int>(i) != xpos) pstates[i] = oidx[oi++];
        for (int x1 = 0; x1 < cx; ++x1)
            for (int x2 = x1 + 1; x2 < cx; ++x2) {
                pstates[xpos] = x1;
                int c1 = config_of(pstates);
                pstates[xpos] = x2;
                int c2 = config_of(pstates);
                double l1 = 0.0;
                for (int s = 0; s < cy; ++s) l1 += std::abs(m.cpt(y, c1, s) - m.cpt(y, c2, s));
                best = std::max(best, l1);
            }
    } while (!other.empty() && next_config(oidx, other_sizes));
    return best;
}

constexpr int kYQuadPoints = 129;
constexpr int kParentGrid = 9;

double density_l1_gap(const ContinuousSmoothModel& m, int y, const std::vector<double>& pa1,
                      const std::vector<double>& pa2) {
    double h = 1.0 / (kYQuadPoints - 1);
    double acc = 0.0;
    for (int i = 0; i < kYQuadPoints; ++i) {
        double yy = i * h;
        double w = (i == 0 || i == kYQuadPoints - 1) ? h / 2 : h;
        acc += w * std::abs(m.density(y, yy, pa1) - m.density(y, yy, pa2));
    }
    return acc;
}

double edge_strength_smooth(const ContinuousSmoothModel& m, int x, int y) {
    std::vector<int> parents = m.dag().parents(y).to_vector();
    if (parents.size() > 4)
        throw std::invalid_argument("edge strength grid search limited to 4 parents");
    int xslot = static_cast<int>(std::find(parents.begin(), parents.end(), x) - parents.begin());
    int nother = static_cast<int>(parents.size()) - 1;

    constexpr int kGrid = 33;
    double h = 1.0 / (kGrid - 1);

    // point = (x1, x2, other parent values...)
    auto objective = [&](const std::vector<double>& pt) {
        std::vector<double> pa1(parents.size()), pa2(parents.size());
        for (std::size_t i = 0, oi = 0; i < parents.size(); ++i) {
            if (static_cast<int>(i) == xslot) {
                pa1[i] = pt[0];
                pa2[i] = pt[1];
            } else {
                pa1[i] = pa2[i] = pt[2 + oi];
                ++oi;
            }
        }
        return density_l1_gap(m, y, pa1, pa2);
    };

    double best = -1.0;
    std::vector<double> point(2 + nother, 0.0), best_point(2 + nother, 0.0);
    std::vector<int> idx(2 + nother, 0);
    std::vector<int> sizes(2 + nother, kGrid);
    do {
        if (idx[1] <= idx[0]) continue;  // unordered pair of x values
        for (std::size_t i = 0; i < point.size(); ++i) point[i] = idx[i] * h;
        double val = objective(point);
        if (val > best) {
            best = val;
            best_point = point;
        }
    } while (next_config(idx, sizes));

    // one coordinate-wise refinement pass around the grid argmax
    for (std::size_t dim = 0; dim < best_point.size(); ++dim) {
        std::vector<double> pt = best_point;
        for (int s = -4; s <= 4; ++s) {
            pt[dim] = std::clamp(best_point[dim] + s * h / 4.0, 0.0, 1.0);
            double val = objective(pt);
            if (val > best) {
                best = val;
                best_point[dim] = pt[dim];
            }
        }
    }
    return best;
}

}  // namespace

double edge_strength(const CausalModel& m, int x, int y) {
    const Dag& g = dag_of(m);
    if (x < 0 || x >= g.num_vars() || y < 0 || y >= g.num_vars())
        throw std::invalid_argument("variable index out of range");
    if (!g.has_edge(x, y))
        throw std::invalid_argument("edge strength requires x to be a parent of y");
    return std::visit(
        [&](const auto& mm) -> double {
            using T = std::decay_t<decltype(mm)>;
            if constexpr (std::is_same_v<T, DiscreteModel>) return edge_strength_discrete(mm, x, y);
            else if constexpr (std::is_same_v<T, ContinuousSmoothModel>)
                return edge_strength_smooth(mm, x, y);
            else
                return std::abs(mm.coefficient(x, y));
        },
        m);
}

// ---------------------------------------------------------------------------
// Dependence queries

double epsilon_dependence(const CausalModel& m, int x, int y, VarSet cond) {
    const Dag& g = dag_of(m);
    if (x < 0 || x >= g.num_vars() || y < 0 || y >= g.num_vars())
        throw std::invalid_argument("variable index out of range");
    if (x == y || cond.contains(x) || cond.contains(y))
        throw std::invalid_argument("invalid dependence query");
    return std::visit(
        [&](const auto& mm) -> double {
            using T = std::decay_t<decltype(mm)>;
            if constexpr (std::is_same_v<T, DiscreteModel>) {
                return mm.joint().epsilon_dependence(x, y, cond);
            } else if constexpr (std::is_same_v<T, ContinuousSmoothModel>) {
                if (cond.size() > 3)
                    throw std::invalid_argument(
                        "continuous dependence limited to 3 conditioning variables");
                VarSet closure = g.ancestral_closure(cond.with(x).with(y));
                int pts = ContinuousSmoothModel::default_grid_points(closure.size());
                return mm.grid_joint(closure, pts).epsilon_dependence(x, y, cond);
            } else {
                throw std::logic_error(
                    "dependence of linear-Gaussian models is queried via partial_correlation");
            }
        },
        m);
}

double partial_correlation(const LinearGaussianModel& m, int x, int y, VarSet cond) {
    if (x == y || cond.contains(x) || cond.contains(y))
        throw std::invalid_argument("invalid partial correlation query");
    Eigen::MatrixXd sigma = m.covariance();
    std::vector<int> idx{x, y};
    for (int v : cond) idx.push_back(v);
    int k = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub(i, j) = sigma(idx[i], idx[j]);
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) throw std::runtime_error("singular conditioning covariance");
    Eigen::MatrixXd theta = llt.solve(Eigen::MatrixXd::Identity(k, k));
    return -theta(0, 1) / std::sqrt(theta(0, 0) * theta(1, 1));
}

// ---------------------------------------------------------------------------
// Assumption validators

namespace {

void decode_config(int cfg, const std::vector<int>& sizes, std::vector<int>& out) {
    out.assign(sizes.size(), 0);
    for (int i = static_cast<int>(sizes.size()) - 1; i >= 0; --i) {
        out[i] = cfg % sizes[i];
        cfg /= sizes[i];
    }
}

CheckResult tv_check_discrete(const DiscreteModel& m, double L) {
    CheckResult res;
    for (int v = 0; v < m.num_vars(); ++v) {
        std::vector<int> parents = m.dag().parents(v).to_vector();
        if (parents.empty()) continue;
        std::vector<int> psizes;
        for (int p : parents) psizes.push_back(m.cardinality(p));
        int nconfig = m.parent_config_count(v);
        std::vector<int> c1, c2;
        for (int i = 0; i < nconfig; ++i) {
            decode_config(i, psizes, c1);
            for (int j = i + 1; j < nconfig; ++j) {
                decode_config(j, psizes, c2);
                double dist = 0.0;
                for (std::size_t t = 0; t < psizes.size(); ++t) dist += std::abs(c1[t] - c2[t]);
                double l1 = 0.0;
                for (int s = 0; s < m.cardinality(v); ++s)
                    l1 += std::abs(m.cpt(v, i, s) - m.cpt(v, j, s));
                if (l1 > L * dist + 1e-12) {
                    res.ok = false;
                    res.violations.push_back(
                        {v, "parent configs " + std::to_string(i) + " vs " + std::to_string(j), l1,
                         L * dist});
                }
            }
        }
    }
    return res;
}

CheckResult tv_check_smooth(const ContinuousSmoothModel& m, double L) {
    CheckResult res;
    double h = 1.0 / (kParentGrid - 1);
    for (int v = 0; v < m.num_vars(); ++v) {
        int np = m.dag().parents(v).size();
        if (np == 0) continue;
        std::vector<int> sizes(np, kParentGrid);
        std::vector<std::vector<double>> configs;
        std::vector<int> idx(np, 0);
        do {
            std::vector<double> vals(np);
            for (int i = 0; i < np; ++i) vals[i] = idx[i] * h;
            configs.push_back(std::move(vals));
        } while (next_config(idx, sizes));
        for (std::size_t i = 0; i < configs.size(); ++i)
            for (std::size_t j = i + 1; j < configs.size(); ++j) {
                double dist = 0.0;
                for (int t = 0; t < np; ++t) dist += std::abs(configs[i][t] - configs[j][t]);
                double l1 = density_l1_gap(m, v, configs[i], configs[j]);
                if (l1 > L * dist + 1e-9) {
                    res.ok = false;
                    res.violations.push_back({v, "parent grid pair", l1, L * dist});
                }
            }
    }
    return res;
}

CheckResult nz_check_table(const JointTable& full, int num_vars, double T, double tol) {
    CheckResult res;
    for (int x = 0; x < num_vars; ++x) {
        VarSet rest = VarSet::all(num_vars).without(x);
        for (VarSet u : subsets_sorted(rest)) {
            JointTable marg = full.marginal(u.with(x));
            int ax = marg.axis_of(x);
            const auto& sizes = marg.sizes();
            std::vector<int> u_axes;
            for (std::size_t a = 0; a < sizes.size(); ++a)
                if (static_cast<int>(a) != ax) u_axes.push_back(static_cast<int>(a));
            std::size_t n_cfg = 1;
            std::vector<std::size_t> cfg_strides(u_axes.size());
            for (int i = static_cast<int>(u_axes.size()) - 1; i >= 0; --i) {
                cfg_strides[i] = n_cfg;
                n_cfg *= static_cast<std::size_t>(sizes[u_axes[i]]);
            }
            std::vector<double> tot(n_cfg, 0.0);
            std::vector<double> cell(n_cfg * sizes[ax], 0.0);
            std::vector<int> idx(sizes.size(), 0);
            do {
                std::size_t c = 0;
                for (std::size_t i = 0; i < u_axes.size(); ++i)
                    c += cfg_strides[i] * idx[u_axes[i]];
                double mval = marg.mass_at(idx);
                tot[c] += mval;
                cell[c * sizes[ax] + idx[ax]] += mval;
            } while (next_config(idx, sizes));
            for (std::size_t c = 0; c < n_cfg; ++c) {
                if (tot[c] <= 1e-14) continue;
                for (int s = 0; s < sizes[ax]; ++s) {
                    double dens = cell[c * sizes[ax] + s] / tot[c] / marg.weights(ax)[s];
                    if (dens < T - tol) {
                        res.ok = false;
                        res.violations.push_back(
                            {x, "conditional given subset mask " + std::to_string(u.bits()), dens,
                             T});
                    }
                }
            }
        }
    }
    return res;
}

CheckResult nz_check_discrete(const DiscreteModel& m, double T) {
    CheckResult res;
    for (int v = 0; v < m.num_vars(); ++v)
        for (int cfg = 0; cfg < m.parent_config_count(v); ++cfg)
            for (int s = 0; s < m.cardinality(v); ++s)
                if (m.cpt(v, cfg, s) < T - 1e-12) {
                    res.ok = false;
                    res.violations.push_back({v, "CPT entry", m.cpt(v, cfg, s), T});
                }
    CheckResult derived = nz_check_table(m.joint(), m.num_vars(), T, 1e-12);
    if (!derived.ok) {
        res.ok = false;
        res.violations.insert(res.violations.end(), derived.violations.begin(),
                              derived.violations.end());
    }
    return res;
}

CheckResult nz_check_smooth(const ContinuousSmoothModel& m, double T) {
    int n = m.num_vars();
    if (n > 6) throw std::invalid_argument("smooth floor check grid limited to 6 variables");
    JointTable full = m.grid_joint(VarSet::all(n), ContinuousSmoothModel::default_grid_points(n));
    return nz_check_table(full, n, T, 1e-9);
}

// Min-over-values L1 contrast of Y across x values, conditional on every
// configuration of cond_vars with positive mass.
double min_contrast(const JointTable& t, int yvar, int xvar, VarSet cond_vars) {
    int ax = t.axis_of(xvar), ay = t.axis_of(yvar);
    const auto& sizes = t.sizes();
    std::vector<int> cond_axes;
    for (int v : cond_vars) cond_axes.push_back(t.axis_of(v));
    int sx = sizes[ax], sy = sizes[ay];
    std::size_t n_cfg = 1;
    std::vector<std::size_t> cfg_strides(cond_axes.size());
    for (int i = static_cast<int>(cond_axes.size()) - 1; i >= 0; --i) {
        cfg_strides[i] = n_cfg;
        n_cfg *= static_cast<std::size_t>(sizes[cond_axes[i]]);
    }
    std::vector<double> acc(n_cfg * sx * sy, 0.0);
    std::vector<int> idx(sizes.size(), 0);
    do {
        std::size_t c = 0;
        for (std::size_t i = 0; i < cond_axes.size(); ++i) c += cfg_strides[i] * idx[cond_axes[i]];
        acc[(c * sx + idx[ax]) * sy + idx[ay]] += t.mass_at(idx);
    } while (next_config(idx, sizes));

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> p1(sy), p2(sy);
    for (std::size_t c = 0; c < n_cfg; ++c) {
        for (int x1 = 0; x1 < sx; ++x1)
            for (int x2 = x1 + 1; x2 < sx; ++x2) {
                double t1 = 0.0, t2 = 0.0;
                for (int s = 0; s < sy; ++s) {
                    p1[s] = acc[(c * sx + x1) * sy + s];
                    p2[s] = acc[(c * sx + x2) * sy + s];
                    t1 += p1[s];
                    t2 += p2[s];
                }
                if (t1 <= 1e-14 || t2 <= 1e-14) continue;
                double l1 = 0.0;
                for (int s = 0; s < sy; ++s) l1 += std::abs(p1[s] / t1 - p2[s] / t2);
                best = std::min(best, l1);
            }
    }
    return best;
}

CheckResult ktf_check_gaussian(const LinearGaussianModel& m, double k) {
    CheckResult res;
    const Dag& g = m.dag();
    int n = g.num_vars();
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int c = b + 1; c < n; ++c) {
                if (!(g.adjacent(a, b) && g.adjacent(b, c) && g.adjacent(a, c))) continue;
                int tri[3] = {a, b, c};
                for (int mid_i = 0; mid_i < 3; ++mid_i) {
                    int y = tri[mid_i];
                    int xz[2];
                    for (int t = 0, j = 0; t < 3; ++t)
                        if (t != mid_i) xz[j++] = tri[t];
                    int x = xz[0], z = xz[1];
                    double e = g.has_edge(x, z) ? std::abs(m.coefficient(x, z))
                                                : std::abs(m.coefficient(z, x));
                    bool collider = g.has_edge(x, y) && g.has_edge(z, y);
                    VarSet rest = VarSet::all(n).without(x).without(z);
                    for (VarSet w : subsets_sorted(rest)) {
                        if (w.contains(y) != collider) continue;
                        double rho = partial_correlation(m, x, z, w);
                        if (std::abs(rho) < k * e - 1e-12) {
                            res.ok = false;
                            res.violations.push_back(
                                {y,
                                 "triangle (" + std::to_string(x) + "," + std::to_string(y) + "," +
                                     std::to_string(z) + ") cond mask " + std::to_string(w.bits()),
                                 std::abs(rho), k * e});
                        }
                    }
                }
            }
    return res;
}

CheckResult ktf_check_l1(const CausalModel& m, double k, double tol) {
    CheckResult res;
    const Dag& g = dag_of(m);
    int n = g.num_vars();
    bool smooth = family_of(m) == ModelFamily::ContinuousSmooth;
    if (smooth && n > 5)
        throw std::invalid_argument("smooth triangle check grid limited to 5 variables");

    auto table_over = [&](VarSet vars) -> JointTable {
        if (const auto* dm = std::get_if<DiscreteModel>(&m)) return dm->joint().marginal(vars);
        const auto& sm = std::get<ContinuousSmoothModel>(m);
        VarSet closure = g.ancestral_closure(vars);
        int pts = ContinuousSmoothModel::default_grid_points(closure.size());
        return sm.grid_joint(closure, pts).marginal(vars);
    };

    for (int y = 0; y < n; ++y) {
        for (int x : g.parents(y)) {
            for (int z = 0; z < n; ++z) {
                if (z == x || z == y || !g.adjacent(z, x) || !g.adjacent(z, y)) continue;
                double e = edge_strength(m, x, y);
                bool z_collider = g.has_edge(x, z) && g.has_edge(y, z);
                VarSet rest = VarSet::all(n).without(x).without(y).without(z);
                for (VarSet w : subsets_sorted(rest)) {
                    VarSet cond = z_collider ? w.with(z) : w;
                    JointTable t = table_over(cond.with(x).with(y));
                    double contrast = min_contrast(t, y, x, cond);
                    if (contrast < k * e - tol) {
                        res.ok = false;
                        res.violations.push_back(
                            {y,
                             "triangle (" + std::to_string(x) + "," + std::to_string(z) + "," +
                                 std::to_string(y) + ") cond mask " + std::to_string(cond.bits()),
                             contrast, k * e});
                    }
                }
            }
        }
    }
    return res;
}

}  // namespace

CheckResult check_tv_smoothness(const CausalModel& m, double L) {
    if (!(L >= 0.0)) throw std::invalid_argument("smoothness bound must be non-negative");
    return std::visit(
        [&](const auto& mm) -> CheckResult {
            using T = std::decay_t<decltype(mm)>;
            if constexpr (std::is_same_v<T, DiscreteModel>) return tv_check_discrete(mm, L);
            else if constexpr (std::is_same_v<T, ContinuousSmoothModel>)
                return tv_check_smooth(mm, L);
            else
                return CheckResult{};  // not applicable to the Gaussian family
        },
        m);
}

CheckResult check_nz(const CausalModel& m, double T) {
    if (!(T > 0.0 && T < 1.0)) throw std::invalid_argument("floor must lie in (0,1)");
    return std::visit(
        [&](const auto& mm) -> CheckResult {
            using Ty = std::decay_t<decltype(mm)>;
            if constexpr (std::is_same_v<Ty, DiscreteModel>) return nz_check_discrete(mm, T);
            else if constexpr (std::is_same_v<Ty, ContinuousSmoothModel>)
                return nz_check_smooth(mm, T);
            else
                return CheckResult{};  // not applicable to the Gaussian family
        },
        m);
}

CheckResult check_density_bound(const ContinuousSmoothModel& m) {
    CheckResult res;
    double L = m.smoothness_L();
    double hy = 1.0 / (kYQuadPoints - 1);
    double hp = 1.0 / (kParentGrid - 1);
    for (int v = 0; v < m.num_vars(); ++v) {
        int np = m.dag().parents(v).size();
        double cap = 1.0 + L * np;
        std::vector<int> sizes(np, kParentGrid);
        std::vector<int> idx(np, 0);
        bool more = true;
        while (more) {
            std::vector<double> pa(np);
            for (int i = 0; i < np; ++i) pa[i] = idx[i] * hp;
            for (int i = 0; i < kYQuadPoints; ++i) {
                double d = m.density(v, i * hy, pa);
                if (d > cap + 1e-9) {
                    res.ok = false;
                    res.violations.push_back({v, "density above cap", d, cap});
                }
            }
            more = np > 0 && next_config(idx, sizes);
        }
    }
    return res;
}

CheckResult check_k_triangle_faithfulness(const CausalModel& m, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("triangle constant must be positive");
    return std::visit(
        [&](const auto& mm) -> CheckResult {
            using T = std::decay_t<decltype(mm)>;
            if constexpr (std::is_same_v<T, LinearGaussianModel>) return ktf_check_gaussian(mm, k);
            else if constexpr (std::is_same_v<T, DiscreteModel>) return ktf_check_l1(m, k, 1e-12);
            else
                return ktf_check_l1(m, k, 1e-9);
        },
        m);
}

// ---------------------------------------------------------------------------
// Random model generation

namespace {

Dag random_dag(SampleRng& rng, int num_vars, int max_degree, double edge_prob) {
    std::vector<int> order(num_vars);
    std::iota(order.begin(), order.end(), 0);
    for (int i = num_vars - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(0, i)]);
    Dag g(num_vars);
    std::vector<int> degree(num_vars, 0);
    for (int i = 0; i < num_vars; ++i)
        for (int j = i + 1; j < num_vars; ++j) {
            if (degree[order[i]] >= max_degree || degree[order[j]] >= max_degree) continue;
            if (rng.uniform01() < edge_prob) {
                g.add_edge(order[i], order[j]);
                ++degree[order[i]];
                ++degree[order[j]];
            }
        }
    return g;
}

std::vector<double> random_cpt_row(SampleRng& rng, int card, double T, double L) {
    std::vector<double> g(card);
    double sum = 0.0;
    for (double& v : g) {
        v = rng.uniform(0.6, 1.4);
        sum += v;
    }
    for (double& v : g) v /= sum;
    // compress toward uniform when a small Lipschitz constant is requested
    double beta = std::min(1.0, L);
    double floor = std::min(1.5 * T, 0.95 / card);
    double room = 1.0 - card * floor;
    std::vector<double> row(card);
    for (int s = 0; s < card; ++s) {
        double mixed = (1.0 - beta) / card + beta * g[s];
        row[s] = floor + room * mixed;
    }
    return row;
}

CausalModel random_discrete(SampleRng& rng, const ModelConstraints& c) {
    Dag g = random_dag(rng, c.num_vars, c.max_degree, c.edge_prob);
    std::vector<int> cards(c.num_vars, c.cardinality);
    std::vector<std::vector<double>> cpts(c.num_vars);
    for (int v = 0; v < c.num_vars; ++v) {
        int nconfig = 1;
        for (int p : g.parents(v)) nconfig *= cards[p];
        cpts[v].reserve(static_cast<std::size_t>(nconfig) * cards[v]);
        for (int cfg = 0; cfg < nconfig; ++cfg) {
            auto row = random_cpt_row(rng, cards[v], c.T, c.L);
            cpts[v].insert(cpts[v].end(), row.begin(), row.end());
        }
    }
    return DiscreteModel(std::move(g), std::move(cards), std::move(cpts));
}

CausalModel random_smooth(SampleRng& rng, const ModelConstraints& c) {
    Dag g = random_dag(rng, c.num_vars, c.max_degree, c.edge_prob);
    std::vector<SmoothCpd> cpds(c.num_vars);
    for (int v = 0; v < c.num_vars; ++v) {
        int np = g.parents(v).size();
        SmoothCpd cpd;
        if (np == 0) {
            cpd.floor_weight = 1.0;  // roots stay uniform to respect the density cap
        } else {
            cpd.floor_weight = rng.uniform(std::max(0.35, 1.5 * c.T), 0.6);
            cpd.bump_sigma = rng.uniform(0.3, 0.45);
            cpd.bump_base = rng.uniform(0.15, 0.85);
            cpd.bump_coefs.resize(np);
            for (double& b : cpd.bump_coefs) {
                b = rng.uniform(0.1, 0.35) * std::min(1.0, c.L);
                if (rng.uniform01() < 0.5) b = -b;
            }
        }
        cpds[v] = std::move(cpd);
    }
    return ContinuousSmoothModel(std::move(g), std::move(cpds), c.L, c.T);
}

CausalModel random_gaussian(SampleRng& rng, const ModelConstraints& c) {
    Dag g = random_dag(rng, c.num_vars, c.max_degree, c.edge_prob);
    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(c.num_vars, c.num_vars);
    for (auto [from, to] : g.edges()) {
        double a = rng.uniform(0.35, 0.85);
        if (rng.uniform01() < 0.5) a = -a;
        coef(to, from) = a;
    }
    Eigen::VectorXd noise = Eigen::VectorXd::Ones(c.num_vars);
    return LinearGaussianModel(std::move(g), std::move(coef), std::move(noise));
}

}  // namespace

GeneratedModel random_model(ModelFamily family, const ModelConstraints& c, std::uint64_t seed) {
    if (c.num_vars < 1 || c.num_vars > 12)
        throw std::invalid_argument("random models support 1..12 variables");
    if (c.max_degree < 0) throw std::invalid_argument("max degree must be non-negative");
    if (!(c.T > 0.0 && c.T < 1.0)) throw std::invalid_argument("floor must lie in (0,1)");
    if (family == ModelFamily::Discrete) {
        if (c.cardinality < 2) throw std::invalid_argument("cardinality must be at least 2");
        if (c.T * c.cardinality > 1.0)
            throw std::invalid_argument("infeasible floor: T exceeds 1/cardinality");
    }

    SampleRng rng(seed);
    for (int attempt = 1; attempt <= c.max_attempts; ++attempt) {
        CausalModel m = family == ModelFamily::Discrete           ? random_discrete(rng, c)
                        : family == ModelFamily::ContinuousSmooth ? random_smooth(rng, c)
                                                                  : random_gaussian(rng, c);
        if (!check_tv_smoothness(m, c.L)) continue;
        if (!check_nz(m, c.T)) continue;
        if (family == ModelFamily::ContinuousSmooth &&
            !check_density_bound(std::get<ContinuousSmoothModel>(m)))
            continue;
        if (!check_k_triangle_faithfulness(m, c.k)) continue;
        return GeneratedModel{std::move(m), attempt};
    }
    throw std::runtime_error("random_model exhausted its attempt budget");
}

}  // namespace causalkit
