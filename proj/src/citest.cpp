#include "causalkit/citest.hpp"

#include "causalkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace causalkit {

namespace {

void check_pair(const Dataset& data, int x, int y, VarSet cond) {
    int nv = data.num_vars();
    if (x < 0 || x >= nv || y < 0 || y >= nv)
        throw std::invalid_argument("variable index out of range");
    if (x == y) throw std::invalid_argument("test requires distinct variables");
    if (cond.contains(x) || cond.contains(y))
        throw std::invalid_argument("conditioning set must not contain the tested pair");
    for (int v : cond)
        if (v < 0 || v >= nv) throw std::invalid_argument("conditioning variable out of range");
}

}  // namespace

CiDecision ci_test_binned(const Dataset& data, int x, int y, VarSet cond,
                          const TestSchedule& schedule, int min_n) {
    check_pair(data, x, y, cond);
    std::int64_t n = data.n();
    if (n < min_n) throw std::invalid_argument("too few samples for the binned test");

    bool any_continuous = false;
    auto kind_of = [&](int col) {
        const ColumnSchema& s = data.schema[col];
        if (s.kind == ColumnKind::Real)
            throw std::invalid_argument("binned test requires unit-interval or discrete data");
        return s.kind;
    };
    std::vector<int> vars = cond.with(x).with(y).to_vector();
    for (int v : vars) any_continuous |= kind_of(v) == ColumnKind::ContinuousUnit;
    if (any_continuous && cond.size() > 3)
        throw std::invalid_argument("continuous conditioning limited to 3 variables");

    int d = 2 + cond.size();
    int cont_bins = histogram_bins_per_axis(n, d);

    std::vector<int> sizes;
    std::vector<std::vector<double>> coords, weights;
    for (int v : vars) {
        const ColumnSchema& s = data.schema[v];
        int b = s.kind == ColumnKind::Discrete ? s.states : cont_bins;
        sizes.push_back(b);
        std::vector<double> cs(b), ws(b, 1.0);
        for (int i = 0; i < b; ++i) cs[i] = i;
        coords.push_back(std::move(cs));
        weights.push_back(std::move(ws));
    }

    std::size_t cells = 1;
    for (int s : sizes) cells *= static_cast<std::size_t>(s);
    std::vector<double> mass(cells, 0.0);
    for (std::int64_t r = 0; r < n; ++r) {
        std::size_t flat = 0;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            int v = vars[i];
            const ColumnSchema& s = data.schema[v];
            int c;
            if (s.kind == ColumnKind::Discrete) {
                c = std::clamp(static_cast<int>(std::llround(data.rows(r, v))), 0, sizes[i] - 1);
            } else {
                c = std::clamp(static_cast<int>(data.rows(r, v) * sizes[i]), 0, sizes[i] - 1);
            }
            flat = flat * sizes[i] + c;
        }
        mass[flat] += 1.0;
    }

    JointTable counts(std::move(vars), std::move(sizes), std::move(mass), std::move(coords),
                      std::move(weights));
    double stat = counts.epsilon_dependence(x, y, cond);
    double thr = schedule.threshold(n, cond.size());
    return CiDecision{stat <= thr, stat, thr, n};
}

CiDecision ci_test_fisher_z(const Dataset& data, int x, int y, VarSet cond,
                            const FisherZSchedule& schedule) {
    check_pair(data, x, y, cond);
    std::int64_t n = data.n();
    int k = cond.size();
    if (n <= k + 3) throw std::invalid_argument("too few samples for the Fisher z test");

    // residualize both variables on [1, cond...]
    Eigen::MatrixXd design(n, k + 1);
    design.col(0).setOnes();
    int ci = 1;
    for (int v : cond) design.col(ci++) = data.rows.col(v);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    Eigen::VectorXd rx = data.rows.col(x) - design * qr.solve(data.rows.col(x));
    Eigen::VectorXd ry = data.rows.col(y) - design * qr.solve(data.rows.col(y));

    double vx = rx.squaredNorm(), vy = ry.squaredNorm();
    if (!(vx > 1e-300) || !(vy > 1e-300))
        throw std::runtime_error("singular sample covariance in the Fisher z test");
    double r = rx.dot(ry) / std::sqrt(vx * vy);
    r = std::clamp(r, -1.0 + 1e-12, 1.0 - 1e-12);
    double z = std::abs(std::atanh(r)) * std::sqrt(static_cast<double>(n - k - 3));
    double thr = normal_quantile(1.0 - schedule.alpha(n) / 2.0);
    return CiDecision{z <= thr, z, thr, n};
}

BinnedCiSource::BinnedCiSource(const Dataset& data, TestSchedule schedule, int min_n)
    : data_(&data), schedule_(schedule), min_n_(min_n) {
    for (const ColumnSchema& s : data.schema) names_.push_back(s.name);
}

CiDecision BinnedCiSource::query(int x, int y, VarSet cond) {
    return ci_test_binned(*data_, x, y, cond, schedule_, min_n_);
}

FisherZCiSource::FisherZCiSource(const Dataset& data, FisherZSchedule schedule)
    : data_(&data), schedule_(schedule) {
    for (const ColumnSchema& s : data.schema) names_.push_back(s.name);
}

CiDecision FisherZCiSource::query(int x, int y, VarSet cond) {
    return ci_test_fisher_z(*data_, x, y, cond, schedule_);
}

PopulationOracle::PopulationOracle(CausalModel model) : model_(std::move(model)) {
    switch (family_of(model_)) {
        case ModelFamily::Discrete:
            table_ = std::get<DiscreteModel>(model_).joint();
            tol_ = 1e-9;
            break;
        case ModelFamily::ContinuousSmooth: {
            const auto& sm = std::get<ContinuousSmoothModel>(model_);
            int n = sm.num_vars();
            table_ = sm.grid_joint(VarSet::all(n),
                                   ContinuousSmoothModel::default_grid_points(n));
            tol_ = 1e-7;
            break;
        }
        case ModelFamily::LinearGaussian:
            tol_ = 1e-10;
            break;
    }
}

int PopulationOracle::num_vars() const { return dag_of(model_).num_vars(); }

const std::vector<std::string>& PopulationOracle::names() const {
    return dag_of(model_).names();
}

CiDecision PopulationOracle::query(int x, int y, VarSet cond) {
    double stat;
    if (table_) {
        stat = table_->epsilon_dependence(x, y, cond);
    } else {
        stat = std::abs(partial_correlation(std::get<LinearGaussianModel>(model_), x, y, cond));
    }
    return CiDecision{stat <= tol_, stat, tol_, 0};
}

PopulationOracle population_ci_oracle(const CausalModel& m) { return PopulationOracle(m); }

}  // namespace causalkit
