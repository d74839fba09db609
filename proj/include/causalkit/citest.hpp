#pragma once

#include "causalkit/estimation.hpp"
#include "causalkit/scm.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace causalkit {

struct CiDecision {
    bool independent = false;
    double statistic = 0.0;  // estimated dependence (or |z| for the Gaussian test)
    double threshold = 0.0;
    std::int64_t n = 0;
};

// Threshold multiplier calibrated once on a held-out set of generated models
// and frozen; see tools/calibrate_schedule.cpp for the sweep.
inline constexpr double kDefaultScheduleC = 0.15;

// threshold(n, |cond|) = c * (log n / n)^(1/(2+d)) with d = 2 + |cond|, the
// dimensionality of the binned dependence estimate.
struct TestSchedule {
    double c = kDefaultScheduleC;

    double threshold(std::int64_t n, int cond_size) const {
        int d = 2 + cond_size;
        return c * std::pow(std::log(static_cast<double>(n)) / static_cast<double>(n),
                            1.0 / (2.0 + d));
    }
};

// Binned L1 plug-in test: estimates the dependence of (x, y) given cond from
// contingency masses (exact frequencies on discrete axes, scheduled histogram
// bins on continuous ones) and declares independence iff the estimate stays
// at or below the shrinking threshold.
CiDecision ci_test_binned(const Dataset& data, int x, int y, VarSet cond,
                          const TestSchedule& schedule, int min_n = 50);

// alpha(n) = alpha0 * n^-decay
struct FisherZSchedule {
    double alpha0 = 0.01;
    double decay = 0.0;

    double alpha(std::int64_t n) const {
        return alpha0 * std::pow(static_cast<double>(n), -decay);
    }
};

// Fisher z-transform of the sample partial correlation, two-sided.
CiDecision ci_test_fisher_z(const Dataset& data, int x, int y, VarSet cond,
                            const FisherZSchedule& schedule);

// Decision source consumed by the discovery search.
class CiSource {
public:
    virtual ~CiSource() = default;
    virtual int num_vars() const = 0;
    virtual const std::vector<std::string>& names() const = 0;
    virtual CiDecision query(int x, int y, VarSet cond) = 0;
};

class BinnedCiSource final : public CiSource {
public:
    BinnedCiSource(const Dataset& data, TestSchedule schedule, int min_n = 50);
    int num_vars() const override { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const override { return names_; }
    CiDecision query(int x, int y, VarSet cond) override;

private:
    const Dataset* data_;
    TestSchedule schedule_;
    int min_n_;
    std::vector<std::string> names_;
};

class FisherZCiSource final : public CiSource {
public:
    FisherZCiSource(const Dataset& data, FisherZSchedule schedule);
    int num_vars() const override { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const override { return names_; }
    CiDecision query(int x, int y, VarSet cond) override;

private:
    const Dataset* data_;
    FisherZSchedule schedule_;
    std::vector<std::string> names_;
};

// Infinite-sample idealization: answers queries from the model's exact
// dependence (discrete), its grid discretization (continuous-smooth), or
// partial correlations (linear-Gaussian).
class PopulationOracle final : public CiSource {
public:
    explicit PopulationOracle(CausalModel model);
    int num_vars() const override;
    const std::vector<std::string>& names() const override;
    CiDecision query(int x, int y, VarSet cond) override;

private:
    CausalModel model_;
    std::optional<JointTable> table_;  // discrete / continuous-smooth
    double tol_;
};

PopulationOracle population_ci_oracle(const CausalModel& m);

}  // namespace causalkit
