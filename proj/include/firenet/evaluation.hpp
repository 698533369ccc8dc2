#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "firenet/types.hpp"

namespace firenet {

struct ScenarioConfig {
    std::uint64_t seed = 0;
    int n_banks = 50;
    int n_assets = 20;
    double size_log_mean = 10.8;  // ln of median bank size, in 10^3 $
    double size_log_sd = 1.5;
    double target_leverage = 10.0;
    double leverage_sd = 2.0;
    double sparsity = 0.5;     // target fraction of zero entries
    bool include_cash = true;  // column 0 gets asset id "cash"
};

// Synthetic bank-asset system: heavy-tailed sizes, leverage near the
// target, integer entries whose row sums match the drawn sizes exactly.
struct SyntheticScenario {
    ScenarioConfig config;
    HoldingsMatrix matrix;
    BankSheet sheet;
};

SyntheticScenario generate_scenario(const ScenarioConfig& cfg);

// Componentwise (estimated - truth) / truth. Banks with zero truth are
// excluded, not errors.
struct RelativeErrors {
    Vector errors;                            // one per included bank
    Vector truth;                             // matching truth values
    std::vector<Eigen::Index> included;       // original indices
    std::vector<Eigen::Index> excluded_zero;  // banks with zero truth
};
RelativeErrors relative_errors(const Vector& estimated, const Vector& truth);

struct QuartileStats {
    double median = 0.0;
    double iqr = 0.0;
    int count = 0;
};

struct QuartileErrorReport {
    std::string metric;
    std::string estimator;
    std::array<QuartileStats, 4> quartiles;  // q1 = smallest truth
    int excluded = 0;                        // zero-truth banks left out
    std::string error;                       // set when the estimator failed
};

// Banks sorted by truth ascending (stable; ties keep input order), split
// into four rank quartiles of near-equal size; median and IQR of the
// errors per quartile via the R-7 rule.
QuartileErrorReport quartile_report(const Vector& errors, const Vector& truth);

enum class EstimatorKind { CAPM, MECAPM, BIPWCM_MC, BIPECM_MC };

std::string to_string(EstimatorKind e);
EstimatorKind estimator_kind_from_string(const std::string& name);

// Full estimation pipeline: each estimator reconstructs S_n and IV_n from
// the information it is allowed (strengths; strengths + degrees for
// BIPECM), then gets a QuartileErrorReport per metric against the
// scenario's true values. Estimator failures are recorded in their reports
// without aborting the others.
std::vector<QuartileErrorReport> estimator_comparison(const SyntheticScenario& scenario,
                                                      const std::vector<EstimatorKind>& estimators,
                                                      int n_samples, std::uint64_t seed);

// Seed used for estimator `e` inside estimator_comparison (documented so
// runs are reproducible piecewise).
std::uint64_t estimator_seed(std::uint64_t base_seed, EstimatorKind e);

}  // namespace firenet
