#include "firenet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "firenet/core.hpp"
#include "firenet/ensembles.hpp"
#include "firenet/numeric.hpp"
#include "firenet/philox.hpp"
#include "firenet/reconstruct.hpp"
#include "firenet/riskmetrics.hpp"
#include "firenet/sampling.hpp"

namespace firenet {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Scenario-generation stream purposes (the "sample" word of the counter).
enum Purpose : std::uint32_t {
    kSizes = 0,
    kLeverages = 1,
    kSupport = 2,
    kWeights = 3,
    kFixups = 4,
};

double scen_uniform(std::uint64_t seed, std::uint32_t purpose, std::uint32_t index,
                    std::uint32_t slot) {
    return counter_uniform(seed, purpose, index, slot, rng_domain::kScenarioGeneration);
}

double scen_normal(std::uint64_t seed, std::uint32_t purpose, std::uint32_t index,
                   std::uint32_t pair) {
    double u0 = scen_uniform(seed, purpose, index, 2 * pair);
    double u1 = scen_uniform(seed, purpose, index, 2 * pair + 1);
    return std::sqrt(-2.0 * std::log(u0)) * std::cos(kTwoPi * u1);
}

}  // namespace

SyntheticScenario generate_scenario(const ScenarioConfig& cfg) {
    const int n = cfg.n_banks, k = cfg.n_assets;
    if (n < 4) throw ValidationError("scenario needs at least 4 banks");
    if (k < 2) throw ValidationError("scenario needs at least 2 assets");
    if (!(cfg.sparsity >= 0.0 && cfg.sparsity < 1.0))
        throw ValidationError("sparsity must lie in [0, 1)");
    const auto total = static_cast<double>(n) * k;
    if ((1.0 - cfg.sparsity) * total < std::max(n, k))
        throw InfeasibleSparsityError("sparsity " + std::to_string(cfg.sparsity) +
                                      " leaves too few positive entries to keep every row and "
                                      "column nonempty");

    // Sizes: log-normal, floored so every supported entry can hold >= 1 unit.
    Vector sizes(n);
    for (int i = 0; i < n; ++i) {
        double z = scen_normal(cfg.seed, kSizes, static_cast<std::uint32_t>(i), 0);
        double a = std::exp(cfg.size_log_mean + cfg.size_log_sd * z);
        sizes[i] = std::round(std::max(a, 10.0 * k));
    }

    // Leverages: normal around the target, truncated positive.
    Vector leverages(n);
    for (int i = 0; i < n; ++i) {
        double b = 0.0;
        for (std::uint32_t attempt = 0; attempt < 100; ++attempt) {
            b = cfg.target_leverage +
                cfg.leverage_sd * scen_normal(cfg.seed, kLeverages, static_cast<std::uint32_t>(i),
                                              attempt);
            if (b > 0.0) break;
            b = 0.0;
        }
        leverages[i] = b > 0.0 ? b : 0.1;
    }

    // Support pattern: i.i.d. Bernoulli(1 - sparsity) plus fixups keeping
    // every row and column nonempty; retried if the realized zero fraction
    // drifts more than 5 points from target.
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> support(n, k);
    bool ok = false;
    for (std::uint32_t attempt = 0; attempt < 32 && !ok; ++attempt) {
        const std::uint32_t base = attempt * static_cast<std::uint32_t>(n * k);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j)
                support(i, j) = scen_uniform(cfg.seed, kSupport,
                                             base + static_cast<std::uint32_t>(i * k + j), 0) <
                                (1.0 - cfg.sparsity);
        for (int i = 0; i < n; ++i) {
            if (support.row(i).any()) continue;
            auto j = static_cast<int>(scen_uniform(cfg.seed, kFixups,
                                                   base + static_cast<std::uint32_t>(i), 0) *
                                      k);
            support(i, std::min(j, k - 1)) = true;
        }
        for (int j = 0; j < k; ++j) {
            if (support.col(j).any()) continue;
            auto i = static_cast<int>(scen_uniform(cfg.seed, kFixups,
                                                   base + static_cast<std::uint32_t>(n + j), 1) *
                                      n);
            support(std::min(i, n - 1), j) = true;
        }
        double zero_frac = 1.0 - static_cast<double>(support.count()) / total;
        ok = std::abs(zero_frac - cfg.sparsity) <= 0.05;
    }
    if (!ok)
        throw InfeasibleSparsityError("could not realize the requested sparsity within 5 points");

    // Fill: one unit per supported entry, remainder split by Exp(1) weights
    // and integerized per row with largest-remainder correction, so the row
    // sum equals the drawn size exactly.
    Matrix entries = Matrix::Zero(n, k);
    for (int i = 0; i < n; ++i) {
        std::vector<int> cols;
        for (int j = 0; j < k; ++j)
            if (support(i, j)) cols.push_back(j);
        auto d = static_cast<double>(cols.size());
        if (sizes[i] < d) sizes[i] = d;
        double remaining = sizes[i] - d;

        std::vector<double> w(cols.size());
        double wsum = 0.0;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            w[c] = -std::log(scen_uniform(cfg.seed, kWeights,
                                          static_cast<std::uint32_t>(i * k + cols[c]), 0));
            wsum += w[c];
        }
        std::vector<double> frac(cols.size());
        double assigned = 0.0;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            double share = remaining * w[c] / wsum;
            double fl = std::floor(share);
            entries(i, cols[c]) = 1.0 + fl;
            frac[c] = share - fl;
            assigned += fl;
        }
        auto leftover = static_cast<long long>(std::llround(remaining - assigned));
        std::vector<std::size_t> order(cols.size());
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
        for (long long u = 0; u < leftover; ++u)
            entries(i, cols[order[static_cast<std::size_t>(u) % order.size()]]) += 1.0;
    }

    std::vector<std::string> asset_ids = default_ids("asset_", k);
    if (cfg.include_cash) asset_ids[0] = "cash";

    Vector equities(n);
    for (int i = 0; i < n; ++i) equities[i] = sizes[i] / (1.0 + leverages[i]);

    SyntheticScenario scenario{cfg,
                               HoldingsMatrix(std::move(entries), default_ids("bank_", n),
                                              std::move(asset_ids)),
                               BankSheet(std::move(sizes), std::move(equities))};
    return scenario;
}

RelativeErrors relative_errors(const Vector& estimated, const Vector& truth) {
    if (estimated.size() != truth.size())
        throw ValidationError("estimated and truth vectors differ in length");
    RelativeErrors out;
    std::vector<double> errs, truths;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0.0) {
            out.excluded_zero.push_back(i);
            continue;
        }
        out.included.push_back(i);
        errs.push_back((estimated[i] - truth[i]) / truth[i]);
        truths.push_back(truth[i]);
    }
    out.errors = Eigen::Map<const Vector>(errs.data(), static_cast<Eigen::Index>(errs.size()));
    out.truth = Eigen::Map<const Vector>(truths.data(), static_cast<Eigen::Index>(truths.size()));
    return out;
}

QuartileErrorReport quartile_report(const Vector& errors, const Vector& truth) {
    if (errors.size() != truth.size())
        throw ValidationError("errors and truth vectors differ in length");
    const auto n = errors.size();
    if (n < 4)
        throw TooFewBanksError("quartile report needs at least 4 banks, have " +
                               std::to_string(n));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return truth[a] < truth[b]; });

    QuartileErrorReport report;
    for (int q = 0; q < 4; ++q) {
        auto lo = static_cast<std::size_t>(n) * static_cast<std::size_t>(q) / 4;
        auto hi = static_cast<std::size_t>(n) * static_cast<std::size_t>(q + 1) / 4;
        std::vector<double> vals;
        vals.reserve(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) vals.push_back(errors[order[i]]);
        std::sort(vals.begin(), vals.end());
        QuartileStats stats;
        stats.count = static_cast<int>(vals.size());
        stats.median = quantile_r7_sorted(vals, 0.5);
        stats.iqr = quantile_r7_sorted(vals, 0.75) - quantile_r7_sorted(vals, 0.25);
        report.quartiles[static_cast<std::size_t>(q)] = stats;
    }
    return report;
}

std::string to_string(EstimatorKind e) {
    switch (e) {
        case EstimatorKind::CAPM: return "capm";
        case EstimatorKind::MECAPM: return "mecapm";
        case EstimatorKind::BIPWCM_MC: return "bipwcm";
        case EstimatorKind::BIPECM_MC: return "bipecm";
    }
    return "?";
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
    if (name == "capm") return EstimatorKind::CAPM;
    if (name == "mecapm") return EstimatorKind::MECAPM;
    if (name == "bipwcm") return EstimatorKind::BIPWCM_MC;
    if (name == "bipecm") return EstimatorKind::BIPECM_MC;
    throw ValidationError("unknown estimator '" + name + "'");
}

std::uint64_t estimator_seed(std::uint64_t base_seed, EstimatorKind e) {
    return base_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(e) + 1);
}

std::vector<QuartileErrorReport> estimator_comparison(const SyntheticScenario& scenario,
                                                      const std::vector<EstimatorKind>& estimators,
                                                      int n_samples, std::uint64_t seed) {
    const HoldingsMatrix& x = scenario.matrix;
    MarketParams mkt = MarketParams::defaults(x.asset_ids());
    Vector truth_s = systemicness(x, scenario.sheet, mkt);
    Vector truth_iv = indirect_vulnerability(x, scenario.sheet, mkt);
    StrengthSequences s = marginals(x);
    DegreeSequences d = degrees(x);

    std::vector<QuartileErrorReport> reports;
    for (EstimatorKind est : estimators) {
        Vector est_s, est_iv;
        std::string failure;
        try {
            switch (est) {
                case EstimatorKind::CAPM: {
                    HoldingsMatrix xc = capm_matrix(s, x.bank_ids(), x.asset_ids());
                    est_s = systemicness(xc, scenario.sheet, mkt);
                    est_iv = indirect_vulnerability(xc, scenario.sheet, mkt);
                    break;
                }
                case EstimatorKind::MECAPM: {
                    est_s = mecapm_expected_systemicness(s, scenario.sheet, mkt).expected;
                    est_iv =
                        mecapm_expected_indirect_vulnerability(s, scenario.sheet, mkt).expected;
                    break;
                }
                case EstimatorKind::BIPWCM_MC: {
                    EnsembleParams p = fit_ensemble(EnsembleKind::BIPWCM, s);
                    SampleBatch batch = mc_metrics(p, scenario.sheet, mkt, n_samples,
                                                   estimator_seed(seed, est));
                    est_s = batch_mean(batch.systemicness_draws);
                    est_iv = batch_mean(batch.indirect_vulnerability_draws);
                    break;
                }
                case EstimatorKind::BIPECM_MC: {
                    EnsembleParams p = fit_ensemble(EnsembleKind::BIPECM, s, d);
                    SampleBatch batch = mc_metrics(p, scenario.sheet, mkt, n_samples,
                                                   estimator_seed(seed, est));
                    est_s = batch_mean(batch.systemicness_draws);
                    est_iv = batch_mean(batch.indirect_vulnerability_draws);
                    break;
                }
            }
        } catch (const Error& e) {
            failure = std::string(e.code()) + ": " + e.what();
        }

        for (const char* metric : {"systemicness", "indirect_vulnerability"}) {
            QuartileErrorReport rep;
            rep.metric = metric;
            rep.estimator = to_string(est);
            if (!failure.empty()) {
                rep.error = failure;
            } else {
                const Vector& truth = metric == std::string("systemicness") ? truth_s : truth_iv;
                const Vector& estv = metric == std::string("systemicness") ? est_s : est_iv;
                RelativeErrors rel = relative_errors(estv, truth);
                rep = quartile_report(rel.errors, rel.truth);
                rep.metric = metric;
                rep.estimator = to_string(est);
                rep.excluded = static_cast<int>(rel.excluded_zero.size());
            }
            reports.push_back(std::move(rep));
        }
    }
    return reports;
}

}  // namespace firenet
