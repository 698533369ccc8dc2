#include "firenet/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "firenet/core.hpp"
#include "firenet/numeric.hpp"
#include "firenet/philox.hpp"

namespace firenet {

namespace {

// Per-entry sampling recipe, precomputed once per ensemble.
enum class EntryMode : std::uint8_t { AlwaysZero, Geometric, TwoStage };

struct SamplingPlan {
    Eigen::Index n_banks, n_assets;
    std::vector<EntryMode> mode;     // row-major n*K + k
    std::vector<double> log_ratio;   // ln t (< 0)
    std::vector<double> prob_pos;    // TwoStage only

    explicit SamplingPlan(const EnsembleParams& p)
        : n_banks(p.n_banks()), n_assets(p.n_assets()) {
        const auto total = static_cast<std::size_t>(n_banks * n_assets);
        mode.resize(total);
        log_ratio.resize(total, 0.0);
        prob_pos.resize(total, 0.0);
        for (Eigen::Index n = 0; n < n_banks; ++n)
            for (Eigen::Index k = 0; k < n_assets; ++k) {
                auto e = static_cast<std::size_t>(n * n_assets + k);
                EntryDistribution dist = entry_distribution(p, n, k);
                if (p.kind == EnsembleKind::MECAPM) {
                    double mu = dist.mean();
                    if (mu == 0.0) {
                        mode[e] = EntryMode::AlwaysZero;
                        continue;
                    }
                    mode[e] = EntryMode::Geometric;
                    // ln(mu/(1+mu)) without cancellation for large mu.
                    log_ratio[e] = -std::log1p(1.0 / mu);
                    continue;
                }
                if (!dist.forced && dist.t == 0.0) {
                    mode[e] = EntryMode::AlwaysZero;
                    continue;
                }
                if (p.kind == EnsembleKind::BIPWCM) {
                    mode[e] = EntryMode::Geometric;
                    log_ratio[e] = std::log(dist.t);
                } else {
                    mode[e] = EntryMode::TwoStage;
                    log_ratio[e] = std::log(dist.t);  // -inf when t == 0 (entry stays at 1)
                    prob_pos[e] = dist.prob_positive();
                }
            }
    }
};

inline double geometric_from_uniform(double u, double log_ratio) {
    // P(X >= x) = t^x for the inverse-CDF draw below.
    return std::floor(std::log(u) / log_ratio);
}

void fill_sample(const SamplingPlan& plan, std::uint64_t seed, std::uint32_t sample_index,
                 Matrix& out) {
    for (Eigen::Index n = 0; n < plan.n_banks; ++n)
        for (Eigen::Index k = 0; k < plan.n_assets; ++k) {
            auto e = static_cast<std::size_t>(n * plan.n_assets + k);
            auto entry = static_cast<std::uint32_t>(e);
            double x = 0.0;
            switch (plan.mode[e]) {
                case EntryMode::AlwaysZero:
                    break;
                case EntryMode::Geometric: {
                    double u = counter_uniform(seed, sample_index, entry, 0,
                                               rng_domain::kEnsembleSampling);
                    x = geometric_from_uniform(u, plan.log_ratio[e]);
                    break;
                }
                case EntryMode::TwoStage: {
                    double u0 = counter_uniform(seed, sample_index, entry, 0,
                                                rng_domain::kEnsembleSampling);
                    if (u0 < plan.prob_pos[e]) {
                        double u1 = counter_uniform(seed, sample_index, entry, 1,
                                                    rng_domain::kEnsembleSampling);
                        double tail = std::isinf(plan.log_ratio[e])
                                          ? 0.0
                                          : geometric_from_uniform(u1, plan.log_ratio[e]);
                        x = 1.0 + tail;
                    }
                    break;
                }
            }
            out(n, k) = x;
        }
}

int thread_count() {
    if (const char* env = std::getenv("FIRENET_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, 64);
    }
    return 1;
}

struct DrawWorkspace {
    Matrix x;
    std::vector<double> buf_banks, buf_assets;
    Vector col_sum, row_sum, col_agg;
};

// Per-draw metric evaluation with fixed balance-sheet aggregates. Weights
// come from the sampled matrix, so products A_m(X) W_{m,k}(X) collapse to
// X_{m,k}; the lone weight in IV is normalized by the observed size A_n*.
void evaluate_draw(const SamplingPlan& plan, const BankSheet& sheet, const MarketParams& mkt,
                   const Vector& observed_sizes, double total_equity, std::uint64_t seed,
                   std::uint32_t sample_index, DrawWorkspace& ws, double* s_out, double* iv_out,
                   double* av_out) {
    const Eigen::Index nb = plan.n_banks, na = plan.n_assets;
    fill_sample(plan, seed, sample_index, ws.x);

    for (Eigen::Index k = 0; k < na; ++k) {
        for (Eigen::Index m = 0; m < nb; ++m)
            ws.buf_banks[static_cast<std::size_t>(m)] = ws.x(m, k);
        ws.col_sum[k] = pairwise_sum(ws.buf_banks);
    }
    for (Eigen::Index n = 0; n < nb; ++n) {
        for (Eigen::Index k = 0; k < na; ++k)
            ws.buf_assets[static_cast<std::size_t>(k)] = ws.x(n, k);
        ws.row_sum[n] = pairwise_sum(ws.buf_assets);
    }

    // r_n = sum_k X_{n,k} eps_k / A_n(X); zero rows return nothing.
    Vector returns(nb);
    for (Eigen::Index n = 0; n < nb; ++n) {
        if (ws.row_sum[n] == 0.0) {
            returns[n] = 0.0;
            continue;
        }
        for (Eigen::Index k = 0; k < na; ++k)
            ws.buf_assets[static_cast<std::size_t>(k)] = ws.x(n, k) * mkt.shock[k];
        returns[n] = pairwise_sum(ws.buf_assets) / ws.row_sum[n];
    }

    for (Eigen::Index n = 0; n < nb; ++n) {
        for (Eigen::Index k = 0; k < na; ++k)
            ws.buf_assets[static_cast<std::size_t>(k)] =
                mkt.illiquidity[k] * ws.col_sum[k] * ws.x(n, k);
        double impact = pairwise_sum(ws.buf_assets);
        s_out[n] = sheet.leverages[n] * returns[n] * impact / total_equity;
    }

    // Column aggregate sum_m X_{m,k} B_m r_m shared across banks.
    for (Eigen::Index k = 0; k < na; ++k) {
        for (Eigen::Index m = 0; m < nb; ++m)
            ws.buf_banks[static_cast<std::size_t>(m)] =
                ws.x(m, k) * sheet.leverages[m] * returns[m];
        ws.col_agg[k] = pairwise_sum(ws.buf_banks);
    }
    for (Eigen::Index n = 0; n < nb; ++n) {
        if (observed_sizes[n] == 0.0) {
            iv_out[n] = 0.0;
            continue;
        }
        for (Eigen::Index k = 0; k < na; ++k)
            ws.buf_assets[static_cast<std::size_t>(k)] =
                mkt.illiquidity[k] * ws.x(n, k) * ws.col_agg[k];
        iv_out[n] = (1.0 + sheet.leverages[n]) * pairwise_sum(ws.buf_assets) / observed_sizes[n];
    }

    *av_out = pairwise_sum(std::span<const double>(s_out, static_cast<std::size_t>(nb)));
}

}  // namespace

std::string to_string(MetricKind m) {
    switch (m) {
        case MetricKind::Systemicness: return "systemicness";
        case MetricKind::IndirectVulnerability: return "iv";
        case MetricKind::AggregateVulnerability: return "av";
    }
    return "?";
}

MetricKind metric_kind_from_string(const std::string& name) {
    if (name == "systemicness" || name == "s") return MetricKind::Systemicness;
    if (name == "iv" || name == "indirect_vulnerability") return MetricKind::IndirectVulnerability;
    if (name == "av" || name == "aggregate_vulnerability")
        return MetricKind::AggregateVulnerability;
    throw ValidationError("unknown metric '" + name + "'");
}

HoldingsMatrix sample_matrix(const EnsembleParams& p, std::uint64_t seed,
                             std::uint32_t sample_index) {
    SamplingPlan plan(p);
    Matrix x(plan.n_banks, plan.n_assets);
    fill_sample(plan, seed, sample_index, x);
    return HoldingsMatrix(std::move(x));
}

SampleBatch mc_metrics(const EnsembleParams& p, const BankSheet& sheet, const MarketParams& mkt,
                       int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw ValidationError("sample count must be at least 1");
    if (mkt.n_assets() != p.n_assets())
        throw ValidationError("market parameters do not match ensemble asset count");
    if (sheet.n_banks() != p.n_banks())
        throw InconsistentSheetError("sheet bank count does not match ensemble");
    for (Eigen::Index n = 0; n < sheet.n_banks(); ++n) {
        double scale = std::max({std::abs(sheet.sizes[n]),
                                 std::abs(p.provenance.bank_sizes[n]), 1.0});
        if (std::abs(sheet.sizes[n] - p.provenance.bank_sizes[n]) > kSheetRelTol * scale)
            throw InconsistentSheetError("sheet sizes must equal the ensemble provenance strengths");
    }

    const Eigen::Index nb = p.n_banks(), na = p.n_assets();
    SamplingPlan plan(p);
    SampleBatch batch;
    batch.ensemble_hash = p.hash();
    batch.seed = seed;
    batch.n_samples = n_samples;
    batch.systemicness_draws.resize(n_samples, nb);
    batch.indirect_vulnerability_draws.resize(n_samples, nb);
    batch.av_draws.resize(n_samples);

    const double total_equity = sheet.total_equity();
    auto run_range = [&](int lo, int hi) {
        DrawWorkspace ws;
        ws.x.resize(nb, na);
        ws.buf_banks.resize(static_cast<std::size_t>(nb));
        ws.buf_assets.resize(static_cast<std::size_t>(na));
        ws.col_sum.resize(na);
        ws.row_sum.resize(nb);
        ws.col_agg.resize(na);
        std::vector<double> s(static_cast<std::size_t>(nb)), iv(static_cast<std::size_t>(nb));
        for (int m = lo; m < hi; ++m) {
            double av = 0.0;
            evaluate_draw(plan, sheet, mkt, p.provenance.bank_sizes, total_equity, seed,
                          static_cast<std::uint32_t>(m), ws, s.data(), iv.data(), &av);
            for (Eigen::Index n = 0; n < nb; ++n) {
                batch.systemicness_draws(m, n) = s[static_cast<std::size_t>(n)];
                batch.indirect_vulnerability_draws(m, n) = iv[static_cast<std::size_t>(n)];
            }
            batch.av_draws[m] = av;
        }
    };

    int threads = std::min(thread_count(), n_samples);
    if (threads <= 1) {
        run_range(0, n_samples);
    } else {
        std::vector<std::thread> pool;
        int chunk = (n_samples + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            int lo = t * chunk, hi = std::min(n_samples, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return batch;
}

Vector batch_mean(const Matrix& draws) {
    Vector mean(draws.cols());
    std::vector<double> buf(static_cast<std::size_t>(draws.rows()));
    for (Eigen::Index n = 0; n < draws.cols(); ++n) {
        for (Eigen::Index m = 0; m < draws.rows(); ++m)
            buf[static_cast<std::size_t>(m)] = draws(m, n);
        mean[n] = pairwise_sum(buf) / static_cast<double>(draws.rows());
    }
    return mean;
}

QuantileBand quantile_band(const SampleBatch& batch, MetricKind metric, double lower_prob,
                           double upper_prob) {
    if (!(lower_prob > 0.0 && lower_prob < upper_prob && upper_prob < 1.0))
        throw ValidationError("quantile probabilities must satisfy 0 < lower < upper < 1");
    double edge = std::min(lower_prob, 1.0 - upper_prob);
    auto required = static_cast<int>(std::ceil(1.0 / edge));
    if (batch.n_samples < required)
        throw InsufficientSamplesError("need at least " + std::to_string(required) +
                                       " samples for these probabilities, have " +
                                       std::to_string(batch.n_samples));

    auto band_of = [&](const Matrix& draws) {
        QuantileBand band;
        band.lower_prob = lower_prob;
        band.upper_prob = upper_prob;
        band.lower.resize(draws.cols());
        band.upper.resize(draws.cols());
        band.point_estimate = batch_mean(draws);
        std::vector<double> buf(static_cast<std::size_t>(draws.rows()));
        for (Eigen::Index n = 0; n < draws.cols(); ++n) {
            for (Eigen::Index m = 0; m < draws.rows(); ++m)
                buf[static_cast<std::size_t>(m)] = draws(m, n);
            std::sort(buf.begin(), buf.end());
            band.lower[n] = quantile_r7_sorted(buf, lower_prob);
            band.upper[n] = quantile_r7_sorted(buf, upper_prob);
        }
        return band;
    };

    switch (metric) {
        case MetricKind::Systemicness:
            return band_of(batch.systemicness_draws);
        case MetricKind::IndirectVulnerability:
            return band_of(batch.indirect_vulnerability_draws);
        case MetricKind::AggregateVulnerability: {
            Matrix one(batch.av_draws.size(), 1);
            one.col(0) = batch.av_draws;
            return band_of(one);
        }
    }
    throw ValidationError("unreachable metric kind");
}

}  // namespace firenet
