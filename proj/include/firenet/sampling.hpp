#pragma once

#include <cstdint>
#include <string>

#include "firenet/ensembles.hpp"
#include "firenet/types.hpp"

namespace firenet {

// Draws of the risk metrics across M sampled matrices. Fully determined by
// (ensemble, seed, M); draw m lives in row m of each matrix.
struct SampleBatch {
    std::string ensemble_hash;
    std::uint64_t seed = 0;
    int n_samples = 0;
    Matrix systemicness_draws;             // M x N
    Matrix indirect_vulnerability_draws;   // M x N
    Vector av_draws;                       // M
};

enum class MetricKind { Systemicness, IndirectVulnerability, AggregateVulnerability };

std::string to_string(MetricKind m);
MetricKind metric_kind_from_string(const std::string& name);

struct QuantileBand {
    double lower_prob = 0.05;
    double upper_prob = 0.95;
    Vector lower;
    Vector upper;
    Vector point_estimate;  // sample mean
};

// One integer-valued matrix drawn from the ensemble. Entry (n, k) of sample
// `sample_index` consumes the Philox streams (sample_index, n*K+k, slot);
// geometric entries use one inverse-CDF uniform, BIPECM entries a
// Bernoulli(P(X>0)) stage followed by a one-shifted geometric.
HoldingsMatrix sample_matrix(const EnsembleParams& p, std::uint64_t seed,
                             std::uint32_t sample_index = 0);

// Samples M matrices and evaluates the risk metrics on each draw. Balance
// sheet aggregates stay fixed at their observed values: B_n and E come from
// `sheet` (whose sizes must match the ensemble provenance strengths), while
// the network quantities (weights, row and column sums) come from each
// sampled matrix. Banks whose sampled row sum is zero contribute zero
// metrics for that draw.
SampleBatch mc_metrics(const EnsembleParams& p, const BankSheet& sheet, const MarketParams& mkt,
                       int n_samples, std::uint64_t seed);

// Empirical quantiles (R-7 linear interpolation of order statistics) per
// bank, or a single scalar for AV. Requires M >= ceil(1/min(lower_prob,
// 1-upper_prob)).
QuantileBand quantile_band(const SampleBatch& batch, MetricKind metric, double lower_prob = 0.05,
                           double upper_prob = 0.95);

// Per-bank sample means of a batch (same values as QuantileBand::point_estimate).
Vector batch_mean(const Matrix& draws);

}  // namespace firenet
