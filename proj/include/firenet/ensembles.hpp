#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "firenet/types.hpp"

namespace firenet {

enum class EnsembleKind { MECAPM, BIPWCM, BIPECM };

std::string to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& name);

// Fitted maximum-entropy ensemble over integer-valued holdings matrices.
// MECAPM stores the per-entry means directly; the configuration models
// store exponentiated Lagrange multipliers (phi, xi for strengths; psi,
// gamma additionally for degrees). Entries whose row has degree K (or
// column degree N) are "forced positive": their surplus factor diverges,
// so they are flagged and handled as one-shifted geometrics.
struct EnsembleParams {
    EnsembleKind kind;
    Matrix mecapm_means;  // MECAPM: mu_{n,k} = A_n C_k / L
    Vector phi;           // e^{-lambda_n}
    Vector xi;            // e^{-eta_k}
    Vector psi;           // e^{-rho_n} (BIPECM)
    Vector gamma;         // e^{-delta_k} (BIPECM)
    std::vector<bool> row_forced;  // BIPECM: D^row_n == K
    std::vector<bool> col_forced;  // BIPECM: D^col_k == N
    // false = node removed before fitting (zero strength/degree); its
    // entries are deterministic zeros.
    std::vector<bool> row_active;
    std::vector<bool> col_active;
    double fit_residual = 0.0;
    StrengthSequences provenance;
    std::optional<DegreeSequences> provenance_degrees;
    int sweeps = 0;       // solver diagnostics
    int clip_events = 0;  // times a multiplier product had to be clipped below 1

    Eigen::Index n_banks() const { return provenance.n_banks(); }
    Eigen::Index n_assets() const { return provenance.n_assets(); }

    // Stable provenance id over kind, dimensions, and parameter bytes.
    std::string hash() const;
};

// Distribution of a single matrix entry over the non-negative integers.
// All three ensembles fit the two-parameter family
//   P(0) = (1-t)/D,  P(x>=1) = (1-t) t^x u / D,  D = (1-t) + t u,
// with u = 1 reducing to the geometric case and u -> infinity (forced)
// to the one-shifted geometric.
struct EntryDistribution {
    EnsembleKind kind;
    double t = 0.0;          // geometric ratio in [0, 1)
    double u = 1.0;          // surplus factor (psi_n gamma_k)
    bool forced = false;     // P(0) = 0
    double exact_mean = 0.0; // MECAPM: mu stored without round-trip loss

    double pmf(long long x) const;
    double mean() const;
    double variance() const;
    double prob_positive() const;
};

struct FitOptions {
    double tol = 0.0;     // 0 = kind default (1e-8 BIPWCM, 1e-6 BIPECM)
    int max_iter = 100000;
    double damping = 0.5;  // log-space blend toward the coordinate solution
};

// Closed form: independent geometric entries with mean A_n C_k / L.
EnsembleParams fit_mecapm(const StrengthSequences& s);

// Solves sum_k phi_n xi_k / (1 - phi_n xi_k) = A_n (and the column
// analogue) by damped coordinate iteration with a Levenberg-Marquardt
// fallback. Requires strictly positive strengths.
EnsembleParams fit_bipwcm(const StrengthSequences& s, const FitOptions& opts = {});

// Adds the expected-degree constraints; per-node 2x2 coordinate solves
// plus the same fallback. Requires strictly positive strengths and degrees.
EnsembleParams fit_bipecm(const StrengthSequences& s, const DegreeSequences& d,
                          const FitOptions& opts = {});

// Strips zero-strength (and zero-degree) nodes, fits the reduced system,
// and re-embeds them as deterministic zero rows/columns.
EnsembleParams fit_ensemble(EnsembleKind kind, const StrengthSequences& s,
                            const std::optional<DegreeSequences>& d = std::nullopt,
                            const FitOptions& opts = {});

EntryDistribution entry_distribution(const EnsembleParams& p, Eigen::Index n, Eigen::Index k);

// Entrywise means. For MECAPM this is exactly the CAPM matrix of the
// provenance strengths.
HoldingsMatrix expected_matrix(const EnsembleParams& p);

// Closed-form MECAPM expectations (uniform shock, single common
// illiquidity on non-cash assets). `expected` = `capm_point` + `gap`.
struct ExpectedSystemicness {
    Vector expected;
    Vector capm_point;  // S_n evaluated on the CAPM matrix
    Vector gap;
};
ExpectedSystemicness mecapm_expected_systemicness(const StrengthSequences& s,
                                                  const BankSheet& sheet,
                                                  const MarketParams& mkt);

struct ExpectedIndirectVulnerability {
    Vector expected;
    Vector capm_point;  // IV_n evaluated on the CAPM matrix
};
ExpectedIndirectVulnerability mecapm_expected_indirect_vulnerability(const StrengthSequences& s,
                                                                     const BankSheet& sheet,
                                                                     const MarketParams& mkt);

// Versioned JSON round-trip for reuse across CLI invocations.
std::string params_to_json(const EnsembleParams& p);
EnsembleParams params_from_json(const std::string& text);

}  // namespace firenet
