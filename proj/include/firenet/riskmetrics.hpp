#pragma once

#include <optional>
#include <string>
#include <vector>

#include "firenet/types.hpp"

namespace firenet {

// One-shot fire-sale risk metrics on a holdings network: portfolio shock
// returns r = W eps, the liquidation-impact factor Gamma, per-bank
// systemicness S_n = Gamma_n (A_n / E) B_n r_n, aggregate vulnerability
// AV = sum S_n, and indirect vulnerability IV_n.

// r_n = sum_k W_{n,k} eps_k.
Vector portfolio_returns(const HoldingsMatrix& x, const MarketParams& mkt);

// Gamma_n = sum_k C_k l_k W_{n,k}, where C_k are the column sums of X
// (equal to sum_m A_m W_{m,k}).
Vector gamma(const HoldingsMatrix& x, const MarketParams& mkt);

// S_n = Gamma_n (A_n / E) B_n r_n with A_n, B_n, E taken from the sheet.
// The sheet sizes must agree with the matrix row sums to 1e-9 relative.
Vector systemicness(const HoldingsMatrix& x, const BankSheet& sheet, const MarketParams& mkt);

// AV = sum_n S_n (pairwise summation; identical to the value stored in a
// RiskReport built from the same S).
double aggregate_vulnerability(const Vector& s);

// IV_n = (1 + B_n) sum_k l_k W_{n,k} sum_m W_{m,k} A_m B_m r_m.
Vector indirect_vulnerability(const HoldingsMatrix& x, const BankSheet& sheet,
                              const MarketParams& mkt);

struct RiskReport {
    std::vector<std::string> bank_ids;  // banks the metrics cover (after drops)
    Vector systemicness;
    Vector indirect_vulnerability;
    double aggregate_vulnerability = 0.0;
    Vector portfolio_returns;
    // Optional per-bank confidence bands (attached by the sampling layer).
    std::optional<Vector> band_lower;
    std::optional<Vector> band_upper;
    std::vector<std::string> dropped_bank_ids;
    std::vector<std::string> notes;
};

// Full-report convenience wrapper. Banks with zero total holdings are
// dropped (recorded in the report) before metric evaluation; the total
// equity E then covers retained banks only, which the report notes.
RiskReport compute_risk_report(const HoldingsMatrix& x, const BankSheet& sheet,
                               const MarketParams& mkt, bool drop_empty_banks = true);

}  // namespace firenet
