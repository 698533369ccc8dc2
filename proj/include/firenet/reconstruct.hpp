#pragma once

#include "firenet/types.hpp"

namespace firenet {

// Boolean support pattern: true entries may hold a nonzero position.
struct SupportMask {
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> allowed;

    static SupportMask full(Eigen::Index n_banks, Eigen::Index n_assets);

    Eigen::Index rows() const { return allowed.rows(); }
    Eigen::Index cols() const { return allowed.cols(); }
};

// Rank-one matrix X_{n,k} = A_n C_k / L implied by the strength sequences.
HoldingsMatrix capm_matrix(const StrengthSequences& s);
HoldingsMatrix capm_matrix(const StrengthSequences& s, std::vector<std::string> bank_ids,
                           std::vector<std::string> asset_ids);

struct CrossEntropyOptions {
    double tol = 1e-10;       // max relative marginal residual
    int max_iter = 10000;     // full row+column sweeps
    // Stall detection: if the best residual improves by less than
    // stall_eps over stall_window consecutive sweeps, the support is
    // declared infeasible.
    int stall_window = 100;
    double stall_eps = 1e-15;
};

struct CrossEntropyResult {
    HoldingsMatrix matrix;
    int iterations = 0;
    double residual = 0.0;
};

// Minimizes sum X log(X / prior) subject to the marginals of s and the
// support mask, by iterative proportional fitting (alternating row and
// column rescaling). Prior entries outside the mask are zeroed first;
// exact zeros stay zero throughout.
CrossEntropyResult cross_entropy_min(const HoldingsMatrix& prior, const StrengthSequences& s,
                                     const SupportMask& mask,
                                     const CrossEntropyOptions& opts = {});

// KL objective sum X log(X / prior), with the 0 log(0/q) = 0 convention.
// Requires prior > 0 wherever X > 0.
double kl_divergence(const Matrix& x, const Matrix& prior);

}  // namespace firenet
