#include "firenet/reconstruct.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "firenet/core.hpp"
#include "firenet/numeric.hpp"

namespace firenet {

SupportMask SupportMask::full(Eigen::Index n_banks, Eigen::Index n_assets) {
    SupportMask m;
    m.allowed.setConstant(n_banks, n_assets, true);
    return m;
}

HoldingsMatrix capm_matrix(const StrengthSequences& s) {
    return capm_matrix(s, default_ids("bank_", s.n_banks()), default_ids("asset_", s.n_assets()));
}

HoldingsMatrix capm_matrix(const StrengthSequences& s, std::vector<std::string> bank_ids,
                           std::vector<std::string> asset_ids) {
    Matrix x = (s.bank_sizes * s.asset_caps.transpose()) / s.total;
    return HoldingsMatrix(std::move(x), std::move(bank_ids), std::move(asset_ids));
}

double kl_divergence(const Matrix& x, const Matrix& prior) {
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(x.size()));
    for (Eigen::Index n = 0; n < x.rows(); ++n)
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            double v = x(n, k);
            if (v == 0.0) continue;
            double q = prior(n, k);
            if (!(q > 0.0))
                throw ValidationError("KL divergence undefined: X positive where prior is zero");
            terms.push_back(v * std::log(v / q));
        }
    return pairwise_sum(terms);
}

CrossEntropyResult cross_entropy_min(const HoldingsMatrix& prior, const StrengthSequences& s,
                                     const SupportMask& mask, const CrossEntropyOptions& opts) {
    const Eigen::Index n_banks = prior.n_banks();
    const Eigen::Index n_assets = prior.n_assets();
    if (s.n_banks() != n_banks || s.n_assets() != n_assets)
        throw ValidationError("strength sequences do not match prior dimensions");
    if (mask.rows() != n_banks || mask.cols() != n_assets)
        throw ValidationError("support mask does not match prior dimensions");

    Matrix x = prior.entries();
    for (Eigen::Index n = 0; n < n_banks; ++n)
        for (Eigen::Index k = 0; k < n_assets; ++k)
            if (!mask.allowed(n, k)) x(n, k) = 0.0;

    // A row (column) with positive target strength needs at least one
    // positive entry to scale; otherwise no amount of fitting can help.
    {
        Vector a = row_sums(x), c = col_sums(x);
        for (Eigen::Index n = 0; n < n_banks; ++n)
            if (s.bank_sizes[n] > 0.0 && a[n] == 0.0)
                throw InfeasibleSupportError(
                    "bank " + std::to_string(n) + " has positive target size but empty support",
                    std::numeric_limits<double>::infinity());
        for (Eigen::Index k = 0; k < n_assets; ++k)
            if (s.asset_caps[k] > 0.0 && c[k] == 0.0)
                throw InfeasibleSupportError(
                    "asset " + std::to_string(k) + " has positive target cap but empty support",
                    std::numeric_limits<double>::infinity());
        for (Eigen::Index n = 0; n < n_banks; ++n)
            if (s.bank_sizes[n] == 0.0) x.row(n).setZero();
        for (Eigen::Index k = 0; k < n_assets; ++k)
            if (s.asset_caps[k] == 0.0) x.col(k).setZero();
    }

#ifndef NDEBUG
    const Matrix x0 = x;  // masked prior, reference point for the objective
#endif

    auto residual_of = [&](const Matrix& m) {
        Vector a = row_sums(m), c = col_sums(m);
        double r = 0.0;
        for (Eigen::Index n = 0; n < n_banks; ++n)
            if (s.bank_sizes[n] > 0.0)
                r = std::max(r, std::abs(a[n] - s.bank_sizes[n]) / s.bank_sizes[n]);
        for (Eigen::Index k = 0; k < n_assets; ++k)
            if (s.asset_caps[k] > 0.0)
                r = std::max(r, std::abs(c[k] - s.asset_caps[k]) / s.asset_caps[k]);
        return r;
    };

#ifndef NDEBUG
    // The iterates approach the optimum from below in KL distance to the
    // prior, so the objective must not fall between sweeps (float slack).
    // A boundary snap restarts the sequence, so the tracker resets there.
    double prev_objective = -std::numeric_limits<double>::infinity();
#endif
    double best_residual = std::numeric_limits<double>::infinity();
    int stall = 0;
    double residual = residual_of(x);

    // When the optimum lies on the boundary of the support (entries forced
    // to zero by the marginals), plain scaling converges only harmonically.
    // Entries that keep shrinking at the residual's own scale are snapped
    // to zero; the snap is reverted if it does not pay off.
    double window_residual = residual;
    Matrix pre_snap;
    double pre_snap_residual = 0.0;
    int snap_age = -1;
    bool snapping_enabled = true;

    for (int it = 1; it <= opts.max_iter; ++it) {
        Vector a = row_sums(x);
        for (Eigen::Index n = 0; n < n_banks; ++n)
            if (a[n] > 0.0) x.row(n) *= s.bank_sizes[n] / a[n];
        Vector c = col_sums(x);
        for (Eigen::Index k = 0; k < n_assets; ++k)
            if (c[k] > 0.0) x.col(k) *= s.asset_caps[k] / c[k];

        residual = residual_of(x);
#ifndef NDEBUG
        double objective = kl_divergence(x, x0);
        assert(objective >= prev_objective - 1e-9 * (1.0 + std::abs(prev_objective)));
        prev_objective = objective;
#endif
        if (residual <= opts.tol)
            return CrossEntropyResult{HoldingsMatrix(std::move(x), prior.bank_ids(), prior.asset_ids()),
                                      it, residual};

        if (snap_age >= 0 && ++snap_age >= 100) {
            if (residual > pre_snap_residual) {
                x = pre_snap;
                residual = residual_of(x);
                snapping_enabled = false;
#ifndef NDEBUG
                prev_objective = -std::numeric_limits<double>::infinity();
#endif
            }
            snap_age = -1;
            pre_snap.resize(0, 0);
        }

        if (snapping_enabled && snap_age < 0 && it % 50 == 0) {
            bool slow = residual > 0.5 * window_residual;
            if (slow && residual < 1e-3 && residual > opts.tol) {
                double threshold_scale = 2.0 * residual;
                bool snapped = false;
                Matrix saved = x;
                for (Eigen::Index n = 0; n < n_banks; ++n)
                    for (Eigen::Index k = 0; k < n_assets; ++k) {
                        double cap = threshold_scale *
                                     std::min(s.bank_sizes[n], s.asset_caps[k]);
                        if (x(n, k) > 0.0 && x(n, k) < cap) {
                            x(n, k) = 0.0;
                            snapped = true;
                        }
                    }
                if (snapped) {
                    pre_snap = std::move(saved);
                    pre_snap_residual = residual;
                    snap_age = 0;
#ifndef NDEBUG
                    prev_objective = -std::numeric_limits<double>::infinity();
#endif
                }
            }
            window_residual = residual;
        }

        if (residual < best_residual - opts.stall_eps) {
            best_residual = residual;
            stall = 0;
        } else if (++stall >= opts.stall_window) {
            throw InfeasibleSupportError(
                "marginal residual stalled at " + std::to_string(residual) +
                    " after " + std::to_string(it) + " iterations; no matrix with the "
                    "requested marginals exists on this support",
                residual);
        }
    }
    throw MaxIterExceeded("cross-entropy scaling did not reach tolerance within " +
                              std::to_string(opts.max_iter) + " iterations",
                          residual);
}

}  // namespace firenet
