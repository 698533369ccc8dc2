#include "firenet/types.hpp"

#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "firenet/numeric.hpp"

namespace firenet {

namespace {

void check_no_duplicates(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second)
            throw ValidationError(std::string(what) + " identifiers contain duplicate '" + id + "'");
    }
}

}  // namespace

std::vector<std::string> default_ids(const std::string& prefix, Eigen::Index n) {
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%03lld", static_cast<long long>(i + 1));
        ids.push_back(prefix + buf);
    }
    return ids;
}

HoldingsMatrix::HoldingsMatrix(Matrix entries, std::vector<std::string> bank_ids,
                               std::vector<std::string> asset_ids)
    : entries_(std::move(entries)), bank_ids_(std::move(bank_ids)),
      asset_ids_(std::move(asset_ids)) {
    validate();
}

HoldingsMatrix::HoldingsMatrix(Matrix entries)
    : entries_(std::move(entries)),
      bank_ids_(default_ids("bank_", entries_.rows())),
      asset_ids_(default_ids("asset_", entries_.cols())) {
    validate();
}

void HoldingsMatrix::validate() const {
    if (entries_.rows() < 1 || entries_.cols() < 1)
        throw ValidationError("holdings matrix must have at least one bank and one asset");
    if (static_cast<Eigen::Index>(bank_ids_.size()) != entries_.rows())
        throw ValidationError("bank identifier count does not match row count");
    if (static_cast<Eigen::Index>(asset_ids_.size()) != entries_.cols())
        throw ValidationError("asset identifier count does not match column count");
    check_no_duplicates(bank_ids_, "bank");
    check_no_duplicates(asset_ids_, "asset");
    for (Eigen::Index n = 0; n < entries_.rows(); ++n)
        for (Eigen::Index k = 0; k < entries_.cols(); ++k) {
            double v = entries_(n, k);
            if (!(v >= 0.0) || std::isnan(v) || std::isinf(v))
                throw ValidationError("holdings entry (" + std::to_string(n) + "," +
                                      std::to_string(k) + ") is not a non-negative finite real");
        }
}

StrengthSequences::StrengthSequences(Vector bank_sizes_in, Vector asset_caps_in)
    : bank_sizes(std::move(bank_sizes_in)), asset_caps(std::move(asset_caps_in)) {
    if (bank_sizes.size() < 1 || asset_caps.size() < 1)
        throw ValidationError("strength sequences must be non-empty");
    for (Eigen::Index n = 0; n < bank_sizes.size(); ++n)
        if (!(bank_sizes[n] >= 0.0) || std::isinf(bank_sizes[n]))
            throw ValidationError("bank size " + std::to_string(n) + " is negative or non-finite");
    for (Eigen::Index k = 0; k < asset_caps.size(); ++k)
        if (!(asset_caps[k] >= 0.0) || std::isinf(asset_caps[k]))
            throw ValidationError("asset cap " + std::to_string(k) + " is negative or non-finite");
    double sum_a = pairwise_sum(bank_sizes);
    double sum_c = pairwise_sum(asset_caps);
    double scale = std::max(sum_a, sum_c);
    if (std::abs(sum_a - sum_c) > kBalanceRelTol * scale)
        throw ValidationError("strength sequences are unbalanced: sum(A)=" + std::to_string(sum_a) +
                              " vs sum(C)=" + std::to_string(sum_c));
    total = sum_a;
    if (!(total > 0.0)) throw ValidationError("strength sequences have zero total");
}

DegreeSequences::DegreeSequences(IntVector bank_degrees_in, IntVector asset_degrees_in)
    : bank_degrees(std::move(bank_degrees_in)), asset_degrees(std::move(asset_degrees_in)) {
    if (bank_degrees.size() < 1 || asset_degrees.size() < 1)
        throw ValidationError("degree sequences must be non-empty");
    const auto n_banks = bank_degrees.size();
    const auto n_assets = asset_degrees.size();
    long long sum_row = 0, sum_col = 0;
    for (Eigen::Index n = 0; n < n_banks; ++n) {
        if (bank_degrees[n] < 0 || bank_degrees[n] > n_assets)
            throw ValidationError("bank degree " + std::to_string(n) + " outside [0, K]");
        sum_row += bank_degrees[n];
    }
    for (Eigen::Index k = 0; k < n_assets; ++k) {
        if (asset_degrees[k] < 0 || asset_degrees[k] > n_banks)
            throw ValidationError("asset degree " + std::to_string(k) + " outside [0, N]");
        sum_col += asset_degrees[k];
    }
    if (sum_row != sum_col)
        throw ValidationError("degree sequences disagree on total edge count: " +
                              std::to_string(sum_row) + " vs " + std::to_string(sum_col));
}

BankSheet::BankSheet(Vector sizes_in, Vector equities_in)
    : sizes(std::move(sizes_in)), equities(std::move(equities_in)) {
    if (sizes.size() != equities.size() || sizes.size() < 1)
        throw ValidationError("bank sheet sizes and equities must have equal nonzero length");
    leverages.resize(sizes.size());
    for (Eigen::Index n = 0; n < sizes.size(); ++n) {
        if (!(equities[n] > 0.0) || std::isinf(equities[n]))
            throw ValidationError("bank " + std::to_string(n) + " has non-positive equity");
        if (!(sizes[n] >= 0.0) || std::isinf(sizes[n]))
            throw ValidationError("bank " + std::to_string(n) + " has negative or non-finite size");
        leverages[n] = (sizes[n] - equities[n]) / equities[n];
    }
    if (!(total_equity() > 0.0)) throw ValidationError("total equity must be positive");
}

double BankSheet::total_equity() const { return pairwise_sum(equities); }

MarketParams::MarketParams(Vector illiquidity_in, Vector shock_in)
    : illiquidity(std::move(illiquidity_in)), shock(std::move(shock_in)) {
    if (illiquidity.size() != shock.size() || illiquidity.size() < 1)
        throw ValidationError("market parameter vectors must have equal nonzero length");
    for (Eigen::Index k = 0; k < illiquidity.size(); ++k) {
        if (!(illiquidity[k] >= 0.0) || std::isinf(illiquidity[k]))
            throw ValidationError("illiquidity " + std::to_string(k) + " is negative or non-finite");
        if (std::isnan(shock[k]) || std::isinf(shock[k]))
            throw ValidationError("shock " + std::to_string(k) + " is non-finite");
    }
}

MarketParams MarketParams::defaults(const std::vector<std::string>& asset_ids,
                                    const std::string& cash_asset_id, double ell, double eps) {
    auto k = static_cast<Eigen::Index>(asset_ids.size());
    Vector l(k), e(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        l[i] = (asset_ids[static_cast<std::size_t>(i)] == cash_asset_id) ? 0.0 : ell;
        e[i] = eps;
    }
    return MarketParams(std::move(l), std::move(e));
}

}  // namespace firenet
