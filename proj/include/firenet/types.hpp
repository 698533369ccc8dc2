#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "firenet/errors.hpp"

namespace firenet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

// Relative tolerance for the row/column balance condition on strengths.
inline constexpr double kBalanceRelTol = 1e-9;
// Relative tolerance for checking a balance sheet against observed marginals.
inline constexpr double kSheetRelTol = 1e-9;

// Bank-by-asset matrix of dollar holdings (units: thousands of dollars).
// Entries are non-negative reals; ensemble samples are integer-valued but
// stored in the same type. Immutable after construction.
class HoldingsMatrix {
public:
    HoldingsMatrix(Matrix entries, std::vector<std::string> bank_ids,
                   std::vector<std::string> asset_ids);

    // Generates bank_001.../asset_001... identifiers.
    explicit HoldingsMatrix(Matrix entries);

    Eigen::Index n_banks() const { return entries_.rows(); }
    Eigen::Index n_assets() const { return entries_.cols(); }
    const Matrix& entries() const { return entries_; }
    const std::vector<std::string>& bank_ids() const { return bank_ids_; }
    const std::vector<std::string>& asset_ids() const { return asset_ids_; }

private:
    void validate() const;

    Matrix entries_;
    std::vector<std::string> bank_ids_;
    std::vector<std::string> asset_ids_;
};

std::vector<std::string> default_ids(const std::string& prefix, Eigen::Index n);

// Row and column sums of a holdings matrix: bank sizes A and asset
// capitalizations C, with the shared total L.
struct StrengthSequences {
    Vector bank_sizes;   // A_n
    Vector asset_caps;   // C_k
    double total = 0.0;  // L = sum(A) = sum(C)

    StrengthSequences(Vector bank_sizes_in, Vector asset_caps_in);

    Eigen::Index n_banks() const { return bank_sizes.size(); }
    Eigen::Index n_assets() const { return asset_caps.size(); }
};

// Counts of nonzero entries per row/column of the binary projection.
struct DegreeSequences {
    IntVector bank_degrees;   // D^row_n
    IntVector asset_degrees;  // D^col_k

    DegreeSequences(IntVector bank_degrees_in, IntVector asset_degrees_in);

    Eigen::Index n_banks() const { return bank_degrees.size(); }
    Eigen::Index n_assets() const { return asset_degrees.size(); }
};

// Per-bank size, equity, and the derived leverage B_n = (A_n - E_n) / E_n.
// Leverage is always recomputed from sizes and equities so the identity is
// exact by construction.
struct BankSheet {
    Vector sizes;      // A_n
    Vector equities;   // E_n
    Vector leverages;  // B_n, derived

    BankSheet(Vector sizes_in, Vector equities_in);

    Eigen::Index n_banks() const { return sizes.size(); }
    double total_equity() const;
};

// Per-asset illiquidity l_k (return per dollar purchased) and shock eps_k.
struct MarketParams {
    Vector illiquidity;  // l_k >= 0
    Vector shock;        // eps_k

    MarketParams(Vector illiquidity_in, Vector shock_in);

    Eigen::Index n_assets() const { return illiquidity.size(); }

    // l_k = ell for every asset except those whose id equals cash_asset_id
    // (which get 0), eps_k = eps everywhere.
    static MarketParams defaults(const std::vector<std::string>& asset_ids,
                                 const std::string& cash_asset_id = "cash",
                                 double ell = 1e-10, double eps = 0.01);
};

}  // namespace firenet
