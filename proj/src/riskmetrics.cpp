#include "firenet/riskmetrics.hpp"

#include <cmath>

#include "firenet/core.hpp"
#include "firenet/numeric.hpp"

namespace firenet {

namespace {

void check_dims(const HoldingsMatrix& x, const MarketParams& mkt) {
    if (mkt.n_assets() != x.n_assets())
        throw ValidationError("market parameter length does not match asset count");
}

void check_sheet(const HoldingsMatrix& x, const BankSheet& sheet) {
    if (sheet.n_banks() != x.n_banks())
        throw InconsistentSheetError("sheet covers " + std::to_string(sheet.n_banks()) +
                                     " banks, matrix has " + std::to_string(x.n_banks()));
    Vector a = row_sums(x.entries());
    for (Eigen::Index n = 0; n < a.size(); ++n) {
        double scale = std::max(std::abs(a[n]), std::abs(sheet.sizes[n]));
        if (std::abs(a[n] - sheet.sizes[n]) > kSheetRelTol * std::max(scale, 1.0))
            throw InconsistentSheetError("bank " + std::to_string(n) + " sheet size " +
                                         std::to_string(sheet.sizes[n]) +
                                         " does not match row sum " + std::to_string(a[n]));
    }
}

Vector dot_rows(const Matrix& w, const Vector& coeff) {
    Vector out(w.rows());
    std::vector<double> buf(static_cast<std::size_t>(w.cols()));
    for (Eigen::Index n = 0; n < w.rows(); ++n) {
        for (Eigen::Index k = 0; k < w.cols(); ++k)
            buf[static_cast<std::size_t>(k)] = w(n, k) * coeff[k];
        out[n] = pairwise_sum(buf);
    }
    return out;
}

}  // namespace

Vector portfolio_returns(const HoldingsMatrix& x, const MarketParams& mkt) {
    check_dims(x, mkt);
    return dot_rows(weights(x), mkt.shock);
}

Vector gamma(const HoldingsMatrix& x, const MarketParams& mkt) {
    check_dims(x, mkt);
    Vector c = col_sums(x.entries());
    Vector coeff = c.cwiseProduct(mkt.illiquidity);
    return dot_rows(weights(x), coeff);
}

Vector systemicness(const HoldingsMatrix& x, const BankSheet& sheet, const MarketParams& mkt) {
    check_dims(x, mkt);
    check_sheet(x, sheet);
    Vector g = gamma(x, mkt);
    Vector r = portfolio_returns(x, mkt);
    double e = sheet.total_equity();
    Vector s(x.n_banks());
    for (Eigen::Index n = 0; n < s.size(); ++n)
        s[n] = g[n] * (sheet.sizes[n] / e) * sheet.leverages[n] * r[n];
    return s;
}

double aggregate_vulnerability(const Vector& s) { return pairwise_sum(s); }

Vector indirect_vulnerability(const HoldingsMatrix& x, const BankSheet& sheet,
                              const MarketParams& mkt) {
    check_dims(x, mkt);
    check_sheet(x, sheet);
    Matrix w = weights(x);
    Vector r = dot_rows(w, mkt.shock);
    // Column aggregate sum_m W_{m,k} A_m B_m r_m, shared by every bank.
    Vector colagg(x.n_assets());
    std::vector<double> buf(static_cast<std::size_t>(x.n_banks()));
    for (Eigen::Index k = 0; k < x.n_assets(); ++k) {
        for (Eigen::Index m = 0; m < x.n_banks(); ++m)
            buf[static_cast<std::size_t>(m)] =
                w(m, k) * sheet.sizes[m] * sheet.leverages[m] * r[m];
        colagg[k] = pairwise_sum(buf);
    }
    Vector coeff = mkt.illiquidity.cwiseProduct(colagg);
    Vector inner = dot_rows(w, coeff);
    Vector iv(x.n_banks());
    for (Eigen::Index n = 0; n < iv.size(); ++n)
        iv[n] = (1.0 + sheet.leverages[n]) * inner[n];
    return iv;
}

RiskReport compute_risk_report(const HoldingsMatrix& x, const BankSheet& sheet,
                               const MarketParams& mkt, bool drop_empty_banks) {
    check_dims(x, mkt);
    if (sheet.n_banks() != x.n_banks())
        throw InconsistentSheetError("sheet covers " + std::to_string(sheet.n_banks()) +
                                     " banks, matrix has " + std::to_string(x.n_banks()));

    RiskReport report;
    auto zeros = zero_rows(x);
    const HoldingsMatrix* eval = &x;
    const BankSheet* eval_sheet = &sheet;
    std::optional<HoldingsMatrix> reduced;
    std::optional<BankSheet> reduced_sheet;

    if (!zeros.empty()) {
        if (!drop_empty_banks) throw ZeroRowError(zeros);
        std::vector<bool> drop(static_cast<std::size_t>(x.n_banks()), false);
        for (auto n : zeros) {
            drop[n] = true;
            report.dropped_bank_ids.push_back(x.bank_ids()[n]);
        }
        auto kept = x.n_banks() - static_cast<Eigen::Index>(zeros.size());
        if (kept == 0) throw ZeroRowError(zeros);
        Matrix m(kept, x.n_assets());
        Vector sz(kept), eq(kept);
        std::vector<std::string> ids;
        Eigen::Index row = 0;
        for (Eigen::Index n = 0; n < x.n_banks(); ++n) {
            if (drop[static_cast<std::size_t>(n)]) continue;
            m.row(row) = x.entries().row(n);
            sz[row] = sheet.sizes[n];
            eq[row] = sheet.equities[n];
            ids.push_back(x.bank_ids()[n]);
            ++row;
        }
        reduced.emplace(std::move(m), std::move(ids), x.asset_ids());
        reduced_sheet.emplace(std::move(sz), std::move(eq));
        eval = &*reduced;
        eval_sheet = &*reduced_sheet;
        report.notes.push_back("dropped " + std::to_string(zeros.size()) +
                               " bank(s) with zero holdings; total equity E covers retained banks only");
    }

    report.bank_ids = eval->bank_ids();
    report.portfolio_returns = portfolio_returns(*eval, mkt);
    report.systemicness = systemicness(*eval, *eval_sheet, mkt);
    report.indirect_vulnerability = indirect_vulnerability(*eval, *eval_sheet, mkt);
    report.aggregate_vulnerability = aggregate_vulnerability(report.systemicness);
    return report;
}

}  // namespace firenet
