#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "firenet/evaluation.hpp"
#include "firenet/monitoring.hpp"
#include "firenet/riskmetrics.hpp"
#include "firenet/sampling.hpp"
#include "firenet/types.hpp"

namespace firenet::io {

inline constexpr const char* kToolVersion = "0.1.0";

// Reals in artifacts carry 17 significant digits, enough for a lossless
// double round-trip.
std::string format_double(double v);

// FNV-1a of a canonical config string; embedded in artifact headers.
std::string config_hash(const std::string& canonical_config);

// Header lines written at the top of every artifact:
//   # firenet <version>
//   # config_hash=<hex>
//   # seed=<n>
struct ArtifactHeader {
    std::string config_hash_value = "none";
    std::optional<std::uint64_t> seed;
    std::vector<std::pair<std::string, std::string>> extra;
};

// --- holdings CSV (bank_id,equity[,size],<asset ids...>) --------------------

struct LoadedHoldings {
    HoldingsMatrix matrix;
    BankSheet sheet;
    std::vector<std::string> warnings;
};

// Bank sizes always come from the row sums; an optional `size` column is
// cross-checked (1e-6 relative) and produces a warning on mismatch.
LoadedHoldings load_holdings(const std::string& path);
void save_holdings(const std::string& path, const HoldingsMatrix& x, const BankSheet& sheet,
                   const ArtifactHeader& header = {});

// --- bare matrix CSV (bank_id,<asset ids...>) --------------------------------

HoldingsMatrix load_matrix_csv(const std::string& path);
void save_matrix_csv(const std::string& path, const HoldingsMatrix& x,
                     const ArtifactHeader& header = {});

// --- strengths files ----------------------------------------------------------

// banks.csv: bank_id,size,equity[,degree]
struct BanksFile {
    std::vector<std::string> ids;
    Vector sizes;
    Vector equities;
    std::optional<IntVector> degrees;
};
BanksFile load_banks_csv(const std::string& path);

// assets.csv: asset_id,cap[,degree]
struct AssetsFile {
    std::vector<std::string> ids;
    Vector caps;
    std::optional<IntVector> degrees;
};
AssetsFile load_assets_csv(const std::string& path);

// market.csv: asset_id,illiquidity,shock — overrides on top of defaults.
MarketParams build_market_params(const std::vector<std::string>& asset_ids,
                                 const std::optional<std::string>& market_csv_path,
                                 const std::string& cash_asset_id, double ell, double eps);

// --- metric artifacts -----------------------------------------------------------

void save_risk_report_csv(const std::string& path, const RiskReport& report,
                          const ArtifactHeader& header);
void save_risk_report_json(const std::string& path, const RiskReport& report,
                           const ArtifactHeader& header);

void save_batch_csv(const std::string& path, const SampleBatch& batch,
                    const std::vector<std::string>& bank_ids, const ArtifactHeader& header);
struct LoadedBatch {
    SampleBatch batch;
    std::vector<std::string> bank_ids;
};
LoadedBatch load_batch_csv(const std::string& path);

void save_band_csv(const std::string& path, const QuantileBand& band, MetricKind metric,
                   const std::vector<std::string>& bank_ids, const ArtifactHeader& header);
struct LoadedBand {
    QuantileBand band;
    MetricKind metric;
    std::vector<std::string> bank_ids;
};
LoadedBand load_band_csv(const std::string& path);

void save_monitor_csv(const std::string& path, const MonitorResult& result,
                      const ArtifactHeader& header);

// monitor input series: quarter,value
struct ObservedSeries {
    std::vector<std::string> quarters;
    std::vector<double> values;
};
ObservedSeries load_observed_csv(const std::string& path);

void save_quartile_reports_csv(const std::string& path,
                               const std::vector<QuartileErrorReport>& reports,
                               const ArtifactHeader& header);
void save_quartile_reports_json(const std::string& path,
                                const std::vector<QuartileErrorReport>& reports,
                                const ArtifactHeader& header);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace firenet::io
