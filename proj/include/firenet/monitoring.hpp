#pragma once

#include <string>
#include <vector>

#include "firenet/sampling.hpp"

namespace firenet {

struct MonitorRecord {
    std::string quarter_id;
    double observed = 0.0;
    double ref_upper = 0.0;   // upper quantile of the reference quarter
    double band_lower = 0.0;  // current-quarter band, kept for plotting
    double band_upper = 0.0;
    bool flag = false;        // observed strictly above ref_upper
};

struct MonitorResult {
    std::string bank_id;
    std::string reference_quarter;
    std::vector<MonitorRecord> records;
    int comparisons = 0;  // no multiple-testing correction applied; count
                          // reported so users can correct downstream
};

// Regulator workflow: flag quarters whose observed metric exceeds the
// reference quarter's upper band. Ties at the band edge do not flag.
// `observed` and `per_quarter_bands` are aligned per quarter; `bank` picks
// the component out of each band.
MonitorResult monitor_bank(const std::vector<double>& observed, const QuantileBand& reference_band,
                           const std::vector<QuantileBand>& per_quarter_bands, Eigen::Index bank,
                           std::vector<std::string> quarter_ids = {},
                           std::string bank_id = "bank", std::size_t reference_quarter_index = 0);

}  // namespace firenet
