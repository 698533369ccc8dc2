#include "firenet/monitoring.hpp"

namespace firenet {

MonitorResult monitor_bank(const std::vector<double>& observed, const QuantileBand& reference_band,
                           const std::vector<QuantileBand>& per_quarter_bands, Eigen::Index bank,
                           std::vector<std::string> quarter_ids, std::string bank_id,
                           std::size_t reference_quarter_index) {
    if (observed.empty()) throw MissingQuarterError("no observed quarters supplied");
    if (per_quarter_bands.size() != observed.size())
        throw MissingQuarterError("have " + std::to_string(observed.size()) +
                                  " observed quarters but " +
                                  std::to_string(per_quarter_bands.size()) + " bands");
    if (reference_quarter_index >= observed.size())
        throw MissingQuarterError("reference quarter " + std::to_string(reference_quarter_index) +
                                  " outside the series");
    auto component = [&](const QuantileBand& band, const Vector& v) -> double {
        if (bank < 0 || bank >= v.size())
            throw IndexError("bank index " + std::to_string(bank) + " outside band of size " +
                             std::to_string(v.size()));
        (void)band;
        return v[bank];
    };
    if (quarter_ids.empty()) {
        quarter_ids.reserve(observed.size());
        for (std::size_t t = 0; t < observed.size(); ++t)
            quarter_ids.push_back("q" + std::to_string(t));
    } else if (quarter_ids.size() != observed.size()) {
        throw MissingQuarterError("quarter id list does not match the observed series");
    }

    double ref_upper = component(reference_band, reference_band.upper);

    MonitorResult result;
    result.bank_id = std::move(bank_id);
    result.reference_quarter = quarter_ids[reference_quarter_index];
    result.comparisons = static_cast<int>(observed.size());
    result.records.reserve(observed.size());
    for (std::size_t t = 0; t < observed.size(); ++t) {
        MonitorRecord rec;
        rec.quarter_id = quarter_ids[t];
        rec.observed = observed[t];
        rec.ref_upper = ref_upper;
        rec.band_lower = component(per_quarter_bands[t], per_quarter_bands[t].lower);
        rec.band_upper = component(per_quarter_bands[t], per_quarter_bands[t].upper);
        rec.flag = observed[t] > ref_upper;
        result.records.push_back(std::move(rec));
    }
    return result;
}

}  // namespace firenet
