#include "firenet/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "firenet/core.hpp"

namespace firenet::io {

namespace {

using nlohmann::json;

std::string format_int(std::uint64_t v) { return std::to_string(v); }

void write_header(std::ostream& out, const ArtifactHeader& header) {
    out << "# firenet " << kToolVersion << "\n";
    out << "# config_hash=" << header.config_hash_value << "\n";
    if (header.seed) out << "# seed=" << format_int(*header.seed) << "\n";
    for (const auto& [k, v] : header.extra) out << "# " << k << "=" << v << "\n";
}

struct CsvFile {
    std::vector<std::vector<std::string>> rows;  // comment/blank lines removed
    std::vector<std::size_t> line_numbers;       // 1-based original lines
    std::vector<std::pair<std::string, std::string>> comments;  // parsed "# k=v"
};

CsvFile read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    CsvFile file;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto body = line.substr(1);
            auto eq = body.find('=');
            if (eq != std::string::npos) {
                auto key = body.substr(0, eq);
                auto val = body.substr(eq + 1);
                while (!key.empty() && key.front() == ' ') key.erase(key.begin());
                file.comments.emplace_back(key, val);
            }
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            auto pos = line.find(',', start);
            if (pos == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        file.rows.push_back(std::move(fields));
        file.line_numbers.push_back(lineno);
    }
    if (file.rows.empty()) throw ValidationError("'" + path + "' holds no data rows");
    return file;
}

double parse_double(const std::string& field, std::size_t line, std::size_t column) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ParseError("'" + field + "' is not a number", line, column);
    return v;
}

long long parse_int(const std::string& field, std::size_t line, std::size_t column) {
    long long v = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ParseError("'" + field + "' is not an integer", line, column);
    return v;
}

std::optional<std::string> comment_value(const CsvFile& file, const std::string& key) {
    for (const auto& [k, v] : file.comments)
        if (k == key) return v;
    return std::nullopt;
}

json header_json(const ArtifactHeader& header) {
    json j;
    j["tool_version"] = kToolVersion;
    j["config_hash"] = header.config_hash_value;
    if (header.seed) j["seed"] = *header.seed;
    for (const auto& [k, v] : header.extra) j[k] = v;
    return j;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string config_hash(const std::string& canonical_config) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical_config) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << content;
}

LoadedHoldings load_holdings(const std::string& path) {
    CsvFile file = read_csv(path);
    const auto& header = file.rows[0];
    if (header.size() < 3 || header[0] != "bank_id" || header[1] != "equity")
        throw ParseError("holdings header must start 'bank_id,equity[,size],<asset ids>'",
                         file.line_numbers[0], 1);
    bool has_size = header.size() > 2 && header[2] == "size";
    std::size_t first_asset = has_size ? 3 : 2;
    if (header.size() <= first_asset)
        throw ParseError("holdings header lists no asset columns", file.line_numbers[0],
                         first_asset + 1);
    std::vector<std::string> asset_ids(header.begin() + static_cast<long>(first_asset),
                                       header.end());

    const std::size_t n_rows = file.rows.size() - 1;
    const std::size_t n_assets = asset_ids.size();
    Matrix entries(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_assets));
    Vector equities(static_cast<Eigen::Index>(n_rows));
    Vector declared_sizes(static_cast<Eigen::Index>(n_rows));
    std::vector<std::string> bank_ids(n_rows);
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    for (std::size_t r = 0; r < n_rows; ++r) {
        const auto& row = file.rows[r + 1];
        std::size_t line = file.line_numbers[r + 1];
        if (row.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(row.size()),
                             line, row.size());
        bank_ids[r] = row[0];
        equities[static_cast<Eigen::Index>(r)] = parse_double(row[1], line, 2);
        if (has_size) declared_sizes[static_cast<Eigen::Index>(r)] = parse_double(row[2], line, 3);
        for (std::size_t c = 0; c < n_assets; ++c) {
            double v = parse_double(row[first_asset + c], line, first_asset + c + 1);
            entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
            if (v < 0.0)
                violations.push_back("negative holding for bank '" + row[0] + "', asset '" +
                                     asset_ids[c] + "' (line " + std::to_string(line) +
                                     ", column " + std::to_string(first_asset + c + 1) + ")");
        }
        if (!(equities[static_cast<Eigen::Index>(r)] > 0.0))
            violations.push_back("bank '" + row[0] + "' has non-positive equity (line " +
                                 std::to_string(line) + ")");
    }
    if (!violations.empty()) {
        std::string msg = std::to_string(violations.size()) + " validation issue(s) in '" + path +
                          "': " + violations[0];
        if (violations.size() > 1) msg += " (+" + std::to_string(violations.size() - 1) + " more)";
        throw ValidationError(msg, violations);
    }

    // Row sums are the hard source of truth for bank sizes.
    Vector sizes = row_sums(entries);
    if (has_size) {
        for (Eigen::Index n = 0; n < sizes.size(); ++n) {
            double scale = std::max({std::abs(sizes[n]), std::abs(declared_sizes[n]), 1.0});
            if (std::abs(sizes[n] - declared_sizes[n]) > 1e-6 * scale)
                warnings.push_back("bank '" + bank_ids[static_cast<std::size_t>(n)] +
                                   "': declared size " + format_double(declared_sizes[n]) +
                                   " differs from row sum " + format_double(sizes[n]) +
                                   "; using the row sum");
        }
    }

    LoadedHoldings out{HoldingsMatrix(std::move(entries), std::move(bank_ids), std::move(asset_ids)),
                       BankSheet(std::move(sizes), std::move(equities)), std::move(warnings)};
    return out;
}

void save_holdings(const std::string& path, const HoldingsMatrix& x, const BankSheet& sheet,
                   const ArtifactHeader& header) {
    if (sheet.n_banks() != x.n_banks())
        throw ValidationError("sheet does not cover the holdings matrix");
    std::ostringstream out;
    write_header(out, header);
    out << "bank_id,equity";
    for (const auto& id : x.asset_ids()) out << "," << id;
    out << "\n";
    for (Eigen::Index n = 0; n < x.n_banks(); ++n) {
        out << x.bank_ids()[static_cast<std::size_t>(n)] << "," << format_double(sheet.equities[n]);
        for (Eigen::Index k = 0; k < x.n_assets(); ++k)
            out << "," << format_double(x.entries()(n, k));
        out << "\n";
    }
    write_file(path, out.str());
}

HoldingsMatrix load_matrix_csv(const std::string& path) {
    CsvFile file = read_csv(path);
    const auto& header = file.rows[0];
    if (header.size() < 2 || header[0] != "bank_id")
        throw ParseError("matrix header must be 'bank_id,<asset ids>'", file.line_numbers[0], 1);
    std::vector<std::string> asset_ids(header.begin() + 1, header.end());
    const std::size_t n_rows = file.rows.size() - 1;
    Matrix entries(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(asset_ids.size()));
    std::vector<std::string> bank_ids(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const auto& row = file.rows[r + 1];
        std::size_t line = file.line_numbers[r + 1];
        if (row.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(row.size()),
                             line, row.size());
        bank_ids[r] = row[0];
        for (std::size_t c = 0; c < asset_ids.size(); ++c)
            entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_double(row[1 + c], line, c + 2);
    }
    return HoldingsMatrix(std::move(entries), std::move(bank_ids), std::move(asset_ids));
}

void save_matrix_csv(const std::string& path, const HoldingsMatrix& x,
                     const ArtifactHeader& header) {
    std::ostringstream out;
    write_header(out, header);
    out << "bank_id";
    for (const auto& id : x.asset_ids()) out << "," << id;
    out << "\n";
    for (Eigen::Index n = 0; n < x.n_banks(); ++n) {
        out << x.bank_ids()[static_cast<std::size_t>(n)];
        for (Eigen::Index k = 0; k < x.n_assets(); ++k)
            out << "," << format_double(x.entries()(n, k));
        out << "\n";
    }
    write_file(path, out.str());
}

BanksFile load_banks_csv(const std::string& path) {
    CsvFile file = read_csv(path);
    const auto& header = file.rows[0];
    bool has_degree = header.size() == 4 && header[3] == "degree";
    if (!(header.size() == 3 || has_degree) || header[0] != "bank_id" || header[1] != "size" ||
        header[2] != "equity")
        throw ParseError("banks header must be 'bank_id,size,equity[,degree]'",
                         file.line_numbers[0], 1);
    const std::size_t n = file.rows.size() - 1;
    BanksFile out;
    out.ids.resize(n);
    out.sizes.resize(static_cast<Eigen::Index>(n));
    out.equities.resize(static_cast<Eigen::Index>(n));
    if (has_degree) out.degrees.emplace(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = file.rows[r + 1];
        std::size_t line = file.line_numbers[r + 1];
        if (row.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields", line,
                             row.size());
        out.ids[r] = row[0];
        out.sizes[static_cast<Eigen::Index>(r)] = parse_double(row[1], line, 2);
        out.equities[static_cast<Eigen::Index>(r)] = parse_double(row[2], line, 3);
        if (has_degree)
            (*out.degrees)[static_cast<Eigen::Index>(r)] =
                static_cast<int>(parse_int(row[3], line, 4));
    }
    return out;
}

AssetsFile load_assets_csv(const std::string& path) {
    CsvFile file = read_csv(path);
    const auto& header = file.rows[0];
    bool has_degree = header.size() == 3 && header[2] == "degree";
    if (!(header.size() == 2 || has_degree) || header[0] != "asset_id" || header[1] != "cap")
        throw ParseError("assets header must be 'asset_id,cap[,degree]'", file.line_numbers[0], 1);
    const std::size_t n = file.rows.size() - 1;
    AssetsFile out;
    out.ids.resize(n);
    out.caps.resize(static_cast<Eigen::Index>(n));
    if (has_degree) out.degrees.emplace(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = file.rows[r + 1];
        std::size_t line = file.line_numbers[r + 1];
        if (row.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields", line,
                             row.size());
        out.ids[r] = row[0];
        out.caps[static_cast<Eigen::Index>(r)] = parse_double(row[1], line, 2);
        if (has_degree)
            (*out.degrees)[static_cast<Eigen::Index>(r)] =
                static_cast<int>(parse_int(row[2], line, 3));
    }
    return out;
}

MarketParams build_market_params(const std::vector<std::string>& asset_ids,
                                 const std::optional<std::string>& market_csv_path,
                                 const std::string& cash_asset_id, double ell, double eps) {
    MarketParams mkt = MarketParams::defaults(asset_ids, cash_asset_id, ell, eps);
    if (!market_csv_path) return mkt;
    CsvFile file = read_csv(*market_csv_path);
    const auto& header = file.rows[0];
    if (header.size() != 3 || header[0] != "asset_id" || header[1] != "illiquidity" ||
        header[2] != "shock")
        throw ParseError("market header must be 'asset_id,illiquidity,shock'",
                         file.line_numbers[0], 1);
    for (std::size_t r = 1; r < file.rows.size(); ++r) {
        const auto& row = file.rows[r];
        std::size_t line = file.line_numbers[r];
        if (row.size() != 3) throw ParseError("expected 3 fields", line, row.size());
        auto it = std::find(asset_ids.begin(), asset_ids.end(), row[0]);
        if (it == asset_ids.end())
            throw ValidationError("market override names unknown asset '" + row[0] + "'");
        auto k = static_cast<Eigen::Index>(it - asset_ids.begin());
        mkt.illiquidity[k] = parse_double(row[1], line, 2);
        mkt.shock[k] = parse_double(row[2], line, 3);
    }
    return MarketParams(std::move(mkt.illiquidity), std::move(mkt.shock));
}

void save_risk_report_csv(const std::string& path, const RiskReport& report,
                          const ArtifactHeader& header) {
    std::ostringstream out;
    write_header(out, header);
    out << "# av=" << format_double(report.aggregate_vulnerability) << "\n";
    for (const auto& note : report.notes) out << "# note " << note << "\n";
    out << "bank_id,systemicness,indirect_vulnerability,portfolio_return";
    bool bands = report.band_lower && report.band_upper;
    if (bands) out << ",band_lower,band_upper";
    out << "\n";
    for (Eigen::Index n = 0; n < report.systemicness.size(); ++n) {
        out << report.bank_ids[static_cast<std::size_t>(n)] << ","
            << format_double(report.systemicness[n]) << ","
            << format_double(report.indirect_vulnerability[n]) << ","
            << format_double(report.portfolio_returns[n]);
        if (bands)
            out << "," << format_double((*report.band_lower)[n]) << ","
                << format_double((*report.band_upper)[n]);
        out << "\n";
    }
    write_file(path, out.str());
}

void save_risk_report_json(const std::string& path, const RiskReport& report,
                           const ArtifactHeader& header) {
    json j = header_json(header);
    j["aggregate_vulnerability"] = report.aggregate_vulnerability;
    j["bank_ids"] = report.bank_ids;
    auto dump = [](const Vector& v) {
        json arr = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
        return arr;
    };
    j["systemicness"] = dump(report.systemicness);
    j["indirect_vulnerability"] = dump(report.indirect_vulnerability);
    j["portfolio_returns"] = dump(report.portfolio_returns);
    if (report.band_lower) j["band_lower"] = dump(*report.band_lower);
    if (report.band_upper) j["band_upper"] = dump(*report.band_upper);
    j["dropped_bank_ids"] = report.dropped_bank_ids;
    j["notes"] = report.notes;
    write_file(path, j.dump(2) + "\n");
}

void save_batch_csv(const std::string& path, const SampleBatch& batch,
                    const std::vector<std::string>& bank_ids, const ArtifactHeader& header) {
    std::ostringstream out;
    ArtifactHeader h = header;
    h.seed = batch.seed;
    h.extra.emplace_back("ensemble_hash", batch.ensemble_hash);
    h.extra.emplace_back("n_samples", std::to_string(batch.n_samples));
    // Balance-sheet aggregates (B_n, E) stay at their observed values across
    // draws; only the portfolio composition is resampled.
    h.extra.emplace_back("balance_sheet", "fixed-observed");
    write_header(out, h);
    out << "draw,av";
    for (const auto& id : bank_ids) out << ",S:" << id;
    for (const auto& id : bank_ids) out << ",IV:" << id;
    out << "\n";
    for (int m = 0; m < batch.n_samples; ++m) {
        out << m << "," << format_double(batch.av_draws[m]);
        for (Eigen::Index n = 0; n < batch.systemicness_draws.cols(); ++n)
            out << "," << format_double(batch.systemicness_draws(m, n));
        for (Eigen::Index n = 0; n < batch.indirect_vulnerability_draws.cols(); ++n)
            out << "," << format_double(batch.indirect_vulnerability_draws(m, n));
        out << "\n";
    }
    write_file(path, out.str());
}

LoadedBatch load_batch_csv(const std::string& path) {
    CsvFile file = read_csv(path);
    auto hash = comment_value(file, "ensemble_hash");
    auto seed = comment_value(file, "seed");
    auto m_str = comment_value(file, "n_samples");
    if (!hash || !seed || !m_str)
        throw ValidationError("batch artifact is missing its header (ensemble_hash/seed/n_samples)");
    const auto& header = file.rows[0];
    if (header.size() < 2 || header[0] != "draw" || header[1] != "av")
        throw ParseError("batch header must start 'draw,av'", file.line_numbers[0], 1);
    std::size_t n_banks = (header.size() - 2) / 2;
    if (header.size() != 2 + 2 * n_banks)
        throw ParseError("batch header has unpaired S/IV columns", file.line_numbers[0], 1);
    std::vector<std::string> bank_ids;
    bank_ids.reserve(n_banks);
    for (std::size_t i = 0; i < n_banks; ++i) {
        const std::string& col = header[2 + i];
        if (col.rfind("S:", 0) != 0)
            throw ParseError("expected S:<bank> column", file.line_numbers[0], 3 + i);
        bank_ids.push_back(col.substr(2));
    }

    LoadedBatch out;
    out.bank_ids = bank_ids;
    out.batch.ensemble_hash = *hash;
    try {
        out.batch.seed = std::stoull(*seed);
        out.batch.n_samples = std::stoi(*m_str);
    } catch (const std::exception&) {
        throw ValidationError("batch artifact header carries malformed seed/n_samples");
    }
    const auto m = static_cast<Eigen::Index>(file.rows.size() - 1);
    if (m != out.batch.n_samples)
        throw ValidationError("batch artifact row count does not match its n_samples header");
    out.batch.av_draws.resize(m);
    out.batch.systemicness_draws.resize(m, static_cast<Eigen::Index>(n_banks));
    out.batch.indirect_vulnerability_draws.resize(m, static_cast<Eigen::Index>(n_banks));
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto& row = file.rows[static_cast<std::size_t>(r) + 1];
        std::size_t line = file.line_numbers[static_cast<std::size_t>(r) + 1];
        if (row.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields", line,
                             row.size());
        out.batch.av_draws[r] = parse_double(row[1], line, 2);
        for (std::size_t c = 0; c < n_banks; ++c) {
            out.batch.systemicness_draws(r, static_cast<Eigen::Index>(c)) =
                parse_double(row[2 + c], line, 3 + c);
            out.batch.indirect_vulnerability_draws(r, static_cast<Eigen::Index>(c)) =
                parse_double(row[2 + n_banks + c], line, 3 + n_banks + c);
        }
    }
    return out;
}

void save_band_csv(const std::string& path, const QuantileBand& band, MetricKind metric,
                   const std::vector<std::string>& bank_ids, const ArtifactHeader& header) {
    std::ostringstream out;
    ArtifactHeader h = header;
    h.extra.emplace_back("metric", to_string(metric));
    h.extra.emplace_back("lower_prob", format_double(band.lower_prob));
    h.extra.emplace_back("upper_prob", format_double(band.upper_prob));
    write_header(out, h);
    out << "bank_id,lower,mean,upper\n";
    for (Eigen::Index n = 0; n < band.lower.size(); ++n) {
        std::string id = metric == MetricKind::AggregateVulnerability
                             ? "av"
                             : bank_ids[static_cast<std::size_t>(n)];
        out << id << "," << format_double(band.lower[n]) << ","
            << format_double(band.point_estimate[n]) << "," << format_double(band.upper[n])
            << "\n";
    }
    write_file(path, out.str());
}

LoadedBand load_band_csv(const std::string& path) {
    CsvFile file = read_csv(path);
    auto metric = comment_value(file, "metric");
    auto lp = comment_value(file, "lower_prob");
    auto up = comment_value(file, "upper_prob");
    if (!metric || !lp || !up)
        throw ValidationError("band artifact is missing its header (metric/lower_prob/upper_prob)");
    const auto& header = file.rows[0];
    if (header.size() != 4 || header[0] != "bank_id")
        throw ParseError("band header must be 'bank_id,lower,mean,upper'", file.line_numbers[0], 1);
    LoadedBand out;
    out.metric = metric_kind_from_string(*metric);
    const auto n = static_cast<Eigen::Index>(file.rows.size() - 1);
    try {
        out.band.lower_prob = std::stod(*lp);
        out.band.upper_prob = std::stod(*up);
    } catch (const std::exception&) {
        throw ValidationError("band artifact header carries malformed probabilities");
    }
    out.band.lower.resize(n);
    out.band.upper.resize(n);
    out.band.point_estimate.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = file.rows[static_cast<std::size_t>(r) + 1];
        std::size_t line = file.line_numbers[static_cast<std::size_t>(r) + 1];
        if (row.size() != 4) throw ParseError("expected 4 fields", line, row.size());
        out.bank_ids.push_back(row[0]);
        out.band.lower[r] = parse_double(row[1], line, 2);
        out.band.point_estimate[r] = parse_double(row[2], line, 3);
        out.band.upper[r] = parse_double(row[3], line, 4);
    }
    return out;
}

void save_monitor_csv(const std::string& path, const MonitorResult& result,
                      const ArtifactHeader& header) {
    std::ostringstream out;
    ArtifactHeader h = header;
    h.extra.emplace_back("bank_id", result.bank_id);
    h.extra.emplace_back("reference_quarter", result.reference_quarter);
    h.extra.emplace_back("comparisons", std::to_string(result.comparisons));
    write_header(out, h);
    out << "quarter,observed,ref_upper,band_lower,band_upper,flag\n";
    for (const auto& rec : result.records) {
        out << rec.quarter_id << "," << format_double(rec.observed) << ","
            << format_double(rec.ref_upper) << "," << format_double(rec.band_lower) << ","
            << format_double(rec.band_upper) << "," << (rec.flag ? 1 : 0) << "\n";
    }
    write_file(path, out.str());
}

ObservedSeries load_observed_csv(const std::string& path) {
    CsvFile file = read_csv(path);
    const auto& header = file.rows[0];
    if (header.size() != 2 || header[0] != "quarter" || header[1] != "value")
        throw ParseError("observed header must be 'quarter,value'", file.line_numbers[0], 1);
    ObservedSeries out;
    for (std::size_t r = 1; r < file.rows.size(); ++r) {
        const auto& row = file.rows[r];
        std::size_t line = file.line_numbers[r];
        if (row.size() != 2) throw ParseError("expected 2 fields", line, row.size());
        out.quarters.push_back(row[0]);
        out.values.push_back(parse_double(row[1], line, 2));
    }
    return out;
}

void save_quartile_reports_csv(const std::string& path,
                               const std::vector<QuartileErrorReport>& reports,
                               const ArtifactHeader& header) {
    std::ostringstream out;
    write_header(out, header);
    out << "estimator,metric,quartile,median,iqr,count,excluded,error\n";
    for (const auto& rep : reports) {
        for (int q = 0; q < 4; ++q) {
            const auto& st = rep.quartiles[static_cast<std::size_t>(q)];
            out << rep.estimator << "," << rep.metric << "," << (q + 1) << ","
                << format_double(st.median) << "," << format_double(st.iqr) << "," << st.count
                << "," << rep.excluded << "," << rep.error << "\n";
        }
    }
    write_file(path, out.str());
}

void save_quartile_reports_json(const std::string& path,
                                const std::vector<QuartileErrorReport>& reports,
                                const ArtifactHeader& header) {
    json j = header_json(header);
    json arr = json::array();
    for (const auto& rep : reports) {
        json rj;
        rj["estimator"] = rep.estimator;
        rj["metric"] = rep.metric;
        rj["excluded"] = rep.excluded;
        if (!rep.error.empty()) rj["error"] = rep.error;
        json quartiles = json::array();
        for (const auto& st : rep.quartiles)
            quartiles.push_back({{"median", st.median}, {"iqr", st.iqr}, {"count", st.count}});
        rj["quartiles"] = std::move(quartiles);
        arr.push_back(std::move(rj));
    }
    j["reports"] = std::move(arr);
    write_file(path, j.dump(2) + "\n");
}

}  // namespace firenet::io
