#include "firenet/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "firenet/core.hpp"
#include "firenet/ensembles.hpp"
#include "firenet/evaluation.hpp"
#include "firenet/io.hpp"
#include "firenet/monitoring.hpp"
#include "firenet/reconstruct.hpp"
#include "firenet/riskmetrics.hpp"
#include "firenet/sampling.hpp"

namespace firenet {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Canonical parameter string hashed into every artifact header.
struct ConfigTrace {
    std::string text;
    void add(const std::string& key, const std::string& value) {
        text += key + "=" + value + ";";
    }
    void add(const std::string& key, double value) { add(key, io::format_double(value)); }
    void add(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }
    void add(const std::string& key, int value) { add(key, std::to_string(value)); }
    io::ArtifactHeader header(std::optional<std::uint64_t> seed = std::nullopt) const {
        io::ArtifactHeader h;
        h.config_hash_value = io::config_hash(text);
        h.seed = seed;
        return h;
    }
};

struct MarketOptions {
    std::string cash_asset = "cash";
    double ell = 1e-10;
    double eps = 0.01;
    std::string market_csv;

    void attach(CLI::App* cmd) {
        cmd->add_option("--cash-asset", cash_asset, "Asset id treated as cash (illiquidity 0)");
        cmd->add_option("--ell", ell, "Illiquidity for non-cash assets");
        cmd->add_option("--eps", eps, "Uniform shock");
        cmd->add_option("--market", market_csv, "market.csv overrides (asset_id,illiquidity,shock)");
    }
    MarketParams build(const std::vector<std::string>& asset_ids) const {
        std::optional<std::string> path;
        if (!market_csv.empty()) path = market_csv;
        return io::build_market_params(asset_ids, path, cash_asset, ell, eps);
    }
    void trace(ConfigTrace& t) const {
        t.add("cash_asset", cash_asset);
        t.add("ell", ell);
        t.add("eps", eps);
    }
};

StrengthSequences strengths_from_files(const io::BanksFile& banks, const io::AssetsFile& assets) {
    return StrengthSequences(banks.sizes, assets.caps);
}

void echo_seed(std::uint64_t seed) { std::cout << "seed=" << seed << "\n"; }

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Fire-sale systemic-risk metrics and maximum-entropy network reconstruction"};
    app.require_subcommand(1);

    // --- metrics -------------------------------------------------------------
    auto* metrics_cmd = app.add_subcommand("metrics", "Risk metrics on an observed holdings file");
    std::string m_holdings, m_out_json, m_out_csv, m_band;
    bool m_keep_empty = false;
    MarketOptions m_mkt;
    metrics_cmd->add_option("--holdings", m_holdings, "holdings.csv")->required();
    metrics_cmd->add_option("--out-json", m_out_json, "RiskReport JSON path");
    metrics_cmd->add_option("--out-csv", m_out_csv, "RiskReport CSV path");
    metrics_cmd->add_option("--band", m_band, "band CSV joined into the report by bank id");
    metrics_cmd->add_flag("--keep-empty", m_keep_empty,
                          "Fail on zero-size banks instead of dropping them");
    m_mkt.attach(metrics_cmd);

    // --- reconstruct ----------------------------------------------------------
    auto* rec_cmd = app.add_subcommand("reconstruct", "CAPM or cross-entropy matrix reconstruction");
    std::string r_method = "capm", r_banks, r_assets, r_prior, r_mask, r_out;
    double r_tol = 1e-10;
    int r_max_iter = 10000;
    rec_cmd->add_option("--method", r_method, "capm | cross-entropy")
        ->check(CLI::IsMember({"capm", "cross-entropy"}));
    rec_cmd->add_option("--banks", r_banks, "banks.csv (bank_id,size,equity)")->required();
    rec_cmd->add_option("--assets", r_assets, "assets.csv (asset_id,cap)")->required();
    rec_cmd->add_option("--prior", r_prior, "prior matrix CSV (cross-entropy)");
    rec_cmd->add_option("--mask", r_mask, "support mask CSV, 0 = forbidden (cross-entropy)");
    rec_cmd->add_option("--tol", r_tol, "marginal residual tolerance");
    rec_cmd->add_option("--max-iter", r_max_iter, "maximum scaling sweeps");
    rec_cmd->add_option("--out", r_out, "output matrix CSV")->required();

    // --- fit -------------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "Fit a maximum-entropy ensemble");
    std::string f_kind, f_holdings, f_banks, f_assets, f_out;
    double f_tol = 0.0;
    int f_max_iter = 100000;
    fit_cmd->add_option("--ensemble", f_kind, "mecapm | bipwcm | bipecm")
        ->required()
        ->check(CLI::IsMember({"mecapm", "bipwcm", "bipecm"}));
    fit_cmd->add_option("--holdings", f_holdings, "holdings.csv (strengths/degrees derived)");
    fit_cmd->add_option("--banks", f_banks, "banks.csv (bank_id,size,equity[,degree])");
    fit_cmd->add_option("--assets", f_assets, "assets.csv (asset_id,cap[,degree])");
    fit_cmd->add_option("--tol", f_tol, "fit residual tolerance (0 = kind default)");
    fit_cmd->add_option("--max-iter", f_max_iter, "maximum solver sweeps");
    double f_degree_threshold = 0.0;
    fit_cmd->add_option("--degree-threshold", f_degree_threshold,
                        "holdings above this value count as edges (bipecm via --holdings)");
    fit_cmd->add_option("--out", f_out, "output params JSON")->required();

    // --- sample -----------------------------------------------------------------
    auto* sample_cmd = app.add_subcommand("sample", "Monte-Carlo metric draws from fitted params");
    std::string s_params, s_banks, s_assets, s_out;
    int s_m = 1000;
    std::uint64_t s_seed = 0;
    MarketOptions s_mkt;
    sample_cmd->add_option("--params", s_params, "fitted params JSON")->required();
    sample_cmd->add_option("--banks", s_banks, "banks.csv supplying equities")->required();
    sample_cmd->add_option("--assets", s_assets, "assets.csv supplying asset ids")->required();
    sample_cmd->add_option("--m", s_m, "number of samples");
    sample_cmd->add_option("--seed", s_seed, "RNG seed (echoed; default 0)");
    sample_cmd->add_option("--out", s_out, "output batch CSV")->required();
    s_mkt.attach(sample_cmd);

    // --- bands ----------------------------------------------------------------
    auto* bands_cmd = app.add_subcommand("bands", "Quantile band of a sample batch");
    std::string b_batch, b_metric = "systemicness", b_out;
    double b_lower = 0.05, b_upper = 0.95;
    bands_cmd->add_option("--batch", b_batch, "batch CSV")->required();
    bands_cmd->add_option("--metric", b_metric, "systemicness | iv | av");
    bands_cmd->add_option("--lower", b_lower, "lower probability");
    bands_cmd->add_option("--upper", b_upper, "upper probability");
    bands_cmd->add_option("--out", b_out, "output band CSV")->required();

    // --- monitor ---------------------------------------------------------------
    auto* mon_cmd = app.add_subcommand("monitor", "Flag quarters above a reference band");
    std::string mo_observed, mo_ref, mo_bank, mo_out;
    std::vector<std::string> mo_bands;
    mon_cmd->add_option("--observed", mo_observed, "observed.csv (quarter,value)")->required();
    mon_cmd->add_option("--ref-band", mo_ref, "reference band CSV")->required();
    mon_cmd->add_option("--bands", mo_bands, "per-quarter band CSVs, in quarter order")
        ->required()
        ->expected(-1);
    mon_cmd->add_option("--bank-id", mo_bank, "bank id inside the bands")->required();
    mon_cmd->add_option("--out", mo_out, "output monitor CSV")->required();

    // --- evaluate ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("evaluate", "Estimator comparison on a scenario");
    std::string e_holdings, e_out_csv, e_out_json;
    std::vector<std::string> e_estimators = {"capm", "mecapm", "bipwcm", "bipecm"};
    int e_m = 1000;
    std::uint64_t e_seed = 0;
    eval_cmd->add_option("--holdings", e_holdings, "scenario holdings.csv")->required();
    eval_cmd->add_option("--estimators", e_estimators, "subset of capm,mecapm,bipwcm,bipecm")
        ->delimiter(',');
    eval_cmd->add_option("--m", e_m, "samples per MC estimator");
    eval_cmd->add_option("--seed", e_seed, "RNG seed (echoed; default 0)");
    eval_cmd->add_option("--out-csv", e_out_csv, "QuartileErrorReport CSV");
    eval_cmd->add_option("--out-json", e_out_json, "QuartileErrorReport JSON");

    // --- synth ------------------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario");
    ScenarioConfig sc;
    std::string sy_out_dir;
    bool sy_no_cash = false;
    std::uint64_t sy_seed = 0;
    synth_cmd->add_option("--n", sc.n_banks, "banks")->required();
    synth_cmd->add_option("--k", sc.n_assets, "assets")->required();
    synth_cmd->add_option("--sparsity", sc.sparsity, "target zero fraction");
    synth_cmd->add_option("--seed", sy_seed, "RNG seed (echoed; default 0)");
    synth_cmd->add_option("--size-log-mean", sc.size_log_mean, "ln median bank size");
    synth_cmd->add_option("--size-log-sd", sc.size_log_sd, "log-size standard deviation");
    synth_cmd->add_option("--leverage", sc.target_leverage, "target leverage");
    synth_cmd->add_option("--leverage-sd", sc.leverage_sd, "leverage spread");
    synth_cmd->add_flag("--no-cash", sy_no_cash, "omit the cash column");
    synth_cmd->add_option("--out-dir", sy_out_dir, "output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 64;
    }

    if (metrics_cmd->parsed()) {
        ConfigTrace trace;
        trace.add("cmd", std::string("metrics"));
        trace.add("keep_empty", m_keep_empty ? 1 : 0);
        m_mkt.trace(trace);
        io::LoadedHoldings loaded = io::load_holdings(m_holdings);
        for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
        MarketParams mkt = m_mkt.build(loaded.matrix.asset_ids());
        RiskReport report = compute_risk_report(loaded.matrix, loaded.sheet, mkt, !m_keep_empty);
        for (const auto& note : report.notes) std::cerr << "warning: " << note << "\n";
        if (!m_band.empty()) {
            io::LoadedBand band = io::load_band_csv(m_band);
            Vector lower(report.bank_ids.size()), upper(report.bank_ids.size());
            for (std::size_t i = 0; i < report.bank_ids.size(); ++i) {
                auto it = std::find(band.bank_ids.begin(), band.bank_ids.end(),
                                    report.bank_ids[i]);
                if (it == band.bank_ids.end())
                    throw ValidationError("band artifact lacks bank '" + report.bank_ids[i] + "'");
                auto idx = static_cast<Eigen::Index>(it - band.bank_ids.begin());
                lower[static_cast<Eigen::Index>(i)] = band.band.lower[idx];
                upper[static_cast<Eigen::Index>(i)] = band.band.upper[idx];
            }
            report.band_lower = std::move(lower);
            report.band_upper = std::move(upper);
        }
        auto header = trace.header();
        if (!m_out_json.empty()) io::save_risk_report_json(m_out_json, report, header);
        if (!m_out_csv.empty()) io::save_risk_report_csv(m_out_csv, report, header);
        std::cout << "av=" << io::format_double(report.aggregate_vulnerability) << "\n";
        return 0;
    }

    if (rec_cmd->parsed()) {
        ConfigTrace trace;
        trace.add("cmd", std::string("reconstruct"));
        trace.add("method", r_method);
        trace.add("tol", r_tol);
        trace.add("max_iter", r_max_iter);
        io::BanksFile banks = io::load_banks_csv(r_banks);
        io::AssetsFile assets = io::load_assets_csv(r_assets);
        StrengthSequences s = strengths_from_files(banks, assets);
        HoldingsMatrix result = [&] {
            if (r_method == "capm") return capm_matrix(s, banks.ids, assets.ids);
            HoldingsMatrix prior = r_prior.empty() ? capm_matrix(s, banks.ids, assets.ids)
                                                   : io::load_matrix_csv(r_prior);
            SupportMask mask = SupportMask::full(prior.n_banks(), prior.n_assets());
            if (!r_mask.empty()) {
                HoldingsMatrix mask_matrix = io::load_matrix_csv(r_mask);
                if (mask_matrix.n_banks() != prior.n_banks() ||
                    mask_matrix.n_assets() != prior.n_assets())
                    throw ValidationError("mask dimensions do not match the prior");
                for (Eigen::Index n = 0; n < prior.n_banks(); ++n)
                    for (Eigen::Index k = 0; k < prior.n_assets(); ++k)
                        mask.allowed(n, k) = mask_matrix.entries()(n, k) != 0.0;
            }
            CrossEntropyOptions opts;
            opts.tol = r_tol;
            opts.max_iter = r_max_iter;
            CrossEntropyResult res = cross_entropy_min(prior, s, mask, opts);
            std::cerr << "converged in " << res.iterations << " sweeps, residual "
                      << io::format_double(res.residual) << "\n";
            return HoldingsMatrix(res.matrix.entries(), banks.ids, assets.ids);
        }();
        io::save_matrix_csv(r_out, result, trace.header());
        return 0;
    }

    if (fit_cmd->parsed()) {
        ConfigTrace trace;
        trace.add("cmd", std::string("fit"));
        trace.add("ensemble", f_kind);
        trace.add("tol", f_tol);
        trace.add("max_iter", f_max_iter);
        EnsembleKind kind = ensemble_kind_from_string(f_kind);
        StrengthSequences s = [&]() -> StrengthSequences {
            if (!f_holdings.empty()) return marginals(io::load_holdings(f_holdings).matrix);
            if (f_banks.empty() || f_assets.empty())
                throw ValidationError("fit needs --holdings or both --banks and --assets");
            return strengths_from_files(io::load_banks_csv(f_banks), io::load_assets_csv(f_assets));
        }();
        trace.add("degree_threshold", f_degree_threshold);
        std::optional<DegreeSequences> d;
        if (kind == EnsembleKind::BIPECM) {
            if (!f_holdings.empty()) {
                d = degrees(io::load_holdings(f_holdings).matrix, f_degree_threshold);
            } else {
                io::BanksFile banks = io::load_banks_csv(f_banks);
                io::AssetsFile assets = io::load_assets_csv(f_assets);
                if (!banks.degrees || !assets.degrees)
                    throw ValidationError(
                        "bipecm needs degree columns in banks.csv and assets.csv");
                d.emplace(*banks.degrees, *assets.degrees);
            }
        }
        FitOptions opts;
        opts.tol = f_tol;
        opts.max_iter = f_max_iter;
        EnsembleParams p = fit_ensemble(kind, s, d, opts);
        json j = json::parse(params_to_json(p));
        j["tool_version"] = io::kToolVersion;
        j["config_hash"] = io::config_hash(trace.text);
        io::write_file(f_out, j.dump(2) + "\n");
        std::cerr << "fit residual " << io::format_double(p.fit_residual) << " after "
                  << p.sweeps << " sweeps\n";
        if (p.clip_events > 0)
            std::cerr << "warning: multiplier products clipped below 1 in " << p.clip_events
                      << " sweep(s)\n";
        return 0;
    }

    if (sample_cmd->parsed()) {
        ConfigTrace trace;
        trace.add("cmd", std::string("sample"));
        trace.add("m", s_m);
        trace.add("seed", s_seed);
        s_mkt.trace(trace);
        echo_seed(s_seed);
        EnsembleParams p = params_from_json(io::read_file(s_params));
        io::BanksFile banks = io::load_banks_csv(s_banks);
        io::AssetsFile assets = io::load_assets_csv(s_assets);
        if (static_cast<Eigen::Index>(banks.ids.size()) != p.n_banks())
            throw ValidationError("banks.csv does not cover the fitted ensemble");
        if (static_cast<Eigen::Index>(assets.ids.size()) != p.n_assets())
            throw ValidationError("assets.csv does not cover the fitted ensemble");
        BankSheet sheet(banks.sizes, banks.equities);
        MarketParams mkt = s_mkt.build(assets.ids);
        SampleBatch batch = mc_metrics(p, sheet, mkt, s_m, s_seed);
        io::save_batch_csv(s_out, batch, banks.ids, trace.header(s_seed));
        return 0;
    }

    if (bands_cmd->parsed()) {
        ConfigTrace trace;
        trace.add("cmd", std::string("bands"));
        trace.add("metric", b_metric);
        trace.add("lower", b_lower);
        trace.add("upper", b_upper);
        io::LoadedBatch loaded = io::load_batch_csv(b_batch);
        MetricKind metric = metric_kind_from_string(b_metric);
        QuantileBand band = quantile_band(loaded.batch, metric, b_lower, b_upper);
        auto header = trace.header(loaded.batch.seed);
        header.extra.emplace_back("ensemble_hash", loaded.batch.ensemble_hash);
        io::save_band_csv(b_out, band, metric, loaded.bank_ids, header);
        return 0;
    }

    if (mon_cmd->parsed()) {
        ConfigTrace trace;
        trace.add("cmd", std::string("monitor"));
        trace.add("bank_id", mo_bank);
        io::ObservedSeries series = io::load_observed_csv(mo_observed);
        io::LoadedBand ref = io::load_band_csv(mo_ref);
        auto find_bank = [&](const io::LoadedBand& band) -> Eigen::Index {
            for (std::size_t i = 0; i < band.bank_ids.size(); ++i)
                if (band.bank_ids[i] == mo_bank) return static_cast<Eigen::Index>(i);
            throw IndexError("bank '" + mo_bank + "' not present in band artifact");
        };
        Eigen::Index bank = find_bank(ref);
        std::vector<QuantileBand> bands;
        for (const auto& path : mo_bands) {
            io::LoadedBand lb = io::load_band_csv(path);
            if (find_bank(lb) != bank)
                throw ValidationError("band artifacts disagree on bank ordering");
            bands.push_back(std::move(lb.band));
        }
        MonitorResult result = monitor_bank(series.values, ref.band, bands, bank, series.quarters,
                                            mo_bank);
        io::save_monitor_csv(mo_out, result, trace.header());
        int flags = 0;
        for (const auto& rec : result.records) flags += rec.flag ? 1 : 0;
        std::cout << "flags=" << flags << "/" << result.comparisons << "\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        ConfigTrace trace;
        trace.add("cmd", std::string("evaluate"));
        for (const auto& e : e_estimators) trace.add("estimator", e);
        trace.add("m", e_m);
        trace.add("seed", e_seed);
        echo_seed(e_seed);
        io::LoadedHoldings loaded = io::load_holdings(e_holdings);
        ScenarioConfig cfg;
        cfg.seed = e_seed;
        cfg.n_banks = static_cast<int>(loaded.matrix.n_banks());
        cfg.n_assets = static_cast<int>(loaded.matrix.n_assets());
        SyntheticScenario scenario{cfg, std::move(loaded.matrix), std::move(loaded.sheet)};
        std::vector<EstimatorKind> kinds;
        for (const auto& e : e_estimators) kinds.push_back(estimator_kind_from_string(e));
        auto reports = estimator_comparison(scenario, kinds, e_m, e_seed);
        auto header = trace.header(e_seed);
        if (!e_out_csv.empty()) io::save_quartile_reports_csv(e_out_csv, reports, header);
        if (!e_out_json.empty()) io::save_quartile_reports_json(e_out_json, reports, header);
        for (const auto& rep : reports)
            if (!rep.error.empty())
                std::cerr << "estimator " << rep.estimator << " failed: " << rep.error << "\n";
        return 0;
    }

    if (synth_cmd->parsed()) {
        sc.seed = sy_seed;
        sc.include_cash = !sy_no_cash;
        ConfigTrace trace;
        trace.add("cmd", std::string("synth"));
        trace.add("n", sc.n_banks);
        trace.add("k", sc.n_assets);
        trace.add("sparsity", sc.sparsity);
        trace.add("seed", sc.seed);
        trace.add("size_log_mean", sc.size_log_mean);
        trace.add("size_log_sd", sc.size_log_sd);
        trace.add("leverage", sc.target_leverage);
        trace.add("leverage_sd", sc.leverage_sd);
        trace.add("cash", sc.include_cash ? 1 : 0);
        echo_seed(sc.seed);
        SyntheticScenario scenario = generate_scenario(sc);
        fs::create_directories(sy_out_dir);
        io::save_holdings((fs::path(sy_out_dir) / "holdings.csv").string(), scenario.matrix,
                          scenario.sheet, trace.header(sc.seed));
        json meta;
        meta["tool_version"] = io::kToolVersion;
        meta["config_hash"] = io::config_hash(trace.text);
        meta["seed"] = sc.seed;
        meta["n_banks"] = sc.n_banks;
        meta["n_assets"] = sc.n_assets;
        meta["sparsity"] = sc.sparsity;
        meta["size_log_mean"] = sc.size_log_mean;
        meta["size_log_sd"] = sc.size_log_sd;
        meta["target_leverage"] = sc.target_leverage;
        meta["leverage_sd"] = sc.leverage_sd;
        meta["include_cash"] = sc.include_cash;
        io::write_file((fs::path(sy_out_dir) / "meta.json").string(), meta.dump(2) + "\n");
        return 0;
    }

    return 64;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    try {
        return dispatch(args);
    } catch (const ValidationError& e) {
        json j{{"error", e.code()}, {"message", e.what()}};
        if (!e.violations().empty()) j["violations"] = e.violations();
        std::cerr << j.dump() << "\n";
        return 2;
    } catch (const ParseError& e) {
        json j{{"error", e.code()}, {"message", e.what()}, {"line", e.line()},
               {"column", e.column()}};
        std::cerr << j.dump() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        json j{{"error", e.code()}, {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        return 3;
    } catch (const MaxIterExceeded& e) {
        json j{{"error", e.code()}, {"message", e.what()}, {"residual", e.last_residual()}};
        std::cerr << j.dump() << "\n";
        return 3;
    } catch (const InfeasibleSupportError& e) {
        json j{{"error", e.code()}, {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        return 4;
    } catch (const InfeasibleDegreesError& e) {
        json j{{"error", e.code()}, {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        return 4;
    } catch (const InfeasibleSparsityError& e) {
        json j{{"error", e.code()}, {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        return 4;
    } catch (const Error& e) {
        json j{{"error", e.code()}, {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json j{{"error", "internal"}, {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        return 70;
    }
}

}  // namespace firenet
