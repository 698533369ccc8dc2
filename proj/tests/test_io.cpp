#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "firenet/core.hpp"
#include "firenet/ensembles.hpp"
#include "firenet/io.hpp"
#include "firenet/sampling.hpp"

using namespace firenet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("firenet_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace

TEST_CASE("holdings round-trip is lossless") {
    TempDir dir;
    Matrix m(2, 3);
    m << 100.25, 0.0, 33.125, 7.75, 19.0, 0.0625;
    HoldingsMatrix x(m, {"alpha", "beta"}, {"cash", "bonds", "loans"});
    Vector sizes = row_sums(m), eq(2);
    eq << 13.5, 2.625;
    BankSheet sheet(sizes, eq);

    io::save_holdings(dir.file("h.csv"), x, sheet);
    auto loaded = io::load_holdings(dir.file("h.csv"));
    CHECK((loaded.matrix.entries().array() == m.array()).all());
    CHECK(loaded.matrix.bank_ids() == x.bank_ids());
    CHECK(loaded.matrix.asset_ids() == x.asset_ids());
    CHECK((loaded.sheet.equities.array() == eq.array()).all());
    CHECK(loaded.warnings.empty());

    // a second save of the loaded data is byte-identical
    io::save_holdings(dir.file("h2.csv"), loaded.matrix, loaded.sheet);
    CHECK(io::read_file(dir.file("h.csv")) == io::read_file(dir.file("h2.csv")));
}

TEST_CASE("irrational values survive the 17-digit round-trip") {
    TempDir dir;
    Matrix m(1, 2);
    m << 1.0 / 3.0, 2.0 / 7.0;
    HoldingsMatrix x(m, {"b"}, {"a1", "a2"});
    Vector sizes = row_sums(m), eq(1);
    eq << 0.1;
    io::save_holdings(dir.file("h.csv"), x, BankSheet(sizes, eq));
    auto loaded = io::load_holdings(dir.file("h.csv"));
    CHECK(loaded.matrix.entries()(0, 0) == m(0, 0));
    CHECK(loaded.matrix.entries()(0, 1) == m(0, 1));
    CHECK(loaded.sheet.equities[0] == 0.1);
}

TEST_CASE("negative holdings are reported with the offending cell") {
    TempDir dir;
    write(dir.file("bad.csv"),
          "bank_id,equity,a1,a2\n"
          "b1,5,10,20\n"
          "b2,5,-3,20\n");
    try {
        io::load_holdings(dir.file("bad.csv"));
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        REQUIRE(e.violations().size() == 1);
        CHECK(e.violations()[0].find("b2") != std::string::npos);
        CHECK(e.violations()[0].find("a1") != std::string::npos);
        CHECK(e.violations()[0].find("line 3") != std::string::npos);
    }
}

TEST_CASE("all violations are collected, not just the first") {
    TempDir dir;
    write(dir.file("bad.csv"),
          "bank_id,equity,a1\n"
          "b1,0,10\n"
          "b2,5,-1\n");
    try {
        io::load_holdings(dir.file("bad.csv"));
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.violations().size() == 2);
    }
}

TEST_CASE("malformed numbers carry line and column") {
    TempDir dir;
    write(dir.file("bad.csv"),
          "bank_id,equity,a1\n"
          "b1,5,abc\n");
    try {
        io::load_holdings(dir.file("bad.csv"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 3);
    }
}

TEST_CASE("declared sizes that disagree with row sums warn") {
    TempDir dir;
    write(dir.file("h.csv"),
          "bank_id,equity,size,a1,a2\n"
          "b1,5,31,10,20\n"
          "b2,5,40,20,20\n");
    auto loaded = io::load_holdings(dir.file("h.csv"));
    REQUIRE(loaded.warnings.size() == 1);
    CHECK(loaded.warnings[0].find("b1") != std::string::npos);
    // row sums win
    CHECK(loaded.sheet.sizes[0] == 30.0);
}

TEST_CASE("banks and assets files parse with optional degree columns") {
    TempDir dir;
    write(dir.file("banks.csv"),
          "bank_id,size,equity,degree\n"
          "b1,30,3,2\n"
          "b2,10,1,1\n");
    write(dir.file("assets.csv"),
          "asset_id,cap,degree\n"
          "cash,25,2\n"
          "bonds,15,1\n");
    auto banks = io::load_banks_csv(dir.file("banks.csv"));
    auto assets = io::load_assets_csv(dir.file("assets.csv"));
    REQUIRE(banks.degrees.has_value());
    REQUIRE(assets.degrees.has_value());
    CHECK(banks.sizes[0] == 30.0);
    CHECK((*banks.degrees)[1] == 1);
    CHECK(assets.caps[1] == 15.0);
    CHECK(assets.ids[0] == "cash");
}

TEST_CASE("market overrides apply on top of defaults") {
    TempDir dir;
    write(dir.file("market.csv"),
          "asset_id,illiquidity,shock\n"
          "bonds,5e-10,0.02\n");
    auto mkt = io::build_market_params({"cash", "bonds", "loans"}, dir.file("market.csv"), "cash",
                                       1e-10, 0.01);
    CHECK(mkt.illiquidity[0] == 0.0);
    CHECK(mkt.illiquidity[1] == 5e-10);
    CHECK(mkt.illiquidity[2] == 1e-10);
    CHECK(mkt.shock[1] == 0.02);
    CHECK(mkt.shock[2] == 0.01);

    CHECK_THROWS_AS(
        io::build_market_params({"cash"}, dir.file("market.csv"), "cash", 1e-10, 0.01),
        ValidationError);
}

TEST_CASE("sample batch artifact round-trips with its header") {
    TempDir dir;
    Vector a(3), c(2);
    a << 30, 14, 6;
    c << 28, 22;
    StrengthSequences s(a, c);
    auto p = fit_mecapm(s);
    BankSheet sheet(s.bank_sizes, s.bank_sizes * 0.1);
    MarketParams mkt(Vector::Constant(2, 1e-10), Vector::Constant(2, 0.01));
    SampleBatch batch = mc_metrics(p, sheet, mkt, 25, 999);

    io::ArtifactHeader header;
    header.config_hash_value = io::config_hash("test");
    io::save_batch_csv(dir.file("batch.csv"), batch, {"b1", "b2", "b3"}, header);
    auto loaded = io::load_batch_csv(dir.file("batch.csv"));
    CHECK(loaded.batch.seed == 999);
    CHECK(loaded.batch.n_samples == 25);
    CHECK(loaded.batch.ensemble_hash == batch.ensemble_hash);
    CHECK(loaded.bank_ids == std::vector<std::string>{"b1", "b2", "b3"});
    CHECK((loaded.batch.systemicness_draws.array() == batch.systemicness_draws.array()).all());
    CHECK((loaded.batch.av_draws.array() == batch.av_draws.array()).all());
}

TEST_CASE("band artifact round-trips") {
    TempDir dir;
    QuantileBand band;
    band.lower_prob = 0.05;
    band.upper_prob = 0.95;
    band.lower = Vector::Constant(2, 1.5);
    band.upper = Vector::Constant(2, 7.25);
    band.point_estimate = Vector::Constant(2, 4.0);
    io::ArtifactHeader header;
    io::save_band_csv(dir.file("band.csv"), band, MetricKind::Systemicness, {"b1", "b2"}, header);
    auto loaded = io::load_band_csv(dir.file("band.csv"));
    CHECK(loaded.metric == MetricKind::Systemicness);
    CHECK(loaded.band.lower_prob == 0.05);
    CHECK((loaded.band.lower.array() == band.lower.array()).all());
    CHECK((loaded.band.upper.array() == band.upper.array()).all());
    CHECK(loaded.bank_ids == std::vector<std::string>{"b1", "b2"});
}

TEST_CASE("observed series and monitor artifacts") {
    TempDir dir;
    write(dir.file("obs.csv"),
          "quarter,value\n"
          "2001Q1,0.5\n"
          "2001Q2,0.9\n");
    auto series = io::load_observed_csv(dir.file("obs.csv"));
    REQUIRE(series.values.size() == 2);
    CHECK(series.quarters[1] == "2001Q2");
    CHECK(series.values[1] == 0.9);

    MonitorResult result;
    result.bank_id = "b1";
    result.reference_quarter = "2001Q1";
    result.comparisons = 2;
    result.records = {{"2001Q1", 0.5, 0.8, 0.1, 0.8, false}, {"2001Q2", 0.9, 0.8, 0.1, 0.85, true}};
    io::ArtifactHeader header;
    io::save_monitor_csv(dir.file("mon.csv"), result, header);
    std::string content = io::read_file(dir.file("mon.csv"));
    CHECK(content.find("2001Q2,0.90000000000000002,0.80000000000000004") != std::string::npos);
    CHECK(content.find(",1\n") != std::string::npos);
    CHECK(content.find("# reference_quarter=2001Q1") != std::string::npos);
}

TEST_CASE("matrix csv round-trip") {
    TempDir dir;
    Matrix m(2, 2);
    m << 1.5, 1.5, 0.5, 0.5;
    HoldingsMatrix x(m, {"b1", "b2"}, {"a1", "a2"});
    io::save_matrix_csv(dir.file("m.csv"), x);
    auto loaded = io::load_matrix_csv(dir.file("m.csv"));
    CHECK((loaded.entries().array() == m.array()).all());
    CHECK(loaded.asset_ids() == x.asset_ids());
}

TEST_CASE("format_double survives a strtod round-trip") {
    for (double v : {0.1, 1.0 / 3.0, 9.000000000000001e-9, 1e-300, 123456789.123456789}) {
        std::string text = io::format_double(v);
        CHECK(std::strtod(text.c_str(), nullptr) == v);
    }
}

TEST_CASE("scalar AV band uses the reserved av id") {
    TempDir dir;
    QuantileBand band;
    band.lower_prob = 0.05;
    band.upper_prob = 0.95;
    band.lower = Vector::Constant(1, 2.0);
    band.upper = Vector::Constant(1, 6.0);
    band.point_estimate = Vector::Constant(1, 4.0);
    io::save_band_csv(dir.file("av.csv"), band, MetricKind::AggregateVulnerability, {}, {});
    auto loaded = io::load_band_csv(dir.file("av.csv"));
    CHECK(loaded.metric == MetricKind::AggregateVulnerability);
    CHECK(loaded.bank_ids == std::vector<std::string>{"av"});
    CHECK(loaded.band.upper[0] == 6.0);
}
