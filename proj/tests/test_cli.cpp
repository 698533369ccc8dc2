#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "firenet/commands.hpp"
#include "firenet/core.hpp"
#include "firenet/io.hpp"

using firenet::run_command;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("firenet_cli_test_" + std::to_string(::getpid()) + "_" +
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

TEST_CASE("metrics on the single-bank fixture reports AV = 9e-9") {
    TempDir dir;
    write(dir.file("h.csv"),
          "bank_id,equity,securities\n"
          "solo,10,100\n");
    int rc = run_command({"metrics", "--holdings", dir.file("h.csv"), "--out-json",
                          dir.file("report.json")});
    REQUIRE(rc == 0);
    json j = json::parse(firenet::io::read_file(dir.file("report.json")));
    CHECK(j["aggregate_vulnerability"].get<double>() == doctest::Approx(9e-9).epsilon(1e-12));
    CHECK(j["systemicness"][0].get<double>() == doctest::Approx(9e-9).epsilon(1e-12));
    CHECK(j.contains("config_hash"));
    CHECK(j["tool_version"] == firenet::io::kToolVersion);
}

TEST_CASE("reconstruct capm writes the expected matrix csv") {
    TempDir dir;
    write(dir.file("banks.csv"),
          "bank_id,size,equity\n"
          "b1,3,0.3\n"
          "b2,1,0.1\n");
    write(dir.file("assets.csv"),
          "asset_id,cap\n"
          "a1,2\n"
          "a2,2\n");
    int rc = run_command({"reconstruct", "--method", "capm", "--banks", dir.file("banks.csv"),
                          "--assets", dir.file("assets.csv"), "--out", dir.file("m.csv")});
    REQUIRE(rc == 0);
    auto m = firenet::io::load_matrix_csv(dir.file("m.csv"));
    CHECK(m.entries()(0, 0) == 1.5);
    CHECK(m.entries()(0, 1) == 1.5);
    CHECK(m.entries()(1, 0) == 0.5);
    CHECK(m.entries()(1, 1) == 0.5);
    CHECK(m.bank_ids()[0] == "b1");
}

TEST_CASE("reconstruct cross-entropy honors a support mask") {
    TempDir dir;
    write(dir.file("banks.csv"),
          "bank_id,size,equity\n"
          "b1,1,0.1\n"
          "b2,1,0.1\n");
    write(dir.file("assets.csv"),
          "asset_id,cap\n"
          "a1,1\n"
          "a2,1\n");
    write(dir.file("prior.csv"),
          "bank_id,a1,a2\n"
          "b1,1,1\n"
          "b2,1,1\n");
    write(dir.file("mask.csv"),
          "bank_id,a1,a2\n"
          "b1,0,1\n"
          "b2,1,1\n");
    int rc = run_command({"reconstruct", "--method", "cross-entropy", "--banks",
                          dir.file("banks.csv"), "--assets", dir.file("assets.csv"), "--prior",
                          dir.file("prior.csv"), "--mask", dir.file("mask.csv"), "--out",
                          dir.file("m.csv")});
    REQUIRE(rc == 0);
    auto m = firenet::io::load_matrix_csv(dir.file("m.csv"));
    CHECK(m.entries()(0, 0) == 0.0);
    CHECK(m.entries()(0, 1) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.entries()(1, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("errors surface as nonzero exits") {
    TempDir dir;
    write(dir.file("bad.csv"),
          "bank_id,equity,a1\n"
          "b1,-5,10\n");
    CHECK(run_command({"metrics", "--holdings", dir.file("bad.csv")}) == 2);
    CHECK(run_command({"metrics", "--holdings", dir.file("missing.csv")}) == 2);
    CHECK(run_command({"nonsense"}) == 64);
}

TEST_CASE("full pipeline is byte-reproducible under a fixed seed") {
    TempDir dir;
    auto run_pipeline = [&](const std::string& tag) {
        fs::path out = dir.path / tag;
        fs::create_directories(out);
        auto p = [&](const std::string& name) { return (out / name).string(); };
        REQUIRE(run_command({"synth", "--n", "12", "--k", "5", "--sparsity", "0.4", "--seed",
                             "21", "--out-dir", out.string()}) == 0);

        // derive strengths files from the holdings for fit/sample
        auto loaded = firenet::io::load_holdings(p("holdings.csv"));
        std::ofstream banks(p("banks.csv"));
        banks << "bank_id,size,equity\n";
        for (Eigen::Index n = 0; n < loaded.matrix.n_banks(); ++n)
            banks << loaded.matrix.bank_ids()[static_cast<std::size_t>(n)] << ","
                  << firenet::io::format_double(loaded.sheet.sizes[n]) << ","
                  << firenet::io::format_double(loaded.sheet.equities[n]) << "\n";
        banks.close();
        std::ofstream assets(p("assets.csv"));
        assets << "asset_id,cap\n";
        auto caps = firenet::col_sums(loaded.matrix.entries());
        for (Eigen::Index k = 0; k < loaded.matrix.n_assets(); ++k)
            assets << loaded.matrix.asset_ids()[static_cast<std::size_t>(k)] << ","
                   << firenet::io::format_double(caps[k]) << "\n";
        assets.close();

        REQUIRE(run_command({"fit", "--ensemble", "mecapm", "--holdings", p("holdings.csv"),
                             "--out", p("params.json")}) == 0);
        REQUIRE(run_command({"sample", "--params", p("params.json"), "--banks", p("banks.csv"),
                             "--assets", p("assets.csv"), "--m", "200", "--seed", "21", "--out",
                             p("batch.csv")}) == 0);
        REQUIRE(run_command({"bands", "--batch", p("batch.csv"), "--metric", "systemicness",
                             "--out", p("band.csv")}) == 0);

        // observed series: the per-draw systemicness of bank_001 from a
        // fresh small batch
        REQUIRE(run_command({"sample", "--params", p("params.json"), "--banks", p("banks.csv"),
                             "--assets", p("assets.csv"), "--m", "30", "--seed", "22", "--out",
                             p("batch2.csv")}) == 0);
        auto batch2 = firenet::io::load_batch_csv(p("batch2.csv"));
        std::ofstream obs(p("obs.csv"));
        obs << "quarter,value\n";
        for (int t = 0; t < 8; ++t)
            obs << "q" << t << ","
                << firenet::io::format_double(batch2.batch.systemicness_draws(t, 0)) << "\n";
        obs.close();
        std::vector<std::string> args = {"monitor", "--observed", p("obs.csv"),  "--ref-band",
                                         p("band.csv"), "--bank-id", "bank_001", "--out",
                                         p("monitor.csv"), "--bands"};
        for (int t = 0; t < 8; ++t) args.push_back(p("band.csv"));
        REQUIRE(run_command(args) == 0);
        return out;
    };

    fs::path a = run_pipeline("a");
    fs::path b = run_pipeline("b");
    for (const char* name : {"holdings.csv", "params.json", "batch.csv", "band.csv",
                             "monitor.csv", "meta.json"}) {
        CAPTURE(name);
        CHECK(firenet::io::read_file((a / name).string()) ==
              firenet::io::read_file((b / name).string()));
    }
}

TEST_CASE("evaluate writes quartile reports") {
    TempDir dir;
    REQUIRE(run_command({"synth", "--n", "16", "--k", "5", "--sparsity", "0.3", "--seed", "4",
                         "--out-dir", dir.path.string()}) == 0);
    int rc = run_command({"evaluate", "--holdings", dir.file("holdings.csv"), "--estimators",
                          "capm,mecapm", "--m", "50", "--seed", "4", "--out-json",
                          dir.file("reports.json"), "--out-csv", dir.file("reports.csv")});
    REQUIRE(rc == 0);
    json j = json::parse(firenet::io::read_file(dir.file("reports.json")));
    REQUIRE(j["reports"].size() == 4);
    for (const auto& rep : j["reports"]) {
        CHECK(rep["quartiles"].size() == 4);
        CHECK_FALSE(rep.contains("error"));
    }
    std::string csv = firenet::io::read_file(dir.file("reports.csv"));
    CHECK(csv.find("estimator,metric,quartile,median,iqr,count,excluded,error") !=
          std::string::npos);
}

TEST_CASE("fit bipecm from strengths files with degree columns") {
    TempDir dir;
    write(dir.file("banks.csv"),
          "bank_id,size,equity,degree\n"
          "b1,10,1,2\n"
          "b2,3,0.3,1\n"
          "b3,2,0.2,1\n");
    write(dir.file("assets.csv"),
          "asset_id,cap,degree\n"
          "a1,9,2\n"
          "a2,6,2\n");
    int rc = run_command({"fit", "--ensemble", "bipecm", "--banks", dir.file("banks.csv"),
                          "--assets", dir.file("assets.csv"), "--out", dir.file("p.json")});
    REQUIRE(rc == 0);
    json j = json::parse(firenet::io::read_file(dir.file("p.json")));
    CHECK(j["kind"] == "bipecm");
    CHECK(j["row_forced"][0] == true);
    CHECK(j["fit_residual"].get<double>() <= 1e-6);
}

TEST_CASE("metrics can join a confidence band by bank id") {
    TempDir dir;
    write(dir.file("h.csv"),
          "bank_id,equity,securities\n"
          "solo,10,100\n");
    write(dir.file("band.csv"),
          "# firenet 0.1.0\n"
          "# config_hash=none\n"
          "# metric=systemicness\n"
          "# lower_prob=0.050000000000000003\n"
          "# upper_prob=0.94999999999999996\n"
          "bank_id,lower,mean,upper\n"
          "solo,1e-9,9e-9,2e-8\n");
    int rc = run_command({"metrics", "--holdings", dir.file("h.csv"), "--band",
                          dir.file("band.csv"), "--out-json", dir.file("r.json")});
    REQUIRE(rc == 0);
    json j = json::parse(firenet::io::read_file(dir.file("r.json")));
    CHECK(j["band_lower"][0].get<double>() == 1e-9);
    CHECK(j["band_upper"][0].get<double>() == 2e-8);
}
