#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cra/sweep.hpp"
#include "oracles.hpp"

using namespace cra;

TEST_CASE("k grid construction") {
    KGrid g;
    g.count = 5;
    g.kmin = 0.5;
    g.kmax = 2.5;
    std::vector<double> pts = g.points();
    REQUIRE(pts.size() == 5);
    CHECK(pts.front() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pts.back() == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(pts[2] == doctest::Approx(1.5).epsilon(1e-15));

    KGrid def;  // zeros resolve to the interior band
    def.count = 3;
    std::vector<double> d = def.points();
    CHECK(d.front() == doctest::Approx(0.05 * oracle::kPi).epsilon(1e-15));
    CHECK(d.back() == doctest::Approx(0.95 * oracle::kPi).epsilon(1e-15));

    KGrid one;
    one.count = 1;
    one.kmin = one.kmax = 1.3;
    REQUIRE(one.points().size() == 1);
    CHECK(one.points()[0] == 1.3);

    KGrid bad;
    bad.count = 0;
    CHECK_THROWS_AS(bad.points(), ConfigError);
    bad.count = 4;
    bad.kmin = 2.0;
    bad.kmax = 1.0;
    CHECK_THROWS_AS(bad.points(), ConfigError);
}

TEST_CASE("presets resolve and pin the published parameter sets") {
    std::vector<std::string> names = preset_names();
    CHECK(names.size() == 7);
    for (const std::string& n : names) {
        RunConfig cfg = preset_config(n);
        CHECK(cfg.preset == n);
        CHECK(cfg.grid.count == 200);
        CHECK_FALSE(cfg.methods.empty());
    }

    RunConfig a = preset_config("fig3a");
    CHECK(a.model.Omega == 1.0);
    CHECK(a.model.lambda == 0.04);
    CHECK(a.model.xi == 0.04);
    CHECK(a.methods.size() == 4);

    RunConfig c = preset_config("fig5c");
    CHECK(c.model.lambda == 2.0);
    CHECK(c.model.xi == 0.04);
    CHECK(c.methods == std::vector<std::string>{"strong-coupling", "numeric-cp2"});

    CHECK_THROWS_AS(preset_config("fig9z"), ConfigError);
}

TEST_CASE("config files merge and reject unknown keys") {
    const std::string good = "/tmp/cra_cfg_good.json";
    {
        std::ofstream f(good);
        f << R"({"preset": "fig3b", "cp": 2, "k_grid": {"count": 7}, "format": "json"})";
    }
    RunConfig cfg;
    apply_config_file(cfg, good);
    CHECK(cfg.preset == "fig3b");
    CHECK(cfg.model.Omega == 0.4);
    CHECK(cfg.model.lambda == 1.0);
    CHECK(cfg.cp == 2);
    CHECK(cfg.grid.count == 7);
    CHECK(cfg.format == "json");
    std::remove(good.c_str());

    const std::string bad = "/tmp/cra_cfg_bad.json";
    {
        std::ofstream f(bad);
        f << R"({"omege": 1.0})";
    }
    RunConfig cfg2;
    CHECK_THROWS_AS(apply_config_file(cfg2, bad), ConfigError);
    std::remove(bad.c_str());

    RunConfig cfg3;
    CHECK_THROWS_AS(apply_config_file(cfg3, "/tmp/no_such_file_cra.json"), ConfigError);
}

TEST_CASE("sweep rows, CSV shape and determinism") {
    RunConfig cfg;
    cfg.model = oracle::fig3a();
    cfg.methods = {"order1", "rwa"};
    cfg.grid.count = 9;
    std::vector<SweepRow> rows = collect_sweep_rows(cfg);
    REQUIRE(rows.size() == 18);
    for (const SweepRow& r : rows) {
        CHECK(r.error.empty());
        CHECK(r.refl_prob == r.r.real() * r.r.real() + r.r.imag() * r.r.imag());
        CHECK(r.flux_residual < 1e-10);
    }
    CHECK(rows[0].method == "order1");
    CHECK(rows[9].method == "rwa");

    std::ostringstream a, b;
    write_rows_csv(rows, a);
    write_rows_csv(collect_sweep_rows(cfg), b);
    CHECK(a.str() == b.str());

    std::istringstream is(a.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "k,method,re_r,im_r,re_t,im_t,refl_prob,flux_residual,error");
    int lines = 0;
    for (std::string line; std::getline(is, line);) ++lines;
    CHECK(lines == 18);

    // failed points keep the column count: the error text is sanitized
    RunConfig edge = cfg;
    edge.methods = {"order1"};
    edge.grid.count = 2;
    edge.grid.kmin = 1e-5;
    edge.grid.kmax = 1.5;
    std::vector<SweepRow> erows = collect_sweep_rows(edge);
    REQUIRE(erows.size() == 2);
    CHECK_FALSE(erows[0].error.empty());
    CHECK(erows[0].error.find(',') == std::string::npos);
    std::ostringstream c;
    write_rows_csv(erows, c);
    std::istringstream cis(c.str());
    for (std::string line; std::getline(cis, line);)
        CHECK(std::count(line.begin(), line.end(), ',') == 8);
}

TEST_CASE("JSON rows round-trip") {
    RunConfig cfg;
    cfg.model = oracle::fig3b();
    cfg.methods = {"strong-coupling"};
    cfg.grid.count = 4;
    std::vector<SweepRow> rows = collect_sweep_rows(cfg);
    std::ostringstream os;
    write_rows_json(rows, os);
    nlohmann::json j = nlohmann::json::parse(os.str());
    REQUIRE(j.is_array());
    REQUIRE(j.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(j[i]["k"].get<double>() == rows[i].k);
        CHECK(j[i]["method"].get<std::string>() == rows[i].method);
        CHECK(j[i]["re_r"].get<double>() == rows[i].r.real());
        CHECK(j[i]["refl_prob"].get<double>() == rows[i].refl_prob);
    }
}

TEST_CASE("config validation failures") {
    RunConfig cfg;
    cfg.model = oracle::fig3a();
    cfg.methods = {"order7"};
    CHECK_THROWS_AS(collect_sweep_rows(cfg), ConfigError);
    cfg.methods = {"order1"};
    cfg.format = "xml";
    CHECK_THROWS_AS(collect_sweep_rows(cfg), ConfigError);
    cfg.format = "csv";
    cfg.cp = 4;
    CHECK_THROWS_AS(collect_sweep_rows(cfg), ConfigError);
    cfg.cp = 2;
    cfg.chain_length = 40;  // must be odd
    CHECK_THROWS_AS(collect_sweep_rows(cfg), ConfigError);
    cfg.chain_length = 3;  // too short
    CHECK_THROWS_AS(collect_sweep_rows(cfg), ConfigError);
}

TEST_CASE("output path respects the outdir environment variable") {
    unsetenv(kOutDirEnv);
    CHECK(resolve_out_path("rows.csv") == "rows.csv");
    setenv(kOutDirEnv, "/tmp/cra_outdir", 1);
    CHECK(resolve_out_path("rows.csv") == "/tmp/cra_outdir/rows.csv");
    CHECK(resolve_out_path("/abs/rows.csv") == "/abs/rows.csv");
    unsetenv(kOutDirEnv);
}

TEST_CASE("run_sweep writes the table, the sidecar and reports point failures") {
    RunConfig cfg;
    cfg.model = oracle::fig3a();
    cfg.methods = {"order1"};
    cfg.grid.count = 5;
    cfg.out = "/tmp/cra_sweep_rows.csv";
    std::ostringstream log;
    CHECK(run_sweep(cfg, log) == 0);

    std::ifstream f(cfg.out);
    REQUIRE(f.good());
    std::string header;
    std::getline(f, header);
    CHECK(header == "k,method,re_r,im_r,re_t,im_t,refl_prob,flux_residual,error");

    std::ifstream meta(cfg.out + ".meta.json");
    REQUIRE(meta.good());
    nlohmann::json j = nlohmann::json::parse(meta);
    CHECK(j["version"].get<std::string>() == kVersion);
    CHECK(j["rows"].get<int>() == 5);
    CHECK(j["failures"].get<int>() == 0);
    CHECK(j["config"]["methods"][0].get<std::string>() == "order1");
    std::remove(cfg.out.c_str());
    std::remove((cfg.out + ".meta.json").c_str());

    // a band-edge point fails without aborting the run
    RunConfig edge = cfg;
    edge.out = "/tmp/cra_sweep_edge.csv";
    edge.grid.count = 3;
    edge.grid.kmin = 1e-5;
    edge.grid.kmax = 1.0;
    std::ostringstream log2;
    CHECK(run_sweep(edge, log2) == 2);
    std::ifstream fe(edge.out);
    REQUIRE(fe.good());
    int failed = 0;
    for (std::string line; std::getline(fe, line);)
        if (line.find("band edge") != std::string::npos) ++failed;
    CHECK(failed == 1);
    std::remove(edge.out.c_str());
    std::remove((edge.out + ".meta.json").c_str());
}

TEST_CASE("validation gate passes clean and catches an injected fault") {
    RunConfig cfg;
    cfg.quick = true;
    std::ostringstream log;
    CHECK(run_validate(cfg, false, log) == 0);
    CHECK(log.str().find("FAIL") == std::string::npos);
    std::ostringstream log2;
    CHECK(run_validate(cfg, true, log2) == 3);
    CHECK(log2.str().find("FAIL") != std::string::npos);
}
