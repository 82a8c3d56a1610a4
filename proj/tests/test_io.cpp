#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "dhwpair/errors.hpp"
#include "dhwpair/io.hpp"
#include "dhwpair/sweep.hpp"
#include "dhwpair/version.hpp"

using namespace dhwpair;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {
        std::filesystem::remove(path);
    }
    ~TempFile() { std::filesystem::remove(path); }
};

SpectrumGrid tiny_grid() {
    SpectrumGrid grid;
    grid.spec.min1 = -0.5;
    grid.spec.max1 = 0.5;
    grid.spec.n1 = 3;
    grid.spec.min2 = -0.25;
    grid.spec.max2 = 0.25;
    grid.spec.n2 = 2;
    grid.field.e0 = 0.4;
    grid.field.omega = 0.4;
    grid.values = {1.0 / 3.0, 0.0, 2.5e-7, 1e-300, 0.125, 4.0};
    grid.flags = {0, 0, 0, 0, kPointClipped, 0};
    grid.provenance = {kEngineVersion, "2026-01-01T00:00:00Z", "momentum-outer"};
    return grid;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kGoodConfig = R"({
  "field": {"e0_over_ecr": 0.4, "omega_over_m": 0.4, "tau_m": 100, "phi_rad": 0, "delta": 0},
  "solver": {"rel_tol": 1e-8, "abs_tol": 1e-13, "h9_variant": "momentum-outer"},
  "workers": 2,
  "grid": {"plane": "xy", "fixed_over_m": 0, "q1_min_over_m": -1, "q1_max_over_m": 1,
           "n1": 5, "q2_min_over_m": -1, "q2_max_over_m": 1, "n2": 5}
})";

}  // namespace

TEST_CASE("run config parsing") {
    const RunConfig cfg = parse_run_config(kGoodConfig, "test");
    CHECK(cfg.field.e0 == 0.4);
    CHECK(cfg.solver.rel_tol == 1e-8);
    CHECK(cfg.workers == 2);
    REQUIRE(cfg.grid.has_value());
    CHECK(cfg.grid->n1 == 5);
    CHECK(cfg.task_count() == 1);
}

TEST_CASE("malformed config reports the defect position") {
    try {
        parse_run_config("{\n  \"field\": [,]\n}", "bad.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("bad.json") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(parse_run_config(R"({"field": {"e0": 0.4}, "point": {}})", "t"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"fields": {}, "point": {}})", "t"), ConfigError);
}

TEST_CASE("exactly one task block") {
    // none
    CHECK_THROWS_AS(parse_run_config(R"({"field": {"e0_over_ecr": 0.1, "omega_over_m": 1}})",
                                     "t"),
                    ConfigError);
    // two
    CHECK_THROWS_AS(parse_run_config(
                        R"({"field": {"e0_over_ecr": 0.1, "omega_over_m": 1},
                            "point": {"qx_over_m": 0}, "predict": {"n_min": 1, "n_max": 2}})",
                        "t"),
                    ConfigError);
}

TEST_CASE("h9 variant names") {
    const RunConfig cfg = parse_run_config(
        R"({"field": {"e0_over_ecr": 0.1, "omega_over_m": 1},
            "solver": {"h9_variant": "field-outer"}, "point": {"qx_over_m": 0}})",
        "t");
    CHECK(cfg.solver.h9_variant == H9Variant::FieldOuterMomentum);
    CHECK_THROWS_AS(parse_run_config(
                        R"({"field": {"e0_over_ecr": 0.1, "omega_over_m": 1},
                            "solver": {"h9_variant": "sideways"}, "point": {}})",
                        "t"),
                    ConfigError);
}

TEST_CASE("grid round trip through CSV and sidecar") {
    const SpectrumGrid grid = tiny_grid();
    TempFile csv("dhwpair_io_grid.csv");
    TempFile meta("dhwpair_io_grid.csv.meta.json");
    write_grid_csv(csv.path, grid);
    write_grid_sidecar(default_sidecar_path(csv.path), grid, 3);

    const SpectrumGrid back = read_grid(csv.path, default_sidecar_path(csv.path));
    REQUIRE(back.values.size() == grid.values.size());
    for (std::size_t k = 0; k < grid.values.size(); ++k)
        CHECK(back.values[k] == grid.values[k]);  // 17 digits = lossless
    CHECK(back.flags == grid.flags);
    CHECK(back.spec.n1 == grid.spec.n1);
    CHECK(back.field.e0 == grid.field.e0);
    CHECK(back.provenance.h9_variant == "momentum-outer");

    const std::string text = slurp(csv.path);
    CHECK(text.find("q1,q2,f\n") == 0);
    CHECK(text.find("0.33333333333333331") != std::string::npos);
}

TEST_CASE("raw grid dump is the bare value array") {
    const SpectrumGrid grid = tiny_grid();
    TempFile raw("dhwpair_io_grid.f64");
    write_grid_raw(raw.path, grid);
    const std::string bytes = slurp(raw.path);
    REQUIRE(bytes.size() == grid.values.size() * sizeof(double));
    double v0 = 0.0;
    std::memcpy(&v0, bytes.data(), sizeof(double));
    CHECK(v0 == grid.values[0]);
}

TEST_CASE("grid reading failure modes") {
    const SpectrumGrid grid = tiny_grid();
    TempFile csv("dhwpair_io_bad.csv");
    TempFile meta("dhwpair_io_bad.csv.meta.json");
    write_grid_csv(csv.path, grid);
    write_grid_sidecar(default_sidecar_path(csv.path), grid, 1);

    // missing sidecar
    CHECK_THROWS_AS(read_grid(csv.path, csv.path + ".nope.json"), ConfigError);

    // truncated CSV
    {
        std::string text = slurp(csv.path);
        std::ofstream out(csv.path, std::ios::binary | std::ios::trunc);
        out << text.substr(0, text.size() / 2);
    }
    CHECK_THROWS_AS(read_grid(csv.path, default_sidecar_path(csv.path)), ConfigError);

    // unknown sidecar schema version
    write_grid_csv(csv.path, grid);
    {
        std::string meta_text = slurp(default_sidecar_path(csv.path));
        const auto pos = meta_text.find("\"schema_version\": 1");
        REQUIRE(pos != std::string::npos);
        meta_text.replace(pos, 19, "\"schema_version\": 999");
        std::ofstream out(default_sidecar_path(csv.path), std::ios::binary | std::ios::trunc);
        out << meta_text;
    }
    CHECK_THROWS_AS(read_grid(csv.path, default_sidecar_path(csv.path)), ConfigError);
}

TEST_CASE("csv rows must match the sidecar lattice") {
    const SpectrumGrid grid = tiny_grid();
    TempFile csv("dhwpair_io_mismatch.csv");
    TempFile meta("dhwpair_io_mismatch.csv.meta.json");
    write_grid_csv(csv.path, grid);
    write_grid_sidecar(default_sidecar_path(csv.path), grid, 1);
    {
        std::string text = slurp(csv.path);
        // perturb the first coordinate
        const auto pos = text.find("-0.5,");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 5, "-0.7,");
        std::ofstream out(csv.path, std::ios::binary | std::ios::trunc);
        out << text;
    }
    CHECK_THROWS_AS(read_grid(csv.path, default_sidecar_path(csv.path)), ConfigError);
}
