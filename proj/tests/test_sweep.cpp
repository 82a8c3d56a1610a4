#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <doctest.h>

#include "dhwpair/errors.hpp"
#include "dhwpair/sweep.hpp"

using namespace dhwpair;

namespace {

// Small, fast configuration for harness tests (short pulse).
FieldConfig quick_field(double e0 = 0.2) {
    FieldConfig cfg;
    cfg.e0 = e0;
    cfg.omega = 0.5;
    cfg.tau = 30.0;
    return cfg;
}

GridSpec quick_grid(int n) {
    GridSpec g;
    g.min1 = -0.6;
    g.max1 = 0.6;
    g.n1 = n;
    g.min2 = -0.6;
    g.max2 = 0.6;
    g.n2 = n;
    return g;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {
        std::filesystem::remove(path);
    }
    ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("zero field sweeps to an all-zero grid") {
    const SpectrumGrid grid = sweep_grid(quick_field(0.0), quick_grid(3), SolverOptions{});
    CHECK(grid.complete);
    CHECK_FALSE(grid.any_flagged());
    for (double v : grid.values) CHECK(v == 0.0);
}

TEST_CASE("grid values equal independent point solves") {
    const FieldConfig cfg = quick_field();
    const GridSpec spec = quick_grid(3);
    const SolverOptions opts;
    const SpectrumGrid grid = sweep_grid(cfg, spec, opts);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const PointResult r = solve_point(spec.momentum_at(i, j), cfg, opts);
            CHECK(grid.at(i, j) == r.f_final);  // bit-identical
        }
}

TEST_CASE("worker count never changes the bytes") {
    const FieldConfig cfg = quick_field();
    const GridSpec spec = quick_grid(5);
    const SolverOptions opts;

    SweepOptions one;
    one.workers = 1;
    SweepOptions four;
    four.workers = 4;
    const SpectrumGrid a = sweep_grid(cfg, spec, opts, one);
    const SpectrumGrid b = sweep_grid(cfg, spec, opts, four);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t k = 0; k < a.values.size(); ++k) CHECK(a.values[k] == b.values[k]);
}

TEST_CASE("plane mapping") {
    GridSpec g = quick_grid(3);
    g.fixed_value = 0.25;
    g.plane = GridPlane::XZ;
    const Momentum3 q = g.momentum_at(0, 2);
    CHECK(q.x == g.axis1(0));
    CHECK(q.y == 0.25);
    CHECK(q.z == g.axis2(2));
    g.plane = GridPlane::YZ;
    const Momentum3 p = g.momentum_at(1, 0);
    CHECK(p.x == 0.25);
    CHECK(p.y == g.axis1(1));
    CHECK(p.z == g.axis2(0));
}

TEST_CASE("checkpoint interrupt and resume reproduce an uninterrupted run") {
    const FieldConfig cfg = quick_field();
    const GridSpec spec = quick_grid(5);
    const SolverOptions opts;
    TempFile ckpt("dhwpair_test_ckpt.bin");

    const SpectrumGrid uninterrupted = sweep_grid(cfg, spec, opts);

    SweepOptions partial;
    partial.workers = 1;
    partial.checkpoint_path = ckpt.path;
    partial.checkpoint_interval = 1;
    partial.point_budget = 13;  // not even three of five rows
    const SpectrumGrid half = sweep_grid(cfg, spec, opts, partial);
    CHECK_FALSE(half.complete);
    REQUIRE(std::filesystem::exists(ckpt.path));

    SweepOptions finish;
    finish.checkpoint_path = ckpt.path;
    const SpectrumGrid resumed = resume_sweep(cfg, spec, opts, finish);
    CHECK(resumed.complete);
    for (std::size_t k = 0; k < uninterrupted.values.size(); ++k)
        CHECK(resumed.values[k] == uninterrupted.values[k]);

    // resuming a finished sweep is a no-op
    const SpectrumGrid again = resume_sweep(cfg, spec, opts, finish);
    for (std::size_t k = 0; k < uninterrupted.values.size(); ++k)
        CHECK(again.values[k] == uninterrupted.values[k]);
}

TEST_CASE("checkpoint refuses a different configuration") {
    const GridSpec spec = quick_grid(4);
    const SolverOptions opts;
    TempFile ckpt("dhwpair_test_ckpt2.bin");

    SweepOptions sweep;
    sweep.checkpoint_path = ckpt.path;
    sweep.checkpoint_interval = 1;
    sweep_grid(quick_field(0.2), spec, opts, sweep);

    FieldConfig altered = quick_field(0.3);
    CHECK_THROWS_AS(sweep_grid(altered, spec, opts, sweep), ChecksumMismatch);
    CHECK_THROWS_AS(resume_sweep(altered, spec, opts, sweep), ChecksumMismatch);
}

TEST_CASE("frequency scan matches point solves") {
    const FieldConfig base = quick_field();
    FrequencyScanSpec scan;
    scan.q = {0.2, 0.0, 0.0};
    scan.omega_min = 0.5;
    scan.omega_max = 0.5;
    scan.n_omega = 1;
    const FrequencyScanResult curve = sweep_frequency(base, scan, SolverOptions{});
    REQUIRE(curve.values.size() == 1);
    FieldConfig cfg = base;
    cfg.omega = 0.5;
    CHECK(curve.values[0] == solve_point(scan.q, cfg, SolverOptions{}).f_final);

    FrequencyScanSpec bad = scan;
    bad.omega_min = 0.0;
    CHECK_THROWS_AS(sweep_frequency(base, bad, SolverOptions{}), ConfigError);
}

TEST_CASE("linear-polarization grids inherit the reflection symmetries") {
    // Symmetric lattice, delta = 0, phi = 0: reflections through both
    // axes leave f unchanged to solver accuracy.
    const FieldConfig cfg = quick_field(0.3);
    const GridSpec spec = quick_grid(5);
    const SpectrumGrid grid = sweep_grid(cfg, spec, SolverOptions{});
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const double v = grid.at(i, j);
            const double vx = grid.at(4 - i, j);
            const double vy = grid.at(i, 4 - j);
            CHECK(std::abs(v - vx) / std::max(v, 1e-300) <= 1e-4);
            CHECK(std::abs(v - vy) / std::max(v, 1e-300) <= 1e-4);
        }
}

TEST_CASE("environment variable caps the worker count") {
    setenv("DHWPAIR_MAX_WORKERS", "1", 1);
    CHECK(effective_worker_count(8) == 1);
    CHECK(effective_worker_count(1) == 1);
    unsetenv("DHWPAIR_MAX_WORKERS");
    CHECK(effective_worker_count(8) == 8);
}

TEST_CASE("spec validation") {
    GridSpec g = quick_grid(3);
    g.n1 = 1;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = quick_grid(3);
    g.max2 = g.min2;
    CHECK_THROWS_AS(g.validate(), ConfigError);
}
