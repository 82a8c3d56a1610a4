// Command-line runner: turns the solver library into a reproducible
// experiment pipeline that emits plot-ready CSV data.
//
// Exit codes: 0 success, 1 config/input error, 2 solver error,
// 3 verification failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dhwpair/analysis.hpp"
#include "dhwpair/dhw.hpp"
#include "dhwpair/errors.hpp"
#include "dhwpair/io.hpp"
#include "dhwpair/qve.hpp"
#include "dhwpair/semianalytic.hpp"
#include "dhwpair/sweep.hpp"
#include "dhwpair/version.hpp"

namespace {

using nlohmann::json;
using namespace dhwpair;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitVerification = 3;

// Oracle acceptance bounds for compare-oracle.
constexpr double kOracleRelBound = 1e-2;
constexpr double kOracleAbsBound = 1e-9;
constexpr double kOracleRelFloor = 1e-10;
constexpr double kOracleSmallF = 1e-7;

struct CommonArgs {
    std::string config_path;
    std::optional<double> e0, omega, tau, phi, delta;
    std::optional<double> rel_tol, abs_tol;
    std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--e0", args.e0, "override field.e0_over_ecr");
    cmd->add_option("--omega", args.omega, "override field.omega_over_m");
    cmd->add_option("--tau", args.tau, "override field.tau_m");
    cmd->add_option("--phi", args.phi, "override field.phi_rad");
    cmd->add_option("--delta", args.delta, "override field.delta");
    cmd->add_option("--rel-tol", args.rel_tol, "override solver.rel_tol");
    cmd->add_option("--abs-tol", args.abs_tol, "override solver.abs_tol");
    cmd->add_option("-j,--workers", args.workers, "worker threads (0 = hardware)");
}

RunConfig load_with_overrides(const CommonArgs& args) {
    RunConfig cfg = load_run_config(args.config_path);
    if (args.e0) cfg.field.e0 = *args.e0;
    if (args.omega) cfg.field.omega = *args.omega;
    if (args.tau) cfg.field.tau = *args.tau;
    if (args.phi) cfg.field.phi = *args.phi;
    if (args.delta) cfg.field.delta = *args.delta;
    if (args.rel_tol) cfg.solver.rel_tol = *args.rel_tol;
    if (args.abs_tol) cfg.solver.abs_tol = *args.abs_tol;
    if (args.workers) cfg.workers = *args.workers;
    cfg.field.validate();
    cfg.solver.validate();
    return cfg;
}

int run_solve(const CommonArgs& args) {
    RunConfig cfg = load_with_overrides(args);
    if (!cfg.point) throw ConfigError("solve: config needs a \"point\" task block");
    const PointResult r = solve_point(*cfg.point, cfg.field, cfg.solver);
    std::printf("f_final = %.17g\n", r.f_final);
    std::printf("constancy_residual = %.17g\n", r.constancy_residual);
    std::printf("n_steps = %ld\n", r.n_steps);
    std::printf("clipped = %d\n", r.clip_flag ? 1 : 0);
    return kExitOk;
}

int run_sweep_cmd(const CommonArgs& args, const std::string& out_csv, const std::string& out_raw,
                  const std::string& checkpoint, bool strict, bool resume) {
    RunConfig cfg = load_with_overrides(args);
    if (!cfg.grid) throw ConfigError("sweep: config needs a \"grid\" task block");

    SweepOptions sweep;
    sweep.workers = cfg.workers;
    sweep.checkpoint_path = checkpoint;
    const SpectrumGrid grid = resume ? resume_sweep(cfg.field, *cfg.grid, cfg.solver, sweep)
                                     : sweep_grid(cfg.field, *cfg.grid, cfg.solver, sweep);

    write_grid_csv(out_csv, grid);
    write_grid_sidecar(default_sidecar_path(out_csv), grid,
                       effective_worker_count(cfg.workers));
    if (!out_raw.empty()) write_grid_raw(out_raw, grid);

    if (grid.any_flagged()) {
        std::size_t count = 0;
        for (auto f : grid.flags) count += f != kPointOk;
        std::fprintf(stderr, "sweep: %zu flagged point(s) recorded in sidecar\n", count);
        if (strict) return kExitSolver;
    }
    return kExitOk;
}

int run_scan_freq(const CommonArgs& args, const std::string& out_csv,
                  const std::string& report_path) {
    RunConfig cfg = load_with_overrides(args);
    if (!cfg.freq_scan) throw ConfigError("scan-freq: config needs a \"freq_scan\" task block");

    SweepOptions sweep;
    sweep.workers = cfg.workers;
    const FrequencyScanResult curve = sweep_frequency(cfg.field, *cfg.freq_scan, cfg.solver, sweep);
    write_curve_csv(out_csv, curve);
    write_curve_sidecar(default_sidecar_path(out_csv), curve,
                        effective_worker_count(cfg.workers));

    json peaks = json::array();
    try {
        for (const ResonancePeak& p : resonance_peaks(curve))
            peaks.push_back({{"omega", p.omega}, {"f", p.value}, {"n_assigned", p.n_assigned}});
    } catch (const NoPeaks&) {
        // empty report
    }
    json report = {{"kind", "resonance_peaks"}, {"peaks", peaks}};
    const std::string text = report.dump(2) + "\n";
    if (report_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) throw Error("write failed for " + report_path);
    }
    return kExitOk;
}

int run_predict(const CommonArgs& args, const std::string& out_path) {
    RunConfig cfg = load_with_overrides(args);
    if (!cfg.predict) throw ConfigError("predict: config needs a \"predict\" task block");
    const PredictSpec& ps = *cfg.predict;

    json rings = json::array();
    std::printf("# min_photon_number = %d\n", min_photon_number(cfg.field));
    std::printf("%-4s %-8s %-12s %-6s %s\n", "n", "present", "radius", "nodes", "node_qx");
    for (int n = ps.n_min; n <= ps.n_max; ++n) {
        const RingFeaturePrediction ring = ring_radius(n, cfg.field);
        json entry = {{"n", n}, {"present", ring.present}};
        if (ring.present) {
            const auto points = node_positions(n, cfg.field, ps.spin);
            const auto qx = node_qx_values(n, cfg.field, ps.spin);
            entry["radius"] = ring.radius;
            entry["node_count"] = points.size();
            entry["node_qx"] = qx;
            std::string qx_text;
            for (double v : qx) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.5f ", v);
                qx_text += buf;
            }
            std::printf("%-4d %-8s %-12.5f %-6zu %s\n", n, "yes", ring.radius, points.size(),
                        qx_text.c_str());
        } else {
            std::printf("%-4d %-8s %-12s %-6s %s\n", n, "no", "-", "-", "");
        }
        rings.push_back(entry);
    }
    if (!out_path.empty()) {
        json report = {{"kind", "ring_prediction"},
                       {"min_photon_number", min_photon_number(cfg.field)},
                       {"spin", ps.spin},
                       {"field", {{"e0_over_ecr", cfg.field.e0},
                                  {"omega_over_m", cfg.field.omega},
                                  {"delta", cfg.field.delta}}},
                       {"rings", rings}};
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        out << report.dump(2) << '\n';
        if (!out) throw Error("write failed for " + out_path);
    }
    return kExitOk;
}

int run_compare_oracle(const CommonArgs& args) {
    RunConfig cfg = load_with_overrides(args);
    if (!cfg.grid) throw ConfigError("compare-oracle: config needs a \"grid\" task block");
    if (cfg.field.delta != 0.0)
        throw NotLinearlyPolarized(
            "compare-oracle: the quantum Vlasov oracle is only defined for delta = 0");

    const GridSpec& spec = *cfg.grid;
    spec.validate();
    const std::size_t n = spec.size();
    std::vector<double> f_dhw(n), f_qve(n);
    parallel_for_index(n, effective_worker_count(cfg.workers), [&](std::size_t k) {
        const int i = static_cast<int>(k) / spec.n2;
        const int j = static_cast<int>(k) % spec.n2;
        const Momentum3 q = spec.momentum_at(i, j);
        f_dhw[k] = solve_point(q, cfg.field, cfg.solver).f_final;
        f_qve[k] = qve_solve_point(q, cfg.field, cfg.solver).f_final;
    });

    double max_rel = 0.0, max_abs = 0.0, max_abs_small = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = std::abs(f_dhw[k] - f_qve[k]);
        max_rel = std::max(max_rel, d / std::max(f_qve[k], kOracleRelFloor));
        max_abs = std::max(max_abs, d);
        if (f_dhw[k] < kOracleSmallF && f_qve[k] < kOracleSmallF)
            max_abs_small = std::max(max_abs_small, d);
    }
    const bool pass = max_rel <= kOracleRelBound && max_abs_small <= kOracleAbsBound;
    std::printf("points = %zu\n", n);
    std::printf("max_rel_deviation = %.17g\n", max_rel);
    std::printf("max_abs_deviation = %.17g\n", max_abs);
    std::printf("max_abs_deviation_small_f = %.17g\n", max_abs_small);
    std::printf("bounds: rel <= %g, abs <= %g where both f < %g\n", kOracleRelBound,
                kOracleAbsBound, kOracleSmallF);
    std::printf("verdict = %s\n", pass ? "PASS" : "FAIL");
    return pass ? kExitOk : kExitVerification;
}

int run_analyze(const CommonArgs& args, std::string grid_csv, const std::string& out_path) {
    RunConfig cfg = load_with_overrides(args);
    if (!cfg.analyze) throw ConfigError("analyze: config needs an \"analyze\" task block");
    if (grid_csv.empty()) grid_csv = cfg.analyze->grid_csv;
    if (grid_csv.empty())
        throw ConfigError("analyze: grid CSV path required (config analyze.grid_csv or --grid)");

    const SpectrumGrid grid = read_grid(grid_csv, default_sidecar_path(grid_csv));

    AnalysisOptions opts;
    const double dr = 0.5 * std::min((grid.spec.max1 - grid.spec.min1) / (grid.spec.n1 - 1),
                                     (grid.spec.max2 - grid.spec.min2) / (grid.spec.n2 - 1));
    const double r_max = std::min(std::min(-grid.spec.min1, grid.spec.max1),
                                  std::min(-grid.spec.min2, grid.spec.max2));
    const int n_radii = std::max(16, static_cast<int>(r_max / dr));

    const RadialProfile profile = radial_profile(grid, n_radii, opts.n_angles_profile);
    const std::vector<RingFeature> rings =
        select_main_rings(extract_rings(profile, grid.field, opts));

    json jrings = json::array();
    double best_omega = 0.0;
    std::size_t best_nodes = 0;
    for (const RingFeature& ring : rings) {
        const NodeSet nodes = detect_nodes(grid, ring, opts);
        json jr = {{"radius", ring.radius},
                   {"n_assigned", ring.n_assigned},
                   {"peak_height", ring.peak_height},
                   {"node_count", nodes.node_points.size()},
                   {"node_qx", nodes.node_qx}};
        if (nodes.node_qx.size() >= 2) {
            const double w = recover_frequency(nodes);
            jr["recovered_omega"] = w;
            if (nodes.node_qx.size() > best_nodes) {
                best_nodes = nodes.node_qx.size();
                best_omega = w;
            }
        }
        jrings.push_back(jr);
    }

    json report = {{"kind", "spectrum_analysis"},
                   {"grid_csv", grid_csv},
                   {"min_photon_number", min_photon_number(grid.field)},
                   {"smallest_ring_radius", rings.front().radius},
                   {"rings", jrings}};
    if (best_nodes >= 2) {
        report["recovered_omega"] = best_omega;
        report["config_omega"] = grid.field.omega;
        report["omega_deviation"] = best_omega - grid.field.omega;
    }
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) throw Error("write failed for " + out_path);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dhwpair: momentum spectra of vacuum pair creation in "
                 "elliptically polarized pulses"};
    app.set_version_flag("--version", kEngineVersion);
    app.require_subcommand(1);

    CommonArgs solve_args, sweep_args, scan_args, predict_args, oracle_args, analyze_args;
    std::string sweep_out, sweep_raw, sweep_checkpoint;
    bool sweep_strict = false, sweep_resume = false;
    std::string scan_out, scan_report;
    std::string predict_out;
    std::string analyze_grid, analyze_out;

    CLI::App* c_solve = app.add_subcommand("solve", "integrate a single momentum point");
    add_common(c_solve, solve_args);

    CLI::App* c_sweep = app.add_subcommand("sweep", "momentum-grid sweep to CSV");
    add_common(c_sweep, sweep_args);
    c_sweep->add_option("-o,--out", sweep_out, "output CSV path")->required();
    c_sweep->add_option("--raw", sweep_raw, "also write raw float64 row-major grid");
    c_sweep->add_option("--checkpoint", sweep_checkpoint, "checkpoint file for resume");
    c_sweep->add_flag("--strict", sweep_strict, "exit 2 when any point is flagged");
    c_sweep->add_flag("--resume", sweep_resume, "resume from --checkpoint");

    CLI::App* c_scan = app.add_subcommand("scan-freq", "frequency scan at fixed momentum");
    add_common(c_scan, scan_args);
    c_scan->add_option("-o,--out", scan_out, "output CSV path")->required();
    c_scan->add_option("--report", scan_report, "peaks report path (default stdout)");

    CLI::App* c_predict = app.add_subcommand("predict", "ring/node predictions");
    add_common(c_predict, predict_args);
    c_predict->add_option("-o,--out", predict_out, "JSON report path");

    CLI::App* c_oracle =
        app.add_subcommand("compare-oracle", "cross-check the two solvers on a grid");
    add_common(c_oracle, oracle_args);

    CLI::App* c_analyze = app.add_subcommand("analyze", "extract rings/nodes from a grid CSV");
    add_common(c_analyze, analyze_args);
    c_analyze->add_option("--grid", analyze_grid, "grid CSV (overrides config analyze.grid_csv)");
    c_analyze->add_option("-o,--out", analyze_out, "JSON report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (c_solve->parsed()) return run_solve(solve_args);
        if (c_sweep->parsed())
            return run_sweep_cmd(sweep_args, sweep_out, sweep_raw, sweep_checkpoint, sweep_strict,
                                 sweep_resume);
        if (c_scan->parsed()) return run_scan_freq(scan_args, scan_out, scan_report);
        if (c_predict->parsed()) return run_predict(predict_args, predict_out);
        if (c_oracle->parsed()) return run_compare_oracle(oracle_args);
        if (c_analyze->parsed()) return run_analyze(analyze_args, analyze_grid, analyze_out);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitOk;
}
