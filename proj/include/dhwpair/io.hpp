#ifndef DHWPAIR_IO_HPP
#define DHWPAIR_IO_HPP

#include <optional>
#include <string>

#include "dhwpair/dhw.hpp"
#include "dhwpair/field.hpp"
#include "dhwpair/sweep.hpp"

namespace dhwpair {

// Configuration files and on-disk artifact formats.
//
// Run configuration: a JSON object with unit-explicit key names
// (e0_over_ecr, omega_over_m, ...) and exactly one task block. Unknown
// keys are rejected, malformed files report line/column. Grid and curve
// artifacts are CSV (UTF-8, LF, header row, 17 significant digits, byte
// deterministic), an optional raw little-endian float64 row-major dump,
// and a JSON metadata sidecar (versioned schema) at <csv>.meta.json.

struct PredictSpec {
    int n_min = 1;
    int n_max = 10;
    double spin = 0.5;

    void validate() const;
};

struct AnalyzeSpec {
    std::string grid_csv;  // may be overridden by a CLI flag
};

struct RunConfig {
    FieldConfig field;
    SolverOptions solver;
    int workers = 0;  // 0 = hardware concurrency

    // Exactly one task block.
    std::optional<Momentum3> point;
    std::optional<GridSpec> grid;
    std::optional<FrequencyScanSpec> freq_scan;
    std::optional<PredictSpec> predict;
    std::optional<AnalyzeSpec> analyze;

    void validate() const;
    int task_count() const;
};

// Throws ConfigError; parse failures carry the line/column of the defect.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::string& origin);

std::string default_sidecar_path(const std::string& csv_path);

// Grid artifacts.
void write_grid_csv(const std::string& path, const SpectrumGrid& grid);
void write_grid_raw(const std::string& path, const SpectrumGrid& grid);
void write_grid_sidecar(const std::string& path, const SpectrumGrid& grid, int workers);

// Reads CSV plus sidecar back into a grid; throws ConfigError on missing
// or truncated files, schema mismatches, or lattice inconsistencies.
SpectrumGrid read_grid(const std::string& csv_path, const std::string& sidecar_path);

// Frequency-scan artifacts.
void write_curve_csv(const std::string& path, const FrequencyScanResult& curve);
void write_curve_sidecar(const std::string& path, const FrequencyScanResult& curve, int workers);

}  // namespace dhwpair

#endif
