#ifndef DHWPAIR_SWEEP_HPP
#define DHWPAIR_SWEEP_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dhwpair/dhw.hpp"
#include "dhwpair/field.hpp"

namespace dhwpair {

enum class GridPlane { XY, XZ, YZ };

// 2D momentum lattice: a plane through momentum space at a fixed value of
// the out-of-plane component. Axis samples are min + (max-min)*i/(n-1);
// odd counts place a sample exactly at 0.
struct GridSpec {
    GridPlane plane = GridPlane::XY;
    double fixed_value = 0.0;
    double min1 = 0.0, max1 = 0.0;
    int n1 = 0;
    double min2 = 0.0, max2 = 0.0;
    int n2 = 0;

    void validate() const;
    double axis1(int i) const { return min1 + (max1 - min1) * i / (n1 - 1); }
    double axis2(int j) const { return min2 + (max2 - min2) * j / (n2 - 1); }
    Momentum3 momentum_at(int i, int j) const;
    std::size_t size() const { return static_cast<std::size_t>(n1) * n2; }
};

// Per-point status bits. Failed points never abort a sweep.
enum PointFlag : std::uint8_t {
    kPointOk = 0,
    kPointClipped = 1,    // occupation left [0,1] beyond 10*abs_tol
    kPointStepLimit = 2,  // value is NaN
    kPointNonFinite = 4,  // value is NaN
};

struct Provenance {
    std::string engine_version;
    std::string timestamp;   // ISO 8601 UTC
    std::string h9_variant;  // drift-matrix reading baked into the data
};

// Gridded final distribution f(q); the core output artifact.
struct SpectrumGrid {
    GridSpec spec;
    FieldConfig field;
    SolverOptions solver;
    std::vector<double> values;       // row-major [i*n2 + j]; NaN on failure
    std::vector<std::uint8_t> flags;  // PointFlag bits per point
    Provenance provenance;
    bool complete = true;  // false when a point budget stopped the sweep

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * spec.n2 + j]; }
    bool any_flagged() const;
};

// f(+inf) at one fixed momentum as a function of laser frequency; all
// other field parameters held at the base configuration.
struct FrequencyScanSpec {
    Momentum3 q;
    double omega_min = 0.0, omega_max = 0.0;
    int n_omega = 0;

    void validate() const;
    double omega_at(int k) const {
        return n_omega == 1 ? omega_min
                            : omega_min + (omega_max - omega_min) * k / (n_omega - 1);
    }
};

struct FrequencyScanResult {
    FrequencyScanSpec spec;
    FieldConfig base_field;  // omega replaced per sample
    SolverOptions solver;
    std::vector<double> omegas;
    std::vector<double> values;
    std::vector<std::uint8_t> flags;
    Provenance provenance;
};

struct SweepOptions {
    int workers = 0;              // 0 = hardware concurrency (env-capped)
    std::string checkpoint_path;  // empty = no checkpointing
    int checkpoint_interval = 256;  // flush every K completed points
    std::size_t point_budget = 0;   // 0 = unlimited; else stop after ~budget
    std::function<void(std::size_t done, std::size_t total)> progress;
};

// Worker count after applying the DHWPAIR_MAX_WORKERS environment cap.
int effective_worker_count(int requested);

// Runs solve_point over every lattice momentum. Deterministic: values are
// written into their lattice slots, so the result is bit-identical for
// any worker count and scheduling order. Per-point failures are recorded
// in flags; only checkpoint I/O failures abort.
SpectrumGrid sweep_grid(const FieldConfig& cfg, const GridSpec& spec, const SolverOptions& opts,
                        const SweepOptions& sweep = {});

// Resumes a checkpointed sweep: completes the remaining points and
// returns a grid bit-identical to an uninterrupted run. A checkpoint
// written under a different configuration throws ChecksumMismatch.
// Resuming a finished sweep just returns the stored grid.
SpectrumGrid resume_sweep(const FieldConfig& cfg, const GridSpec& spec, const SolverOptions& opts,
                          const SweepOptions& sweep);

FrequencyScanResult sweep_frequency(const FieldConfig& base, const FrequencyScanSpec& scan,
                                    const SolverOptions& opts, const SweepOptions& sweep = {});

// Shared worker-pool helper: fn(i) for i in [0, n), dynamically scheduled.
// fn must be safe to call concurrently on distinct indices.
void parallel_for_index(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace dhwpair

#endif
