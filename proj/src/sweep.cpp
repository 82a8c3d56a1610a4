#include "dhwpair/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "dhwpair/errors.hpp"
#include "dhwpair/version.hpp"

namespace dhwpair {

namespace {

constexpr char kCheckpointMagic[8] = {'D', 'H', 'W', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kCheckpointSchema = 1;

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

const char* h9_variant_name(H9Variant v) {
    return v == H9Variant::MomentumOuterField ? "momentum-outer" : "field-outer";
}

Provenance make_provenance(const SolverOptions& opts) {
    return {kEngineVersion, iso8601_utc_now(), h9_variant_name(opts.h9_variant)};
}

void append_num(std::string& s, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g;", v);
    s += buf;
}

// FNV-1a over a canonical rendering of everything that determines the
// numbers in the grid.
std::uint64_t sweep_hash(const FieldConfig& cfg, const GridSpec& spec,
                         const SolverOptions& opts) {
    std::string s = "dhwpair-sweep;";
    append_num(s, cfg.e0);
    append_num(s, cfg.omega);
    append_num(s, cfg.tau);
    append_num(s, cfg.phi);
    append_num(s, cfg.delta);
    s += spec.plane == GridPlane::XY ? "xy;" : (spec.plane == GridPlane::XZ ? "xz;" : "yz;");
    append_num(s, spec.fixed_value);
    append_num(s, spec.min1);
    append_num(s, spec.max1);
    append_num(s, spec.n1);
    append_num(s, spec.min2);
    append_num(s, spec.max2);
    append_num(s, spec.n2);
    append_num(s, opts.rel_tol);
    append_num(s, opts.abs_tol);
    append_num(s, opts.t_span_factor);
    append_num(s, static_cast<double>(opts.max_steps));
    append_num(s, opts.constancy_window_periods);
    append_num(s, opts.fixed_step);
    s += h9_variant_name(opts.h9_variant);

    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct CheckpointData {
    std::uint64_t hash = 0;
    std::vector<std::uint8_t> done_bits;
    std::vector<double> values;
    std::vector<std::uint8_t> flags;
};

void write_checkpoint(const std::string& path, const CheckpointData& data, std::size_t n) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("checkpoint: cannot open " + tmp);
        out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
        const std::uint32_t schema = kCheckpointSchema;
        const std::uint64_t npoints = n;
        out.write(reinterpret_cast<const char*>(&schema), sizeof(schema));
        out.write(reinterpret_cast<const char*>(&data.hash), sizeof(data.hash));
        out.write(reinterpret_cast<const char*>(&npoints), sizeof(npoints));
        out.write(reinterpret_cast<const char*>(data.done_bits.data()),
                  static_cast<std::streamsize>(data.done_bits.size()));
        out.write(reinterpret_cast<const char*>(data.values.data()),
                  static_cast<std::streamsize>(n * sizeof(double)));
        out.write(reinterpret_cast<const char*>(data.flags.data()),
                  static_cast<std::streamsize>(n));
        if (!out) throw Error("checkpoint: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

bool read_checkpoint(const std::string& path, std::uint64_t expect_hash, std::size_t n,
                     CheckpointData& data) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[8];
    std::uint32_t schema = 0;
    std::uint64_t hash = 0, npoints = 0;
    in.read(magic, sizeof(magic));
    in.read(reinterpret_cast<char*>(&schema), sizeof(schema));
    in.read(reinterpret_cast<char*>(&hash), sizeof(hash));
    in.read(reinterpret_cast<char*>(&npoints), sizeof(npoints));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0 ||
        schema != kCheckpointSchema)
        throw ChecksumMismatch("checkpoint: unrecognized file " + path);
    if (hash != expect_hash || npoints != n)
        throw ChecksumMismatch("checkpoint: file " + path +
                               " was written for a different sweep configuration");
    data.hash = hash;
    data.done_bits.assign((n + 7) / 8, 0);
    data.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    data.flags.assign(n, 0);
    in.read(reinterpret_cast<char*>(data.done_bits.data()),
            static_cast<std::streamsize>(data.done_bits.size()));
    in.read(reinterpret_cast<char*>(data.values.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    in.read(reinterpret_cast<char*>(data.flags.data()), static_cast<std::streamsize>(n));
    if (!in) throw ChecksumMismatch("checkpoint: truncated file " + path);
    return true;
}

inline bool bit_test(const std::vector<std::uint8_t>& bits, std::size_t i) {
    return (bits[i >> 3] >> (i & 7)) & 1;
}
inline void bit_set(std::vector<std::uint8_t>& bits, std::size_t i) {
    bits[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
}

struct PointOutcome {
    double value;
    std::uint8_t flag;
};

PointOutcome run_point(const Momentum3& q, const FieldConfig& cfg, const SolverOptions& opts) {
    try {
        const PointResult r = solve_point(q, cfg, opts);
        return {r.f_final, r.clip_flag ? kPointClipped : kPointOk};
    } catch (const StepLimitExceeded&) {
        return {std::numeric_limits<double>::quiet_NaN(), kPointStepLimit};
    } catch (const NonFiniteState&) {
        return {std::numeric_limits<double>::quiet_NaN(), kPointNonFinite};
    }
}

SpectrumGrid run_sweep(const FieldConfig& cfg, const GridSpec& spec, const SolverOptions& opts,
                       const SweepOptions& sweep, bool resuming) {
    cfg.validate();
    spec.validate();
    opts.validate();

    const std::size_t n = spec.size();
    const std::uint64_t hash = sweep_hash(cfg, spec, opts);

    CheckpointData ck;
    bool have_checkpoint = false;
    if (!sweep.checkpoint_path.empty())
        have_checkpoint = read_checkpoint(sweep.checkpoint_path, hash, n, ck);
    if (resuming && !have_checkpoint)
        throw ChecksumMismatch("resume: no checkpoint at " + sweep.checkpoint_path);
    if (!have_checkpoint) {
        ck.hash = hash;
        ck.done_bits.assign((n + 7) / 8, 0);
        ck.values.assign(n, std::numeric_limits<double>::quiet_NaN());
        ck.flags.assign(n, 0);
    }

    std::size_t already_done = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (bit_test(ck.done_bits, i)) ++already_done;

    // Rows with any missing point are recomputed whole; per-point solves
    // are deterministic, so recomputation cannot change stored values.
    std::vector<int> todo_rows;
    for (int i = 0; i < spec.n1; ++i) {
        bool full = true;
        for (int j = 0; j < spec.n2 && full; ++j)
            full = bit_test(ck.done_bits, static_cast<std::size_t>(i) * spec.n2 + j);
        if (!full) todo_rows.push_back(i);
    }

    const int workers = effective_worker_count(sweep.workers);
    std::atomic<std::size_t> next_row{0};
    std::atomic<std::size_t> done_points{already_done};
    std::atomic<std::size_t> budget_left{
        sweep.point_budget > 0 ? sweep.point_budget : std::numeric_limits<std::size_t>::max()};
    std::atomic<bool> stopped{false};
    std::mutex flush_mutex;
    std::size_t flushed_at = already_done;

    auto flush = [&](bool force) {
        if (sweep.checkpoint_path.empty()) return;
        std::lock_guard<std::mutex> lock(flush_mutex);
        const std::size_t done_now = done_points.load();
        if (!force && done_now - flushed_at < static_cast<std::size_t>(sweep.checkpoint_interval))
            return;
        write_checkpoint(sweep.checkpoint_path, ck, n);
        flushed_at = done_now;
    };

    auto worker = [&]() {
        for (;;) {
            const std::size_t r = next_row.fetch_add(1);
            if (r >= todo_rows.size()) return;
            const int i = todo_rows[r];
            const std::size_t row_cost = spec.n2;
            // Budget bookkeeping is row-granular to keep rows atomic units.
            std::size_t left = budget_left.load();
            do {
                if (left < row_cost) {
                    stopped.store(true);
                    return;
                }
            } while (!budget_left.compare_exchange_weak(left, left - row_cost));

            for (int j = 0; j < spec.n2; ++j) {
                const std::size_t idx = static_cast<std::size_t>(i) * spec.n2 + j;
                const PointOutcome out = run_point(spec.momentum_at(i, j), cfg, opts);
                ck.values[idx] = out.value;
                ck.flags[idx] = out.flag;
            }
            {
                std::lock_guard<std::mutex> lock(flush_mutex);
                for (int j = 0; j < spec.n2; ++j)
                    bit_set(ck.done_bits, static_cast<std::size_t>(i) * spec.n2 + j);
            }
            const std::size_t done_now = done_points.fetch_add(row_cost) + row_cost;
            if (sweep.progress) sweep.progress(done_now, n);
            flush(false);
        }
    };

    if (workers <= 1 || todo_rows.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int nthreads = std::min<std::size_t>(workers, todo_rows.size());
        pool.reserve(nthreads);
        for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    flush(true);

    SpectrumGrid grid;
    grid.spec = spec;
    grid.field = cfg;
    grid.solver = opts;
    grid.values = std::move(ck.values);
    grid.flags = std::move(ck.flags);
    grid.provenance = make_provenance(opts);
    grid.complete = !stopped.load() && done_points.load() == n;
    return grid;
}

}  // namespace

void GridSpec::validate() const {
    if (n1 < 2 || n2 < 2) throw ConfigError("grid: axis point counts must be >= 2");
    if (!(max1 > min1) || !(max2 > min2))
        throw ConfigError("grid: axis ranges must satisfy max > min");
    if (!std::isfinite(fixed_value)) throw ConfigError("grid: fixed_value must be finite");
}

Momentum3 GridSpec::momentum_at(int i, int j) const {
    const double a = axis1(i), b = axis2(j);
    switch (plane) {
        case GridPlane::XY: return {a, b, fixed_value};
        case GridPlane::XZ: return {a, fixed_value, b};
        default: return {fixed_value, a, b};
    }
}

bool SpectrumGrid::any_flagged() const {
    for (std::uint8_t f : flags)
        if (f != kPointOk) return true;
    return false;
}

void FrequencyScanSpec::validate() const {
    if (!(omega_min > 0.0)) throw ConfigError("freq_scan: omega_min must be > 0");
    if (n_omega < 1) throw ConfigError("freq_scan: n_omega must be >= 1");
    if (n_omega > 1 && !(omega_max > omega_min))
        throw ConfigError("freq_scan: omega_max must exceed omega_min");
    if (!q.finite()) throw ConfigError("freq_scan: momentum must be finite");
}

int effective_worker_count(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* cap = std::getenv("DHWPAIR_MAX_WORKERS")) {
        const int c = std::atoi(cap);
        if (c >= 1 && c < n) n = c;
    }
    return n;
}

SpectrumGrid sweep_grid(const FieldConfig& cfg, const GridSpec& spec, const SolverOptions& opts,
                        const SweepOptions& sweep) {
    return run_sweep(cfg, spec, opts, sweep, false);
}

SpectrumGrid resume_sweep(const FieldConfig& cfg, const GridSpec& spec, const SolverOptions& opts,
                          const SweepOptions& sweep) {
    if (sweep.checkpoint_path.empty())
        throw ConfigError("resume: checkpoint path required");
    return run_sweep(cfg, spec, opts, sweep, true);
}

FrequencyScanResult sweep_frequency(const FieldConfig& base, const FrequencyScanSpec& scan,
                                    const SolverOptions& opts, const SweepOptions& sweep) {
    base.validate();
    scan.validate();
    opts.validate();

    FrequencyScanResult res;
    res.spec = scan;
    res.base_field = base;
    res.solver = opts;
    res.omegas.resize(scan.n_omega);
    res.values.assign(scan.n_omega, std::numeric_limits<double>::quiet_NaN());
    res.flags.assign(scan.n_omega, 0);
    res.provenance = make_provenance(opts);

    for (int k = 0; k < scan.n_omega; ++k) res.omegas[k] = scan.omega_at(k);

    parallel_for_index(
        static_cast<std::size_t>(scan.n_omega), effective_worker_count(sweep.workers),
        [&](std::size_t k) {
            FieldConfig cfg = base;
            cfg.omega = res.omegas[k];
            const PointOutcome out = run_point(scan.q, cfg, opts);
            res.values[k] = out.value;
            res.flags[k] = out.flag;
        });
    return res;
}

void parallel_for_index(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const int nthreads = static_cast<int>(std::min<std::size_t>(std::max(workers, 1), n));
    if (nthreads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int k = 0; k < nthreads; ++k)
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& t : pool) t.join();
}

}  // namespace dhwpair
