#include "dhwpair/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dhwpair/errors.hpp"
#include "dhwpair/version.hpp"

namespace dhwpair {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
    }
}

double get_num(const json& j, const char* key, double fallback, bool* present = nullptr) {
    if (!j.contains(key)) {
        if (present) *present = false;
        return fallback;
    }
    if (present) *present = true;
    if (!j.at(key).is_number())
        throw ConfigError(std::string("config: \"") + key + "\" must be a number");
    return j.at(key).get<double>();
}

FieldConfig parse_field(const json& j) {
    check_keys(j, {"e0_over_ecr", "omega_over_m", "tau_m", "phi_rad", "delta"}, "field");
    FieldConfig f;
    f.e0 = get_num(j, "e0_over_ecr", f.e0);
    f.omega = get_num(j, "omega_over_m", f.omega);
    f.tau = get_num(j, "tau_m", f.tau);
    f.phi = get_num(j, "phi_rad", f.phi);
    f.delta = get_num(j, "delta", f.delta);
    return f;
}

json field_to_json(const FieldConfig& f) {
    return {{"e0_over_ecr", f.e0},
            {"omega_over_m", f.omega},
            {"tau_m", f.tau},
            {"phi_rad", f.phi},
            {"delta", f.delta}};
}

H9Variant parse_h9(const std::string& name) {
    if (name == "momentum-outer") return H9Variant::MomentumOuterField;
    if (name == "field-outer") return H9Variant::FieldOuterMomentum;
    throw ConfigError("config: h9_variant must be \"momentum-outer\" or \"field-outer\"");
}

const char* h9_name(H9Variant v) {
    return v == H9Variant::MomentumOuterField ? "momentum-outer" : "field-outer";
}

SolverOptions parse_solver(const json& j) {
    check_keys(j,
               {"rel_tol", "abs_tol", "t_span_factor", "max_steps", "constancy_window_periods",
                "h9_variant", "fixed_step"},
               "solver");
    SolverOptions s;
    s.rel_tol = get_num(j, "rel_tol", s.rel_tol);
    s.abs_tol = get_num(j, "abs_tol", s.abs_tol);
    s.t_span_factor = get_num(j, "t_span_factor", s.t_span_factor);
    s.max_steps = static_cast<long>(get_num(j, "max_steps", static_cast<double>(s.max_steps)));
    s.constancy_window_periods =
        get_num(j, "constancy_window_periods", s.constancy_window_periods);
    s.fixed_step = get_num(j, "fixed_step", s.fixed_step);
    if (j.contains("h9_variant")) s.h9_variant = parse_h9(j.at("h9_variant").get<std::string>());
    return s;
}

json solver_to_json(const SolverOptions& s) {
    return {{"rel_tol", s.rel_tol},
            {"abs_tol", s.abs_tol},
            {"t_span_factor", s.t_span_factor},
            {"max_steps", s.max_steps},
            {"constancy_window_periods", s.constancy_window_periods},
            {"h9_variant", h9_name(s.h9_variant)},
            {"fixed_step", s.fixed_step}};
}

GridPlane parse_plane(const std::string& name) {
    if (name == "xy") return GridPlane::XY;
    if (name == "xz") return GridPlane::XZ;
    if (name == "yz") return GridPlane::YZ;
    throw ConfigError("config: plane must be \"xy\", \"xz\" or \"yz\"");
}

const char* plane_name(GridPlane p) {
    return p == GridPlane::XY ? "xy" : (p == GridPlane::XZ ? "xz" : "yz");
}

GridSpec parse_grid(const json& j) {
    check_keys(j,
               {"plane", "fixed_over_m", "q1_min_over_m", "q1_max_over_m", "n1", "q2_min_over_m",
                "q2_max_over_m", "n2"},
               "grid");
    GridSpec g;
    if (j.contains("plane")) g.plane = parse_plane(j.at("plane").get<std::string>());
    g.fixed_value = get_num(j, "fixed_over_m", 0.0);
    g.min1 = get_num(j, "q1_min_over_m", 0.0);
    g.max1 = get_num(j, "q1_max_over_m", 0.0);
    g.n1 = static_cast<int>(get_num(j, "n1", 0));
    g.min2 = get_num(j, "q2_min_over_m", 0.0);
    g.max2 = get_num(j, "q2_max_over_m", 0.0);
    g.n2 = static_cast<int>(get_num(j, "n2", 0));
    return g;
}

json grid_to_json(const GridSpec& g) {
    return {{"plane", plane_name(g.plane)},
            {"fixed_over_m", g.fixed_value},
            {"q1_min_over_m", g.min1},
            {"q1_max_over_m", g.max1},
            {"n1", g.n1},
            {"q2_min_over_m", g.min2},
            {"q2_max_over_m", g.max2},
            {"n2", g.n2}};
}

Momentum3 parse_point(const json& j, const char* where) {
    check_keys(j, {"qx_over_m", "qy_over_m", "qz_over_m"}, where);
    return {get_num(j, "qx_over_m", 0.0), get_num(j, "qy_over_m", 0.0),
            get_num(j, "qz_over_m", 0.0)};
}

// Axis labels for the sidecar, by plane.
void axis_names(GridPlane p, const char*& a1, const char*& a2, const char*& fixed) {
    switch (p) {
        case GridPlane::XY: a1 = "qx_over_m"; a2 = "qy_over_m"; fixed = "qz_over_m"; break;
        case GridPlane::XZ: a1 = "qx_over_m"; a2 = "qz_over_m"; fixed = "qy_over_m"; break;
        default: a1 = "qy_over_m"; a2 = "qz_over_m"; fixed = "qx_over_m"; break;
    }
}

json provenance_to_json(const Provenance& p, int workers) {
    return {{"engine_version", p.engine_version},
            {"timestamp", p.timestamp},
            {"h9_variant", p.h9_variant},
            {"workers", workers}};
}

void require_file(std::ifstream& in, const std::string& path) {
    if (!in) throw ConfigError("cannot open " + path);
}

}  // namespace

void PredictSpec::validate() const {
    if (n_min < 1 || n_max < n_min) throw ConfigError("predict: need 1 <= n_min <= n_max");
    const long twice_s = std::lround(2.0 * spin);
    if (std::abs(2.0 * spin - twice_s) > 1e-12 || twice_s < 0)
        throw ConfigError("predict: 2*spin must be a non-negative integer");
}

int RunConfig::task_count() const {
    return int(point.has_value()) + int(grid.has_value()) + int(freq_scan.has_value()) +
           int(predict.has_value()) + int(analyze.has_value());
}

void RunConfig::validate() const {
    field.validate();
    solver.validate();
    if (workers < 0) throw ConfigError("config: workers must be >= 0");
    if (task_count() != 1)
        throw ConfigError("config: exactly one task block required "
                          "(point, grid, freq_scan, predict or analyze)");
    if (grid) grid->validate();
    if (freq_scan) freq_scan->validate();
    if (predict) predict->validate();
    if (point && !point->finite()) throw ConfigError("config: point momentum must be finite");
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(origin + ": top level must be a JSON object");
    check_keys(j, {"field", "solver", "workers", "point", "grid", "freq_scan", "predict",
                   "analyze"},
               "top level");

    RunConfig cfg;
    try {
        if (j.contains("field")) cfg.field = parse_field(j.at("field"));
        if (j.contains("solver")) cfg.solver = parse_solver(j.at("solver"));
        cfg.workers = static_cast<int>(get_num(j, "workers", 0.0));
        if (j.contains("point")) cfg.point = parse_point(j.at("point"), "point");
        if (j.contains("grid")) cfg.grid = parse_grid(j.at("grid"));
        if (j.contains("freq_scan")) {
            const json& s = j.at("freq_scan");
            check_keys(s,
                       {"qx_over_m", "qy_over_m", "qz_over_m", "omega_min_over_m",
                        "omega_max_over_m", "n_omega"},
                       "freq_scan");
            FrequencyScanSpec scan;
            scan.q = {get_num(s, "qx_over_m", 0.0), get_num(s, "qy_over_m", 0.0),
                      get_num(s, "qz_over_m", 0.0)};
            scan.omega_min = get_num(s, "omega_min_over_m", 0.0);
            scan.omega_max = get_num(s, "omega_max_over_m", 0.0);
            scan.n_omega = static_cast<int>(get_num(s, "n_omega", 0));
            cfg.freq_scan = scan;
        }
        if (j.contains("predict")) {
            const json& p = j.at("predict");
            check_keys(p, {"n_min", "n_max", "spin"}, "predict");
            PredictSpec ps;
            ps.n_min = static_cast<int>(get_num(p, "n_min", ps.n_min));
            ps.n_max = static_cast<int>(get_num(p, "n_max", ps.n_max));
            ps.spin = get_num(p, "spin", ps.spin);
            cfg.predict = ps;
        }
        if (j.contains("analyze")) {
            const json& a = j.at("analyze");
            check_keys(a, {"grid_csv"}, "analyze");
            AnalyzeSpec as;
            if (a.contains("grid_csv")) as.grid_csv = a.at("grid_csv").get<std::string>();
            cfg.analyze = as;
        }
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    require_file(in, path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path);
}

std::string default_sidecar_path(const std::string& csv_path) {
    return csv_path + ".meta.json";
}

void write_grid_csv(const std::string& path, const SpectrumGrid& grid) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "q1,q2,f\n";
    for (int i = 0; i < grid.spec.n1; ++i)
        for (int j = 0; j < grid.spec.n2; ++j)
            out << fmt17(grid.spec.axis1(i)) << ',' << fmt17(grid.spec.axis2(j)) << ','
                << fmt17(grid.at(i, j)) << '\n';
    if (!out) throw Error("write failed for " + path);
}

void write_grid_raw(const std::string& path, const SpectrumGrid& grid) {
    static_assert(std::endian::native == std::endian::little,
                  "raw grid format is little-endian");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
    if (!out) throw Error("write failed for " + path);
}

void write_grid_sidecar(const std::string& path, const SpectrumGrid& grid, int workers) {
    const char *a1, *a2, *fixed;
    axis_names(grid.spec.plane, a1, a2, fixed);
    json flagged = json::array();
    for (int i = 0; i < grid.spec.n1; ++i)
        for (int j = 0; j < grid.spec.n2; ++j) {
            const std::uint8_t f = grid.flags[static_cast<std::size_t>(i) * grid.spec.n2 + j];
            if (f != kPointOk) flagged.push_back({i, j, f});
        }
    json j = {{"schema_version", kSidecarSchemaVersion},
              {"kind", "grid"},
              {"field", field_to_json(grid.field)},
              {"solver", solver_to_json(grid.solver)},
              {"grid", grid_to_json(grid.spec)},
              {"axes", {{"axis1", a1}, {"axis2", a2}, {"fixed", fixed}}},
              {"provenance", provenance_to_json(grid.provenance, workers)},
              {"flagged_points", flagged},
              {"complete", grid.complete}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw Error("write failed for " + path);
}

SpectrumGrid read_grid(const std::string& csv_path, const std::string& sidecar_path) {
    std::ifstream meta_in(sidecar_path);
    if (!meta_in)
        throw ConfigError("missing metadata sidecar " + sidecar_path +
                          " (units would be unknowable)");
    json meta;
    try {
        meta = json::parse(meta_in);
    } catch (const json::parse_error& e) {
        throw ConfigError(sidecar_path + ": " + e.what());
    }

    try {
        if (!meta.contains("schema_version") ||
            meta.at("schema_version").get<int>() != kSidecarSchemaVersion)
            throw ConfigError(sidecar_path + ": unsupported schema version");
        if (meta.at("kind").get<std::string>() != "grid")
            throw ConfigError(sidecar_path + ": not a grid sidecar");

        SpectrumGrid grid;
        grid.field = parse_field(meta.at("field"));
        grid.solver = parse_solver(meta.at("solver"));
        grid.spec = parse_grid(meta.at("grid"));
        grid.spec.validate();
        grid.field.validate();
        const json& prov = meta.at("provenance");
        grid.provenance.engine_version = prov.at("engine_version").get<std::string>();
        grid.provenance.timestamp = prov.at("timestamp").get<std::string>();
        grid.provenance.h9_variant = prov.at("h9_variant").get<std::string>();
        if (meta.contains("complete")) grid.complete = meta.at("complete").get<bool>();

        const std::size_t n = grid.spec.size();
        grid.values.assign(n, 0.0);
        grid.flags.assign(n, 0);
        for (const auto& fp : meta.at("flagged_points")) {
            const int i = fp.at(0).get<int>(), j = fp.at(1).get<int>();
            if (i < 0 || i >= grid.spec.n1 || j < 0 || j >= grid.spec.n2)
                throw ConfigError(sidecar_path + ": flagged point out of range");
            grid.flags[static_cast<std::size_t>(i) * grid.spec.n2 + j] =
                fp.at(2).get<std::uint8_t>();
        }

        std::ifstream csv(csv_path);
        if (!csv) throw ConfigError("cannot open " + csv_path);
        std::string line;
        if (!std::getline(csv, line) || line != "q1,q2,f")
            throw ConfigError(csv_path + ": expected header \"q1,q2,f\"");
        for (std::size_t k = 0; k < n; ++k) {
            if (!std::getline(csv, line))
                throw ConfigError(csv_path + ": truncated (expected " + std::to_string(n) +
                                  " data rows)");
            double a, b, v;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &v) != 3)
                throw ConfigError(csv_path + ": malformed row " + std::to_string(k + 2));
            const int i = static_cast<int>(k) / grid.spec.n2;
            const int j = static_cast<int>(k) % grid.spec.n2;
            // Guard against a CSV that does not belong to the sidecar.
            const double tol1 = 1e-9 * (std::abs(grid.spec.axis1(i)) + 1.0);
            const double tol2 = 1e-9 * (std::abs(grid.spec.axis2(j)) + 1.0);
            if (std::abs(a - grid.spec.axis1(i)) > tol1 ||
                std::abs(b - grid.spec.axis2(j)) > tol2)
                throw ConfigError(csv_path + ": row " + std::to_string(k + 2) +
                                  " does not match the sidecar lattice");
            grid.values[k] = v;
        }
        return grid;
    } catch (const json::exception& e) {
        throw ConfigError(sidecar_path + ": " + e.what());
    }
}

void write_curve_csv(const std::string& path, const FrequencyScanResult& curve) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "omega,f\n";
    for (std::size_t k = 0; k < curve.omegas.size(); ++k)
        out << fmt17(curve.omegas[k]) << ',' << fmt17(curve.values[k]) << '\n';
    if (!out) throw Error("write failed for " + path);
}

void write_curve_sidecar(const std::string& path, const FrequencyScanResult& curve,
                         int workers) {
    json flagged = json::array();
    for (std::size_t k = 0; k < curve.flags.size(); ++k)
        if (curve.flags[k] != kPointOk) flagged.push_back({k, curve.flags[k]});
    json j = {{"schema_version", kSidecarSchemaVersion},
              {"kind", "freq_scan"},
              {"field", field_to_json(curve.base_field)},
              {"solver", solver_to_json(curve.solver)},
              {"freq_scan",
               {{"qx_over_m", curve.spec.q.x},
                {"qy_over_m", curve.spec.q.y},
                {"qz_over_m", curve.spec.q.z},
                {"omega_min_over_m", curve.spec.omega_min},
                {"omega_max_over_m", curve.spec.omega_max},
                {"n_omega", curve.spec.n_omega}}},
              {"provenance", provenance_to_json(curve.provenance, workers)},
              {"flagged_points", flagged}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw Error("write failed for " + path);
}

}  // namespace dhwpair
