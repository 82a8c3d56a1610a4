#include "dhwpair/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dhwpair/errors.hpp"
#include "dhwpair/semianalytic.hpp"

namespace dhwpair {

namespace {

double spacing1(const GridSpec& s) { return (s.max1 - s.min1) / (s.n1 - 1); }
double spacing2(const GridSpec& s) { return (s.max2 - s.min2) / (s.n2 - 1); }

// Largest circle around the in-plane origin fully inside the grid.
double max_circle_radius(const GridSpec& s) {
    return std::min(std::min(-s.min1, s.max1), std::min(-s.min2, s.max2));
}

}  // namespace

double grid_interpolate(const SpectrumGrid& grid, double a1, double a2) {
    const GridSpec& s = grid.spec;
    const double d1 = spacing1(s), d2 = spacing2(s);
    double x = (a1 - s.min1) / d1;
    double y = (a2 - s.min2) / d2;
    x = std::clamp(x, 0.0, static_cast<double>(s.n1 - 1));
    y = std::clamp(y, 0.0, static_cast<double>(s.n2 - 1));
    const int i = std::min(static_cast<int>(x), s.n1 - 2);
    const int j = std::min(static_cast<int>(y), s.n2 - 2);
    const double fx = x - i, fy = y - j;
    const double v00 = grid.at(i, j), v10 = grid.at(i + 1, j);
    const double v01 = grid.at(i, j + 1), v11 = grid.at(i + 1, j + 1);
    return v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) + v01 * (1 - fx) * fy +
           v11 * fx * fy;
}

RadialProfile radial_profile(const SpectrumGrid& grid, int n_radii, int n_angles) {
    const GridSpec& s = grid.spec;
    if (!(s.min1 < 0.0 && s.max1 > 0.0 && s.min2 < 0.0 && s.max2 > 0.0))
        throw GridTooSmall("radial_profile: grid must cover the in-plane origin");
    const double r_max = max_circle_radius(s);
    if (n_radii < 2 || n_angles < 4 || !(r_max > std::max(spacing1(s), spacing2(s))))
        throw GridTooSmall("radial_profile: not enough room for circles");

    RadialProfile prof;
    prof.radii.resize(n_radii);
    prof.mean_f.resize(n_radii);
    prof.max_f.resize(n_radii);
    for (int k = 0; k < n_radii; ++k) {
        const double r = r_max * (k + 1) / n_radii;
        double acc = 0.0, mx = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < n_angles; ++a) {
            const double th = 2.0 * std::numbers::pi * a / n_angles;
            const double v = grid_interpolate(grid, r * std::cos(th), r * std::sin(th));
            acc += v;
            mx = std::max(mx, v);
        }
        prof.radii[k] = r;
        prof.mean_f[k] = acc / n_angles;
        prof.max_f[k] = mx;
    }
    return prof;
}

std::vector<Peak1D> find_peaks_1d(const std::vector<double>& v, double min_prominence) {
    std::vector<Peak1D> peaks;
    const int n = static_cast<int>(v.size());
    for (int i = 1; i + 1 < n; ++i) {
        if (!(v[i] > v[i - 1]) || !(v[i] > v[i + 1])) continue;
        // Prominence: walk out to the first higher sample on each side,
        // tracking the lowest valley; boundary counts as a base.
        double left_min = v[i], right_min = v[i];
        for (int k = i - 1; k >= 0; --k) {
            if (v[k] > v[i]) break;
            left_min = std::min(left_min, v[k]);
        }
        for (int k = i + 1; k < n; ++k) {
            if (v[k] > v[i]) break;
            right_min = std::min(right_min, v[k]);
        }
        const double prom = v[i] - std::max(left_min, right_min);
        if (prom >= min_prominence)
            peaks.push_back({i, v[i], prom, refine_extremum_1d(v, i, false)});
    }
    return peaks;
}

std::vector<int> find_deep_minima_1d(const std::vector<double>& v, double depth_ratio,
                                     bool periodic) {
    const int n = static_cast<int>(v.size());
    std::vector<int> out;
    if (n < 3) return out;
    auto at = [&](int i) { return v[((i % n) + n) % n]; };
    const int lo = periodic ? 0 : 1;
    const int hi = periodic ? n : n - 1;
    for (int i = lo; i < hi; ++i) {
        if (!(at(i) < at(i - 1)) || !(at(i) <= at(i + 1))) continue;
        // Nearest local maximum on each side: walk while values keep
        // rising away from the minimum (at most one full turn).
        int kl = i - 1;
        for (int steps = 0; steps < n; ++steps) {
            if (!periodic && kl == 0) break;
            if (!(at(kl - 1) >= at(kl))) break;
            --kl;
        }
        int kr = i + 1;
        for (int steps = 0; steps < n; ++steps) {
            if (!periodic && kr == n - 1) break;
            if (!(at(kr + 1) >= at(kr))) break;
            ++kr;
        }
        if (at(i) <= depth_ratio * 0.5 * (at(kl) + at(kr))) out.push_back(i);
    }
    return out;
}

double refine_extremum_1d(const std::vector<double>& v, int i, bool periodic) {
    const int n = static_cast<int>(v.size());
    if (!periodic && (i <= 0 || i >= n - 1)) return i;
    auto at = [&](int k) { return v[((k % n) + n) % n]; };
    const double a = at(i - 1), b = at(i), c = at(i + 1);
    const double denom = a - 2.0 * b + c;
    if (denom == 0.0) return i;
    const double shift = 0.5 * (a - c) / denom;
    return i + std::clamp(shift, -0.5, 0.5);
}

std::vector<RingFeature> extract_rings(const RadialProfile& profile, const FieldConfig& cfg,
                                       const AnalysisOptions& opts) {
    cfg.validate();
    const auto& v = profile.max_f;
    if (v.size() < 3) throw NoRingsFound("extract_rings: profile too short");
    const double global_max = *std::max_element(v.begin(), v.end());
    if (!(global_max > 0.0)) throw NoRingsFound("extract_rings: empty profile");

    const double mstar = effective_mass(cfg);
    const int n_min = min_photon_number(cfg);
    const double dr = profile.radii[1] - profile.radii[0];

    std::vector<RingFeature> rings;
    for (const Peak1D& p : find_peaks_1d(v, opts.ring_prominence_ratio * global_max)) {
        const double r = profile.radii[0] + dr * (p.refined_index - 0.0);
        const double n_exact = 2.0 * std::sqrt(r * r + mstar * mstar) / cfg.omega;
        const int n = static_cast<int>(std::lround(n_exact));
        if (std::abs(n_exact - n) > opts.n_assign_tolerance) continue;
        if (n < n_min) continue;  // below the multiphoton threshold
        rings.push_back({r, n, p.value});
    }
    if (rings.empty()) throw NoRingsFound("extract_rings: no assignable ring peaks");
    std::sort(rings.begin(), rings.end(),
              [](const RingFeature& a, const RingFeature& b) { return a.radius < b.radius; });
    return rings;
}

namespace {

// One detected angular minimum, keyed by which half-plane it lies in.
struct CircleMinimum {
    double qx;
    int side;  // -1: qy < 0, +1: qy > 0, 0: on the qx axis
};

}  // namespace

NodeSet detect_nodes(const SpectrumGrid& grid, const RingFeature& ring,
                     const AnalysisOptions& opts) {
    const double r0 = ring.radius;
    if (!(r0 > 0.0) || r0 > max_circle_radius(grid.spec))
        throw RingOutsideGrid("detect_nodes: ring circle leaves the grid");

    const double dx = std::max(spacing1(grid.spec), spacing2(grid.spec));
    double tol = opts.node_qx_cluster_tol;
    if (tol <= 0.0) tol = 1.5 * dx;

    // Finite pulses give the ring a radial width, and cross-channel
    // microstructure contaminates any single circle. Nodes are radial
    // lines, so they are detected on several circles spanning the ring
    // and only angular minima persistent across a majority survive.
    const int n_circles = 5;
    const double band = std::min(2.0 * dx, 0.5 * r0);
    const int m = std::max(opts.n_angles_nodes, 720);

    struct Group {
        double qx_sum = 0.0;
        int hits = 0;
        int side = 0;
    };
    std::vector<Group> groups;

    for (int c = 0; c < n_circles; ++c) {
        const double r = r0 - band + 2.0 * band * c / (n_circles - 1);
        if (r <= 0.0 || r > max_circle_radius(grid.spec)) continue;
        std::vector<double> v(m);
        for (int a = 0; a < m; ++a) {
            const double th = 2.0 * std::numbers::pi * a / m;
            v[a] = grid_interpolate(grid, r * std::cos(th), r * std::sin(th));
        }
        // Per-circle minima, deduplicated per side within the cluster tol.
        std::vector<CircleMinimum> mins;
        for (int i : find_deep_minima_1d(v, opts.node_depth_ratio, true)) {
            const double idx = refine_extremum_1d(v, i, true);
            const double th = 2.0 * std::numbers::pi * idx / m;
            const double qx = r * std::cos(th), qy = r * std::sin(th);
            const int side = std::abs(qy) < 0.5 * dx ? 0 : (qy > 0 ? 1 : -1);
            bool merged = false;
            for (CircleMinimum& cm : mins)
                if (cm.side == side && std::abs(cm.qx - qx) <= tol) {
                    merged = true;
                    break;
                }
            if (!merged) mins.push_back({qx, side});
        }
        // Accumulate into cross-circle groups.
        for (const CircleMinimum& cm : mins) {
            bool found = false;
            for (Group& g : groups)
                if (g.side == cm.side && std::abs(g.qx_sum / g.hits - cm.qx) <= 2.5 * dx) {
                    g.qx_sum += cm.qx;
                    ++g.hits;
                    found = true;
                    break;
                }
            if (!found) groups.push_back({cm.qx, 1, cm.side});
        }
    }

    NodeSet nodes;
    nodes.ring = ring;
    for (const Group& g : groups) {
        if (g.hits < (n_circles + 1) / 2) continue;  // not persistent
        double qx = g.qx_sum / g.hits;
        // Node lines run along constant qx: pin the position by a dense
        // longitudinal scan at the fixed transverse momentum of the
        // nominal circle.
        const double qy_abs2 = r0 * r0 - qx * qx;
        const double qy = (g.side == 0 ? 0.0 : g.side) *
                          std::sqrt(std::max(0.0, qy_abs2));
        double best_qx = qx, best_v = grid_interpolate(grid, qx, qy);
        for (int k = -60; k <= 60; ++k) {
            const double x = qx + 2.5 * dx * k / 60.0;
            if (std::abs(x) >= r0) continue;
            const double v = grid_interpolate(grid, x, qy);
            if (v < best_v) {
                best_v = v;
                best_qx = x;
            }
        }
        qx = best_qx;
        const double qy_final = std::sqrt(std::max(0.0, r0 * r0 - qx * qx));
        if (g.side == 0)
            nodes.node_points.push_back({qx, 0.0});
        else
            nodes.node_points.push_back({qx, g.side * qy_final});
    }

    std::sort(nodes.node_points.begin(), nodes.node_points.end(),
              [](const NodePoint& a, const NodePoint& b) {
                  return a.qx != b.qx ? a.qx < b.qx : a.qy < b.qy;
              });

    // Pair +-qy partners: cluster qx values and report cluster means.
    std::size_t i = 0;
    while (i < nodes.node_points.size()) {
        double acc = 0.0;
        std::size_t j = i;
        while (j < nodes.node_points.size() &&
               nodes.node_points[j].qx - nodes.node_points[i].qx <= tol)
            acc += nodes.node_points[j++].qx;
        nodes.node_qx.push_back(acc / (j - i));
        i = j;
    }
    return nodes;
}

std::vector<RingFeature> select_main_rings(const std::vector<RingFeature>& rings) {
    // Finite pulses decorate each photon channel with weaker radial
    // sidebands; the channel's ring is its brightest feature.
    std::vector<RingFeature> main;
    for (const RingFeature& r : rings) {
        bool placed = false;
        for (RingFeature& m : main)
            if (m.n_assigned == r.n_assigned) {
                if (r.peak_height > m.peak_height) m = r;
                placed = true;
                break;
            }
        if (!placed) main.push_back(r);
    }
    std::sort(main.begin(), main.end(),
              [](const RingFeature& a, const RingFeature& b) { return a.radius < b.radius; });
    return main;
}

double recover_frequency(const NodeSet& nodes) {
    const auto& qx = nodes.node_qx;
    if (qx.size() < 2)
        throw InsufficientNodes("recover_frequency: need at least two distinct node qx");
    std::vector<double> diffs(qx.size() - 1);
    for (std::size_t i = 0; i + 1 < qx.size(); ++i) diffs[i] = qx[i + 1] - qx[i];
    std::sort(diffs.begin(), diffs.end());
    const std::size_t n = diffs.size();
    return n % 2 == 1 ? diffs[n / 2] : 0.5 * (diffs[n / 2 - 1] + diffs[n / 2]);
}

ThresholdTrend threshold_trend(const std::vector<const SpectrumGrid*>& grids,
                               const AnalysisOptions& opts) {
    if (grids.empty()) throw ConfigError("threshold_trend: no grids");
    for (const SpectrumGrid* g : grids) {
        const FieldConfig &a = grids.front()->field, &b = g->field;
        if (a.e0 != b.e0 || a.omega != b.omega || a.tau != b.tau || a.phi != b.phi)
            throw ConfigError("threshold_trend: grids differ beyond polarization");
    }

    ThresholdTrend trend;
    for (const SpectrumGrid* g : grids) {
        int n_radii = opts.n_radii;
        if (n_radii <= 0) {
            const double dr = 0.5 * std::min(spacing1(g->spec), spacing2(g->spec));
            n_radii = std::max(16, static_cast<int>(max_circle_radius(g->spec) / dr));
        }
        const RadialProfile prof = radial_profile(*g, n_radii, opts.n_angles_profile);
        const auto rings = select_main_rings(extract_rings(prof, g->field, opts));
        trend.points.push_back({g->field.delta, rings.front().radius});
    }
    std::sort(trend.points.begin(), trend.points.end(),
              [](const ThresholdPoint& a, const ThresholdPoint& b) { return a.delta < b.delta; });
    trend.non_increasing = true;
    for (std::size_t i = 0; i + 1 < trend.points.size(); ++i)
        if (trend.points[i + 1].smallest_radius > trend.points[i].smallest_radius)
            trend.non_increasing = false;
    return trend;
}

std::vector<ResonancePeak> resonance_peaks(const FrequencyScanResult& curve,
                                           double prominence_ratio) {
    const auto& v = curve.values;
    if (v.size() < 3) throw NoPeaks("resonance_peaks: curve too short");
    const double global_max = *std::max_element(v.begin(), v.end());
    if (!(global_max > 0.0)) throw NoPeaks("resonance_peaks: flat curve");

    const double q2 = curve.spec.q.norm2();
    std::vector<ResonancePeak> peaks;
    for (const Peak1D& p : find_peaks_1d(v, prominence_ratio * global_max)) {
        const double d_omega = curve.spec.n_omega > 1 ? curve.omegas[1] - curve.omegas[0] : 0.0;
        const double omega = curve.omegas[0] + d_omega * p.refined_index;
        FieldConfig cfg = curve.base_field;
        cfg.omega = omega;
        const double mstar = effective_mass(cfg);
        const int n = static_cast<int>(std::lround(2.0 * std::sqrt(q2 + mstar * mstar) / omega));
        peaks.push_back({omega, p.value, n});
    }
    if (peaks.empty()) throw NoPeaks("resonance_peaks: no prominent peaks");
    return peaks;
}

}  // namespace dhwpair
