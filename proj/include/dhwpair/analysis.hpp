#ifndef DHWPAIR_ANALYSIS_HPP
#define DHWPAIR_ANALYSIS_HPP

#include <vector>

#include "dhwpair/field.hpp"
#include "dhwpair/semianalytic.hpp"
#include "dhwpair/sweep.hpp"

namespace dhwpair {

// Quantitative signature extraction from gridded spectra: photon-ring
// radii, interference-node positions, frequency recovery from node
// spacing, and polarization-threshold trends.

// f interpolated on concentric circles around the in-plane origin.
struct RadialProfile {
    std::vector<double> radii;   // strictly increasing
    std::vector<double> mean_f;  // angular average at each radius
    std::vector<double> max_f;   // angular maximum at each radius
};

// One extracted ring.
struct RingFeature {
    double radius = 0.0;
    int n_assigned = 0;  // photon number from 2 sqrt(r^2 + m*^2) = n omega
    double peak_height = 0.0;
};

// Nodes detected along one ring.
struct NodeSet {
    RingFeature ring;
    std::vector<NodePoint> node_points;  // (qx, qy) pairs on the circle
    std::vector<double> node_qx;         // deduplicated sorted qx values
};

struct AnalysisOptions {
    int n_radii = 0;             // 0 = auto (about two samples per grid cell)
    int n_angles_profile = 720;  // angular samples per circle in profiles
    int n_angles_nodes = 1440;   // angular samples for node detection
    double ring_prominence_ratio = 1e-3;  // vs global profile maximum
    // Acceptance band for |2 sqrt(r^2+m*^2)/omega - n|. Measured rings sit
    // above the effective-mass prediction by up to a third of a photon at
    // gamma ~ 1 (the strong-quiver regime), so the band must reach past
    // that while still excluding the half-integer ambiguity.
    double n_assign_tolerance = 0.45;
    double node_depth_ratio = 0.1;        // min vs neighboring maxima mean
    double node_qx_cluster_tol = 0.0;     // 0 = auto (1.5 grid spacings)
};

// Bilinear interpolation of grid values at in-plane coordinates (a1, a2).
double grid_interpolate(const SpectrumGrid& grid, double a1, double a2);

// Throws GridTooSmall when the in-plane origin is not strictly interior.
RadialProfile radial_profile(const SpectrumGrid& grid, int n_radii, int n_angles);

// Local maxima of the angular-max profile above the prominence threshold,
// each assigned the nearest photon number; peaks whose assignment misses
// by more than the tolerance or falls below the multiphoton threshold are
// discarded. Throws NoRingsFound when nothing survives.
std::vector<RingFeature> extract_rings(const RadialProfile& profile, const FieldConfig& cfg,
                                       const AnalysisOptions& opts = {});

// Samples f along circles spanning the ring's radial extent and keeps
// angular minima that lie at least 1/depth_ratio below their flanking
// maxima and persist across a majority of the circles (nodes are radial
// lines; single-circle minima are microstructure). Each node's qx is
// then pinned by a dense longitudinal scan at fixed transverse momentum.
// Throws RingOutsideGrid.
NodeSet detect_nodes(const SpectrumGrid& grid, const RingFeature& ring,
                     const AnalysisOptions& opts = {});

// One ring per photon number: the brightest feature of each channel
// (the rest are finite-pulse radial sidebands), sorted by radius.
std::vector<RingFeature> select_main_rings(const std::vector<RingFeature>& rings);

// Median spacing of consecutive node qx values; equals the driving
// frequency for interference carpets. Throws InsufficientNodes when
// fewer than two distinct qx values are available.
double recover_frequency(const NodeSet& nodes);

struct ThresholdPoint {
    double delta;
    double smallest_radius;
};
struct ThresholdTrend {
    std::vector<ThresholdPoint> points;  // sorted by delta
    bool non_increasing = false;
};

// Smallest extracted ring radius per polarization. Grids must share the
// field configuration apart from delta. Propagates NoRingsFound.
ThresholdTrend threshold_trend(const std::vector<const SpectrumGrid*>& grids,
                               const AnalysisOptions& opts = {});

struct ResonancePeak {
    double omega;
    double value;
    int n_assigned;  // from n omega = 2 sqrt(q^2 + m*(omega)^2)
};

// Local maxima of a frequency scan with prominence at least
// prominence_ratio times the curve maximum. Throws NoPeaks.
std::vector<ResonancePeak> resonance_peaks(const FrequencyScanResult& curve,
                                           double prominence_ratio = 1e-2);

// 1D peak/minimum utilities shared by the extractors (exposed because
// ring-locus line scans use them too).
struct Peak1D {
    int index;
    double value;
    double prominence;
    double refined_index;  // parabolic sub-sample refinement
};
std::vector<Peak1D> find_peaks_1d(const std::vector<double>& v, double min_prominence);
// Indices of local minima lying at or below depth_ratio times the mean of
// their flanking local maxima; periodic treats v as a closed loop.
std::vector<int> find_deep_minima_1d(const std::vector<double>& v, double depth_ratio,
                                     bool periodic);
// Sub-sample extremum location from a 3-point parabola around i.
double refine_extremum_1d(const std::vector<double>& v, int i, bool periodic);

}  // namespace dhwpair

#endif
