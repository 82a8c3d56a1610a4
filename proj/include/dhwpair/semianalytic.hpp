#ifndef DHWPAIR_SEMIANALYTIC_HPP
#define DHWPAIR_SEMIANALYTIC_HPP

#include <vector>

#include "dhwpair/field.hpp"
#include "dhwpair/vec3.hpp"

namespace dhwpair {

// Semianalytic model of the n-photon momentum distribution: a tunneling
// envelope built from the quadrature coefficients g(gamma), b1(gamma),
// b2(gamma), an interference factor in the longitudinal momentum, and an
// energy-conservation ring 2 Omega_rms(q) = n omega with the effective
// mass from field.hpp.

// Coefficient bundle at one Keldysh parameter:
//   g(gamma)  = (4/pi) int_0^1 sqrt(1-u^2) / sqrt(1 + (gamma u)^2) du
//   b1(gamma) = g + gamma g'/2
//   b2(gamma) = -gamma b1'
// with g(0) = 1, g strictly decreasing, b2 >= 0.
struct RateCoefficients {
    double gamma;
    double g;
    double b1;
    double b2;
};

// Adaptive quadrature of g to absolute accuracy 1e-10.
double g_of_gamma(double gamma);

// g' and g'' are integrated with analytically differentiated integrands
// (no finite differencing of quadrature output). Memoized per gamma
// behind an internal lock; caching never changes values.
RateCoefficients rate_coefficients(double gamma);

// Predicted n-photon ring.
struct RingFeaturePrediction {
    int n = 0;
    double radius = 0.0;  // |q| with 2 sqrt(q^2 + m*^2) = n omega, when present
    bool present = false;
};

// present iff n omega / 2 >= m*; radius = sqrt((n omega/2)^2 - m*^2).
RingFeaturePrediction ring_radius(int n, const FieldConfig& cfg);

// Smallest n whose ring exists (n omega / 2 >= m*).
int min_photon_number(const FieldConfig& cfg);

// 1 + (-1)^(n+2s) cos(2 pi qx / omega), in [0, 2]. spin is 0 or 1/2.
double interference_factor(double qx, double omega, int n, double spin);

// The original infinite-wave form 1 + (-1)^(n+2s) cos(4 qx/omega * arctan gamma);
// approaches interference_factor as gamma -> inf. Kept for comparison.
double interference_factor_adiabatic(double qx, double omega, double gamma, int n, double spin);

struct NodePoint {
    double qx;
    double qy;
};

// Zeros of the interference factor mapped onto the ring circle: qx on the
// node ladder (spacing omega; integer or half-integer multiples depending
// on the parity of n + 2s), each with qy = +-sqrt(radius^2 - qx^2), merged
// when qy = 0. Sorted by qx, then qy. Throws RingAbsent.
std::vector<NodePoint> node_positions(int n, const FieldConfig& cfg, double spin);

// Deduplicated sorted qx values of node_positions.
std::vector<double> node_qx_values(int n, const FieldConfig& cfg, double spin);

// Placement of the b2 qx^2 term in the envelope exponent. AsPrinted keeps
// it outside the -pi/e0 bracket (growth in qx, bounded on rings);
// Bracketed moves it inside (decay in qx).
enum class EnvelopeVariant { AsPrinted, Bracketed };

// How the energy delta function is treated: evaluation restricted to the
// ring locus (weight 1), or a unit-area Gaussian of width sigma_e in
// (2 Omega_rms - n omega) for full-plane overlays.
enum class EvaluationMode { RingLocus, RegularizedDelta };

struct SemianalyticConfig {
    double q_factor = 0.88;  // weight of the transverse-momentum term
    double spin = 0.5;       // 1/2 fermions, 0 boson comparisons
    EnvelopeVariant envelope_variant = EnvelopeVariant::AsPrinted;
    EvaluationMode evaluation_mode = EvaluationMode::RingLocus;
    double delta_reg_width = 0.0;  // sigma_e; 0 = omega/20

    void validate() const;
};

// Model weight of the n-photon channel at q:
//   (2 omega^2 / pi) * w(q) * interference_factor * D
// where w(q) = exp{ -(pi/e0) [g + Q b1 (qy^2+qz^2)] + b2 qx^2 }  (AsPrinted)
//    or w(q) = exp{ -(pi/e0) [g + Q b1 (qy^2+qz^2) + b2 qx^2] }  (Bracketed)
// and D = 1 on the ring locus, or a unit-area Gaussian in RegularizedDelta
// mode. Proportional weight only; absolute scale is not meaningful.
// Throws RingAbsent in ring-locus mode for n below threshold.
double fn_value(const Momentum3& q, int n, const FieldConfig& cfg,
                const SemianalyticConfig& sconf);

}  // namespace dhwpair

#endif
