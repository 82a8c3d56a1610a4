#ifndef DHWPAIR_FIELD_HPP
#define DHWPAIR_FIELD_HPP

#include "dhwpair/vec3.hpp"

namespace dhwpair {

// Unit conventions used throughout the library (hbar = c = 1):
//
//   * the electron mass m == 1 sets the energy/momentum unit,
//   * times are measured in 1/m, frequencies in m,
//   * field strengths are measured in units of the critical field
//     E_cr = m^2/e, so the coupling e never appears on its own:
//     e * E_phys = e0 * m^2 exactly.
//
// Every quantity below is the dimensionless number in these units.

// Elliptically polarized, Gaussian-enveloped electric field pulse.
//
//   E(t) = e0/sqrt(1+delta^2) * exp(-t^2/(2 tau^2))
//          * (cos(omega t + phi), delta * sin(omega t + phi), 0)
//
// The 1/sqrt(1+delta^2) factor keeps the laser intensity fixed across
// polarizations. e0 is the total amplitude before that split.
struct FieldConfig {
    double e0 = 0.0;      // peak strength, units of E_cr (>= 0; 0 = vacuum)
    double omega = 0.0;   // angular frequency, units of m (> 0)
    double tau = 100.0;   // pulse duration, units of 1/m (> 0)
    double phi = 0.0;     // carrier phase, radians
    double delta = 0.0;   // polarization in [-1, 1]: 0 linear, 1 circular

    // Throws ConfigError on out-of-range parameters.
    void validate() const;
};

// Derived dimensionless parameters of a pulse.
struct DerivedParams {
    double gamma;  // Keldysh parameter omega/e0
    double mstar;  // effective mass sqrt(1 + e0^2/(2 omega^2)), units of m
};

// E(t) in units of E_cr. The z component is identically zero and
// |E(t)| <= e0 for all t and delta. Total function; cfg assumed valid.
Vec3 electric_field(const FieldConfig& cfg, double t);

// Keldysh adiabatic parameter gamma = omega/e0. Throws ConfigError when
// e0 = 0 (undefined).
double keldysh_gamma(const FieldConfig& cfg);

// Field-dressed effective mass m* = sqrt(1 + e0^2/(2 omega^2)) in units
// of m. Independent of delta and phi: the intensity normalization keeps
// the cycle-averaged E^2 identical for all polarizations.
double effective_mass(const FieldConfig& cfg);

DerivedParams derived_params(const FieldConfig& cfg);

// Closed-form value of -integral of E(t) dt over the whole real line,
// i.e. the residual e*A(+inf) when A(-inf) = 0 (units of m):
//
//   x: -e0/sqrt(1+delta^2) * tau * sqrt(2 pi) * exp(-omega^2 tau^2 / 2) * cos(phi)
//   y: -e0 delta/sqrt(1+delta^2) * tau * sqrt(2 pi) * exp(-omega^2 tau^2 / 2) * sin(phi)
//   z: 0
//
// Diagnostic only: the solvers co-integrate A(t), and this pins down what
// the accumulated value must be once the pulse has passed.
Vec3 vector_potential_tail(const FieldConfig& cfg);

}  // namespace dhwpair

#endif
