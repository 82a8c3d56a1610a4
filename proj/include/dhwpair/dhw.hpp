#ifndef DHWPAIR_DHW_HPP
#define DHWPAIR_DHW_HPP

#include <cstdint>

#include "dhwpair/field.hpp"
#include "dhwpair/vec3.hpp"

namespace dhwpair {

// Reduced phase-space (Wigner) description of pair creation in a
// homogeneous time-dependent electric field: a 10-component ODE system
// per canonical momentum q, consisting of the occupation-like scalar f
// and an auxiliary 9-vector (w1, w2, w3), plus the co-integrated vector
// potential.
//
// The integrated scalar is the spin-summed occupation (bounded by 2).
// Reported occupations are per spin state, f in [0, 1], which matches
// the quantum Vlasov normalization used by the oracle solver.

// Integration state at one momentum point. Initial condition at the far
// past: f = 0, w1 = w2 = w3 = 0, a_pot = 0.
struct DHWState {
    double f = 0.0;  // spin-summed occupation scalar
    Vec3 w1, w2, w3;
    Vec3 a_pot;  // e*A(t) in units of m, A(-inf) = 0
};

// p = q - eA and the corresponding one-particle energy.
struct KineticMomentum {
    Vec3 p;
    double omega_p;  // sqrt(1 + |p|^2) >= 1
};

KineticMomentum kinetic_momentum(const Momentum3& q, const Vec3& e_a);

// Reading of the momentum/field coupling block in the 9x9 drift matrix.
enum class H9Variant : std::uint8_t {
    // w1 -> -p (E . w1) / Omega^2  (default; validated against the
    // quantum Vlasov oracle at delta = 0)
    MomentumOuterField = 0,
    // w1 -> -E (p . w1) / Omega^2  (rejected reading, kept so the oracle
    // test can demonstrate that it fails)
    FieldOuterMomentum = 1,
};

struct SolverOptions {
    double rel_tol = 1e-7;
    double abs_tol = 1e-12;
    double t_span_factor = 8.0;  // integrate t in [-c tau, +c tau], c >= 5
    long max_steps = 10'000'000;
    double constancy_window_periods = 1.0;  // laser periods before t_end
    H9Variant h9_variant = H9Variant::MomentumOuterField;
    double fixed_step = 0.0;  // > 0: fixed-step debug mode

    void validate() const;  // throws ConfigError
};

struct PointResult {
    double f_final = 0.0;           // per-spin occupation, >= 0 after clamping
    long n_steps = 0;               // accepted integrator steps
    double constancy_residual = 0;  // |f(t_end) - f(t_end - window)|
    bool clip_flag = false;         // f left [0,1] by more than 10*abs_tol
    double f_min_seen = 0.0;        // running bounds of f(t) over the run
    double f_max_seen = 0.0;
};

// Time derivative of the full state. Closed-form right-hand side:
//
//   d(eA)/dt = -E
//   df/dt    = (E . w1) / (2 Omega)
//   dw1/dt   = -p (E . w1)/Omega^2 - 2 p x w2 - 2 w3
//              + 2 (1 - f) (E/Omega - p (p . E)/Omega^3)
//   dw2/dt   = -2 p x w1
//   dw3/dt   = 2 w1 + 2 p (p . w1)
//
// with p = q - eA and Omega^2 = 1 + |p|^2 (e and m absorbed by the unit
// conventions in field.hpp). Total function of finite inputs.
DHWState dhw_rhs(const DHWState& state, double t, const FieldConfig& cfg, const Momentum3& q,
                 H9Variant variant = H9Variant::MomentumOuterField);

// Reference implementation that assembles the derivative from the block
// matrices (the 10x9 projector, the 9x10 selector and the 9x9 drift
// matrix) and the time derivative of the vacuum direction
// e1 = (1/Omega, p/Omega, 0, 0). Algebraically identical to dhw_rhs; kept
// as a transcription check, not used in the hot loop.
DHWState dhw_rhs_matrix_form(const DHWState& state, double t, const FieldConfig& cfg,
                             const Momentum3& q,
                             H9Variant variant = H9Variant::MomentumOuterField);

// Integrates one momentum point from vacuum initial conditions at
// t = -c tau to t = +c tau and reports the asymptotic per-spin
// occupation. Pure and reentrant; deterministic for fixed inputs.
// Throws StepLimitExceeded / NonFiniteState on solver failure.
PointResult solve_point(const Momentum3& q, const FieldConfig& cfg, const SolverOptions& opts);

}  // namespace dhwpair

#endif
