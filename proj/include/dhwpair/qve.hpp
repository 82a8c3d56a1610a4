#ifndef DHWPAIR_QVE_HPP
#define DHWPAIR_QVE_HPP

#include "dhwpair/dhw.hpp"
#include "dhwpair/field.hpp"

namespace dhwpair {

// Quantum Vlasov solver for strictly linear polarization (delta = 0).
// Standard three-ODE form with a co-integrated vector potential:
//
//   eps_perp^2 = 1 + qy^2 + qz^2
//   p_par(t)   = qx - eA_x(t)
//   Omega^2    = eps_perp^2 + p_par^2
//   Q(t)       = E_x(t) eps_perp / Omega^2
//
//   df/dt = Q u / 2
//   du/dt = Q (1 - 2 f) - 2 Omega v
//   dv/dt = 2 Omega u
//
// Deliberately shares nothing with the phase-space solver beyond the
// field evaluation, so it can serve as an independent cross-check.
// f is the per-spin occupation in [0, 1].
//
// Throws NotLinearlyPolarized when cfg.delta != 0; otherwise the same
// window/tolerance semantics and failure modes as solve_point.
PointResult qve_solve_point(const Momentum3& q, const FieldConfig& cfg,
                            const SolverOptions& opts);

}  // namespace dhwpair

#endif
