#include "dhwpair/qve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "dhwpair/errors.hpp"
#include "dhwpair/rk.hpp"

namespace dhwpair {

namespace {
// Flat layout: [f, u, v, eA_x].
constexpr int kDim = 4;
}  // namespace

PointResult qve_solve_point(const Momentum3& q, const FieldConfig& cfg,
                            const SolverOptions& opts) {
    cfg.validate();
    opts.validate();
    if (cfg.delta != 0.0)
        throw NotLinearlyPolarized("qve_solve_point: requires delta = 0");
    if (!q.finite()) throw ConfigError("qve_solve_point: momentum must be finite");

    const double eps_perp2 = 1.0 + q.y * q.y + q.z * q.z;
    const double eps_perp = std::sqrt(eps_perp2);

    auto rhs = [&cfg, &q, eps_perp2, eps_perp](double t, const double* y, double* dy) {
        const double ex = electric_field(cfg, t).x;
        const double p_par = q.x - y[3];
        const double omega2 = eps_perp2 + p_par * p_par;
        const double omega = std::sqrt(omega2);
        const double qq = ex * eps_perp / omega2;
        dy[0] = 0.5 * qq * y[1];
        dy[1] = qq * (1.0 - 2.0 * y[0]) - 2.0 * omega * y[2];
        dy[2] = 2.0 * omega * y[1];
        dy[3] = -ex;
    };

    const double t_end = opts.t_span_factor * cfg.tau;
    const double t_start = -t_end;

    RkOptions rk;
    rk.rel_tol = opts.rel_tol;
    rk.abs_tol = opts.abs_tol;
    rk.max_steps = opts.max_steps;
    rk.max_step = 0.5 * cfg.tau;
    rk.fixed_step = opts.fixed_step;

    Dopri5<kDim, decltype(rhs)> integ(rhs, rk);
    std::array<double, kDim> y{};

    double f_min = 0.0, f_max = 0.0;
    auto observer = [&f_min, &f_max](double, const double* yy) {
        f_min = std::min(f_min, yy[0]);
        f_max = std::max(f_max, yy[0]);
    };

    const double window = opts.constancy_window_periods * 2.0 * std::numbers::pi / cfg.omega;
    double f_at_check = 0.0;
    if (window > 0.0 && t_end - window > t_start) {
        integ.integrate(t_start, t_end - window, y, observer);
        f_at_check = y[0];
        integ.integrate(t_end - window, t_end, y, observer);
    } else {
        integ.integrate(t_start, t_end, y, observer);
        f_at_check = y[0];
    }

    PointResult res;
    const double f_raw = y[0];
    res.n_steps = integ.stats().n_accepted;
    res.constancy_residual = std::abs(f_raw - f_at_check);
    res.clip_flag = f_raw < -10.0 * opts.abs_tol || f_raw > 1.0 + 10.0 * opts.abs_tol;
    res.f_final = f_raw < 0.0 ? 0.0 : f_raw;
    res.f_min_seen = f_min;
    res.f_max_seen = f_max;
    return res;
}

}  // namespace dhwpair
