#include "dhwpair/dhw.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "dhwpair/errors.hpp"
#include "dhwpair/rk.hpp"

namespace dhwpair {

namespace {

// Flat state layout: [f, w1(3), w2(3), w3(3), eA(3)].
constexpr int kDim = 13;

inline void rhs_core(const double* y, double* dy, const Vec3& e_field, const Momentum3& q,
                     bool field_outer) {
    const double f = y[0];
    const Vec3 w1{y[1], y[2], y[3]};
    const Vec3 w2{y[4], y[5], y[6]};
    const Vec3 w3{y[7], y[8], y[9]};
    const Vec3 p{q.x - y[10], q.y - y[11], q.z - y[12]};

    const double omega2 = 1.0 + p.norm2();
    const double omega = std::sqrt(omega2);
    const double e_dot_w1 = e_field.dot(w1);
    const double p_dot_w1 = p.dot(w1);
    const double p_dot_e = p.dot(e_field);

    dy[0] = e_dot_w1 / (2.0 * omega);

    // Source along d/dt(p/Omega): E/Omega - p (p.E)/Omega^3.
    const double src = 2.0 * (1.0 - f);
    const double inv_omega = 1.0 / omega;
    const double pe_over_o3 = p_dot_e / (omega2 * omega);

    const Vec3 pxw2 = p.cross(w2);
    const double drift = (field_outer ? p_dot_w1 : e_dot_w1) / omega2;
    const Vec3 drift_dir = field_outer ? e_field : p;

    dy[1] = -drift_dir.x * drift - 2.0 * pxw2.x - 2.0 * w3.x +
            src * (e_field.x * inv_omega - p.x * pe_over_o3);
    dy[2] = -drift_dir.y * drift - 2.0 * pxw2.y - 2.0 * w3.y +
            src * (e_field.y * inv_omega - p.y * pe_over_o3);
    dy[3] = -drift_dir.z * drift - 2.0 * pxw2.z - 2.0 * w3.z +
            src * (e_field.z * inv_omega - p.z * pe_over_o3);

    const Vec3 pxw1 = p.cross(w1);
    dy[4] = -2.0 * pxw1.x;
    dy[5] = -2.0 * pxw1.y;
    dy[6] = -2.0 * pxw1.z;

    dy[7] = 2.0 * (w1.x + p.x * p_dot_w1);
    dy[8] = 2.0 * (w1.y + p.y * p_dot_w1);
    dy[9] = 2.0 * (w1.z + p.z * p_dot_w1);

    dy[10] = -e_field.x;
    dy[11] = -e_field.y;
    dy[12] = -e_field.z;
}

inline void pack(const DHWState& s, std::array<double, kDim>& y) {
    y = {s.f,    s.w1.x, s.w1.y, s.w1.z, s.w2.x,    s.w2.y,    s.w2.z,
         s.w3.x, s.w3.y, s.w3.z, s.a_pot.x, s.a_pot.y, s.a_pot.z};
}

inline DHWState unpack(const std::array<double, kDim>& y) {
    DHWState s;
    s.f = y[0];
    s.w1 = {y[1], y[2], y[3]};
    s.w2 = {y[4], y[5], y[6]};
    s.w3 = {y[7], y[8], y[9]};
    s.a_pot = {y[10], y[11], y[12]};
    return s;
}

}  // namespace

void SolverOptions::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw ConfigError("solver: tolerances must be > 0");
    if (!(t_span_factor >= 5.0))
        throw ConfigError("solver: t_span_factor must be >= 5");
    if (max_steps <= 0) throw ConfigError("solver: max_steps must be > 0");
    if (!(constancy_window_periods >= 0.0))
        throw ConfigError("solver: constancy window must be >= 0");
}

KineticMomentum kinetic_momentum(const Momentum3& q, const Vec3& e_a) {
    const Vec3 p = q - e_a;
    return {p, std::sqrt(1.0 + p.norm2())};
}

DHWState dhw_rhs(const DHWState& state, double t, const FieldConfig& cfg, const Momentum3& q,
                 H9Variant variant) {
    std::array<double, kDim> y, dy;
    pack(state, y);
    rhs_core(y.data(), dy.data(), electric_field(cfg, t), q,
             variant == H9Variant::FieldOuterMomentum);
    return unpack(dy);
}

DHWState dhw_rhs_matrix_form(const DHWState& state, double t, const FieldConfig& cfg,
                             const Momentum3& q, H9Variant variant) {
    const Vec3 e_field = electric_field(cfg, t);
    const auto [p, omega] = kinetic_momentum(q, state.a_pot);
    const double omega2 = omega * omega;
    const double p_dot_e = p.dot(e_field);

    // e1 = (1/Omega, p/Omega, 0, 0); its time derivative uses
    // dp/dt = E and dOmega/dt = (p.E)/Omega.
    std::array<double, 10> e1dot{};
    e1dot[0] = -p_dot_e / (omega2 * omega);
    const Vec3 dp_over_omega = e_field * (1.0 / omega) - p * (p_dot_e / (omega2 * omega));
    e1dot[1] = dp_over_omega.x;
    e1dot[2] = dp_over_omega.y;
    e1dot[3] = dp_over_omega.z;

    // 10x9 projector: first row (-p^T, 0, 0), then the 9x9 identity.
    double proj[10][9] = {};
    proj[0][0] = -p.x;
    proj[0][1] = -p.y;
    proj[0][2] = -p.z;
    for (int i = 0; i < 9; ++i) proj[i + 1][i] = 1.0;

    // 9x9 drift matrix from its 3x3 blocks.
    double h9[9][9] = {};
    const bool field_outer = variant == H9Variant::FieldOuterMomentum;
    const double pa[3] = {p.x, p.y, p.z};
    const double ea[3] = {e_field.x, e_field.y, e_field.z};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            // (1,1): -(p E^T) / Omega^2, or -(E p^T) under the rejected reading.
            h9[i][j] = field_outer ? -ea[i] * pa[j] / omega2 : -pa[i] * ea[j] / omega2;
            // (3,1): 2 (I + p p^T).
            h9[6 + i][j] = 2.0 * ((i == j ? 1.0 : 0.0) + pa[i] * pa[j]);
        }
    // Cross-product blocks: (-2 p x) acting on w2 in row 1 and on w1 in row 2.
    const double cross[3][3] = {{0, -p.z, p.y}, {p.z, 0, -p.x}, {-p.y, p.x, 0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            h9[i][3 + j] = -2.0 * cross[i][j];
            h9[3 + i][j] = -2.0 * cross[i][j];
        }
    // (1,3): -2 m = -2 I.
    for (int i = 0; i < 3; ++i) h9[i][6 + i] = -2.0;

    const double w9[9] = {state.w1.x, state.w1.y, state.w1.z, state.w2.x, state.w2.y,
                          state.w2.z, state.w3.x, state.w3.y, state.w3.z};

    // f' = 1/2 e1dot^T (proj w9).
    double proj_w9[10];
    for (int i = 0; i < 10; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 9; ++j) acc += proj[i][j] * w9[j];
        proj_w9[i] = acc;
    }
    double fdot = 0.0;
    for (int i = 0; i < 10; ++i) fdot += e1dot[i] * proj_w9[i];
    fdot *= 0.5;

    // w9' = H9 w9 + 2 (1 - f) * (selector e1dot); the 9x10 selector keeps
    // the last 9 components of e1dot.
    double w9dot[9];
    for (int i = 0; i < 9; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 9; ++j) acc += h9[i][j] * w9[j];
        w9dot[i] = acc + 2.0 * (1.0 - state.f) * e1dot[i + 1];
    }

    DHWState out;
    out.f = fdot;
    out.w1 = {w9dot[0], w9dot[1], w9dot[2]};
    out.w2 = {w9dot[3], w9dot[4], w9dot[5]};
    out.w3 = {w9dot[6], w9dot[7], w9dot[8]};
    out.a_pot = -e_field;
    return out;
}

PointResult solve_point(const Momentum3& q, const FieldConfig& cfg, const SolverOptions& opts) {
    cfg.validate();
    opts.validate();
    if (!q.finite()) throw ConfigError("solve_point: momentum must be finite");

    const double t_end = opts.t_span_factor * cfg.tau;
    const double t_start = -t_end;

    const bool field_outer = opts.h9_variant == H9Variant::FieldOuterMomentum;
    auto rhs = [&cfg, &q, field_outer](double t, const double* y, double* dy) {
        rhs_core(y, dy, electric_field(cfg, t), q, field_outer);
    };

    RkOptions rk;
    rk.rel_tol = opts.rel_tol;
    rk.abs_tol = opts.abs_tol;
    rk.max_steps = opts.max_steps;
    rk.max_step = 0.5 * cfg.tau;  // never lets a step hop over the pulse
    rk.fixed_step = opts.fixed_step;

    Dopri5<kDim, decltype(rhs)> integ(rhs, rk);
    std::array<double, kDim> y{};

    PointResult res;
    double f_min = 0.0, f_max = 0.0;
    auto observer = [&f_min, &f_max](double, const double* yy) {
        const double f = 0.5 * yy[0];  // per-spin scale
        f_min = std::min(f_min, f);
        f_max = std::max(f_max, f);
    };

    const double window = opts.constancy_window_periods * 2.0 * std::numbers::pi / cfg.omega;
    double f_at_check = 0.0;
    if (window > 0.0 && t_end - window > t_start) {
        integ.integrate(t_start, t_end - window, y, observer);
        f_at_check = 0.5 * y[0];
        integ.integrate(t_end - window, t_end, y, observer);
    } else {
        integ.integrate(t_start, t_end, y, observer);
        f_at_check = 0.5 * y[0];
    }

    const double f_raw = 0.5 * y[0];
    res.n_steps = integ.stats().n_accepted;
    res.constancy_residual = std::abs(f_raw - f_at_check);
    res.clip_flag = f_raw < -10.0 * opts.abs_tol || f_raw > 1.0 + 10.0 * opts.abs_tol;
    res.f_final = f_raw < 0.0 ? 0.0 : f_raw;
    res.f_min_seen = f_min;
    res.f_max_seen = f_max;
    return res;
}

}  // namespace dhwpair
