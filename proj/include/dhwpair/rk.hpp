#ifndef DHWPAIR_RK_HPP
#define DHWPAIR_RK_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "dhwpair/errors.hpp"

namespace dhwpair {

// Adaptive embedded Runge-Kutta pair: the Dormand-Prince 5(4) scheme with
// FSAL and PI (Lund-stabilized) step-size control. Small fixed-dimension
// systems only; state lives in std::array, no allocation per step.
//
// RHS callable signature: rhs(double t, const double* y, double* dydt).

struct RkOptions {
    double rel_tol = 1e-7;
    double abs_tol = 1e-12;
    long max_steps = 10'000'000;  // accepted + rejected attempts
    double max_step = 0.0;        // cap on |h| (0 = unlimited)
    double initial_step = 0.0;    // 0 = span * 1e-4
    double fixed_step = 0.0;      // > 0: no adaptivity, constant h (debug aid)
};

struct RkStats {
    long n_accepted = 0;
    long n_rejected = 0;
    long n_rhs = 0;
};

template <int N, class Rhs>
class Dopri5 {
  public:
    Dopri5(Rhs rhs, const RkOptions& opts) : rhs_(rhs), opts_(opts) {}

    const RkStats& stats() const { return stats_; }

    // Advances y from t0 to t1 (t1 > t0). Observer is called after every
    // accepted step as observer(t, y). Throws StepLimitExceeded and
    // NonFiniteState.
    template <class Observer>
    void integrate(double t0, double t1, std::array<double, N>& y, Observer&& observer) {
        if (t1 <= t0) return;
        if (opts_.fixed_step > 0.0) {
            integrate_fixed(t0, t1, y, observer);
            return;
        }

        double t = t0;
        double h = opts_.initial_step > 0.0 ? opts_.initial_step : (t1 - t0) * 1e-4;
        if (opts_.max_step > 0.0) h = std::min(h, opts_.max_step);

        std::array<double, N> k1;
        rhs_(t, y.data(), k1.data());
        ++stats_.n_rhs;

        double facold = 1e-4;  // Lund stabilization memory
        bool last_rejected = false;

        while (t < t1) {
            if (stats_.n_accepted + stats_.n_rejected >= opts_.max_steps)
                throw StepLimitExceeded("rk: step limit exceeded");

            bool clipped = false;
            if (t + h >= t1) {
                h = t1 - t;
                clipped = true;
            }

            const double err = attempt_step(t, h, y, k1);

            if (err <= 1.0) {
                ++stats_.n_accepted;
                t = clipped ? t1 : t + h;
                y = ynew_;
                k1 = k7_;  // FSAL
                for (double v : y)
                    if (!std::isfinite(v)) throw NonFiniteState("rk: state is not finite");
                observer(t, y.data());

                facold = std::max(err, 1e-4);
                double fac = fac11_ / std::pow(facold_prev_, kBeta);
                fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
                double hnew = h / fac;
                if (last_rejected) hnew = std::min(hnew, h);
                if (opts_.max_step > 0.0) hnew = std::min(hnew, opts_.max_step);
                h = hnew;
                facold_prev_ = facold;
                last_rejected = false;
            } else {
                ++stats_.n_rejected;
                h /= std::min(1.0 / kFacMin, fac11_ / kSafety);
                last_rejected = true;
            }
        }
    }

    void integrate(double t0, double t1, std::array<double, N>& y) {
        integrate(t0, t1, y, [](double, const double*) {});
    }

  private:
    // One trial step of size h from (t, y); fills ynew_, k7_, fac11_ and
    // returns the scaled error norm.
    double attempt_step(double t, double h, const std::array<double, N>& y,
                        const std::array<double, N>& k1) {
        std::array<double, N> tmp;
        auto& k2 = ks_[0];
        auto& k3 = ks_[1];
        auto& k4 = ks_[2];
        auto& k5 = ks_[3];
        auto& k6 = ks_[4];

        for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * kA21 * k1[i];
        rhs_(t + kC2 * h, tmp.data(), k2.data());
        for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * (kA31 * k1[i] + kA32 * k2[i]);
        rhs_(t + kC3 * h, tmp.data(), k3.data());
        for (int i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
        rhs_(t + kC4 * h, tmp.data(), k4.data());
        for (int i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] + kA54 * k4[i]);
        rhs_(t + kC5 * h, tmp.data(), k5.data());
        for (int i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] + kA64 * k4[i] +
                                 kA65 * k5[i]);
        rhs_(t + h, tmp.data(), k6.data());
        for (int i = 0; i < N; ++i)
            ynew_[i] = y[i] + h * (kA71 * k1[i] + kA73 * k3[i] + kA74 * k4[i] + kA75 * k5[i] +
                                   kA76 * k6[i]);
        rhs_(t + h, ynew_.data(), k7_.data());
        stats_.n_rhs += 6;

        double err2 = 0.0;
        for (int i = 0; i < N; ++i) {
            const double e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] +
                                  kE6 * k6[i] + kE7 * k7_[i]);
            const double scale =
                opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
            const double q = e / scale;
            err2 += q * q;
        }
        const double err = std::sqrt(err2 / N);
        fac11_ = std::pow(std::max(err, 1e-30), kExpo1);
        return err;
    }

    template <class Observer>
    void integrate_fixed(double t0, double t1, std::array<double, N>& y, Observer&& observer) {
        std::array<double, N> k1;
        double t = t0;
        const double h0 = opts_.fixed_step;
        rhs_(t, y.data(), k1.data());
        ++stats_.n_rhs;
        while (t < t1) {
            if (stats_.n_accepted >= opts_.max_steps)
                throw StepLimitExceeded("rk: step limit exceeded");
            const double h = std::min(h0, t1 - t);
            attempt_step(t, h, y, k1);
            y = ynew_;
            k1 = k7_;
            t = (h == h0) ? t + h : t1;
            ++stats_.n_accepted;
            for (double v : y)
                if (!std::isfinite(v)) throw NonFiniteState("rk: state is not finite");
            observer(t, y.data());
        }
    }

    // Dormand-Prince 5(4) tableau.
    static constexpr double kC2 = 1.0 / 5.0, kC3 = 3.0 / 10.0, kC4 = 4.0 / 5.0, kC5 = 8.0 / 9.0;
    static constexpr double kA21 = 1.0 / 5.0;
    static constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
    static constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
    static constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                            kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
    static constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                            kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                            kA65 = -5103.0 / 18656.0;
    static constexpr double kA71 = 35.0 / 384.0, kA73 = 500.0 / 1113.0, kA74 = 125.0 / 192.0,
                            kA75 = -2187.0 / 6784.0, kA76 = 11.0 / 84.0;
    // 5th-order minus embedded 4th-order weights.
    static constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                            kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;
    // Controller constants (PI with beta-stabilization).
    static constexpr double kSafety = 0.9;
    static constexpr double kBeta = 0.04;
    static constexpr double kExpo1 = 0.2 - kBeta * 0.75;
    static constexpr double kFacMin = 0.2;   // strongest shrink per step
    static constexpr double kFacMax = 10.0;  // strongest growth per step

    Rhs rhs_;
    RkOptions opts_;
    RkStats stats_;
    std::array<std::array<double, N>, 5> ks_;
    std::array<double, N> ynew_;
    std::array<double, N> k7_;
    double fac11_ = 1.0;
    double facold_prev_ = 1e-4;
};

}  // namespace dhwpair

#endif
