#include "dhwpair/semianalytic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dhwpair/errors.hpp"

namespace dhwpair {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kQuadTol = 1e-12;
constexpr unsigned kQuadDepth = 15;

double quad01(const auto& f) {
    return gauss_kronrod<double, 15>::integrate(f, 0.0, 1.0, kQuadDepth, kQuadTol);
}

// Integrands of g and its first two gamma-derivatives. The derivatives
// are taken inside the integral:
//   d/dgamma (1+g^2u^2)^(-1/2)   = -g u^2 (1+g^2u^2)^(-3/2)
//   d^2/dgamma^2 (1+g^2u^2)^(-1/2) = -u^2 (1+g^2u^2)^(-3/2)
//                                    + 3 g^2 u^4 (1+g^2u^2)^(-5/2)
double g_quad(double gamma) {
    return quad01([gamma](double u) {
        return std::sqrt(1.0 - u * u) / std::sqrt(1.0 + gamma * gamma * u * u);
    }) * 4.0 / std::numbers::pi;
}

double g_prime_quad(double gamma) {
    return quad01([gamma](double u) {
        const double u2 = u * u;
        const double r = 1.0 + gamma * gamma * u2;
        return -std::sqrt(1.0 - u2) * gamma * u2 / (r * std::sqrt(r));
    }) * 4.0 / std::numbers::pi;
}

double g_second_quad(double gamma) {
    return quad01([gamma](double u) {
        const double u2 = u * u;
        const double r = 1.0 + gamma * gamma * u2;
        const double r32 = r * std::sqrt(r);
        return std::sqrt(1.0 - u2) * (-u2 / r32 + 3.0 * gamma * gamma * u2 * u2 / (r32 * r));
    }) * 4.0 / std::numbers::pi;
}

RateCoefficients compute_coefficients(double gamma) {
    const double g = g_quad(gamma);
    const double gp = g_prime_quad(gamma);
    const double gpp = g_second_quad(gamma);
    const double b1 = g + 0.5 * gamma * gp;
    // b1' = 3/2 g' + gamma/2 g''
    const double b1p = 1.5 * gp + 0.5 * gamma * gpp;
    return {gamma, g, b1, -gamma * b1p};
}

int parity_sign(int n, double spin) {
    const long twice_s = std::lround(2.0 * spin);
    return ((n + twice_s) % 2 == 0) ? 1 : -1;
}

}  // namespace

double g_of_gamma(double gamma) {
    if (!(gamma >= 0.0)) throw ConfigError("g_of_gamma: gamma must be >= 0");
    return g_quad(gamma);
}

RateCoefficients rate_coefficients(double gamma) {
    if (!(gamma >= 0.0)) throw ConfigError("rate_coefficients: gamma must be >= 0");

    static std::mutex cache_mutex;
    static std::map<double, RateCoefficients> cache;
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = cache.find(gamma);
        if (it != cache.end()) return it->second;
    }
    const RateCoefficients coeffs = compute_coefficients(gamma);
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        cache.emplace(gamma, coeffs);
    }
    return coeffs;
}

RingFeaturePrediction ring_radius(int n, const FieldConfig& cfg) {
    if (n < 1) throw ConfigError("ring_radius: n must be >= 1");
    cfg.validate();
    const double mstar = effective_mass(cfg);
    const double half_energy = 0.5 * n * cfg.omega;
    RingFeaturePrediction pred;
    pred.n = n;
    pred.present = half_energy >= mstar;
    pred.radius = pred.present ? std::sqrt(half_energy * half_energy - mstar * mstar) : 0.0;
    return pred;
}

int min_photon_number(const FieldConfig& cfg) {
    cfg.validate();
    const double mstar = effective_mass(cfg);
    int n = static_cast<int>(std::floor(2.0 * mstar / cfg.omega));
    while (!(0.5 * n * cfg.omega >= mstar)) ++n;
    // floor can overshoot by one when 2 m*/omega is exactly integral
    while (n > 1 && 0.5 * (n - 1) * cfg.omega >= mstar) --n;
    return n;
}

double interference_factor(double qx, double omega, int n, double spin) {
    if (!(omega > 0.0)) throw ConfigError("interference_factor: omega must be > 0");
    const double beta_star = 2.0 * std::numbers::pi * qx / omega;
    return 1.0 + parity_sign(n, spin) * std::cos(beta_star);
}

double interference_factor_adiabatic(double qx, double omega, double gamma, int n, double spin) {
    if (!(omega > 0.0)) throw ConfigError("interference_factor_adiabatic: omega must be > 0");
    return 1.0 + parity_sign(n, spin) * std::cos(4.0 * qx / omega * std::atan(gamma));
}

std::vector<NodePoint> node_positions(int n, const FieldConfig& cfg, double spin) {
    const RingFeaturePrediction ring = ring_radius(n, cfg);
    if (!ring.present)
        throw RingAbsent("node_positions: ring below multiphoton threshold");

    // Zeros of 1 + s cos(2 pi qx/omega): at integer multiples of omega for
    // s = -1 (n + 2s odd), at half-integer multiples for s = +1.
    const bool half_ladder = parity_sign(n, spin) > 0;
    const double r = ring.radius;

    std::vector<NodePoint> points;
    const double offset = half_ladder ? 0.5 : 0.0;
    const int k_max = static_cast<int>(std::floor(r / cfg.omega + 1.0));
    for (int k = -k_max - 1; k <= k_max; ++k) {
        const double qx = (k + offset) * cfg.omega;
        if (std::abs(qx) > r) continue;
        const double qy2 = r * r - qx * qx;
        const double qy = qy2 > 0.0 ? std::sqrt(qy2) : 0.0;
        if (qy == 0.0) {
            points.push_back({qx, 0.0});
        } else {
            points.push_back({qx, -qy});
            points.push_back({qx, qy});
        }
    }
    std::sort(points.begin(), points.end(), [](const NodePoint& a, const NodePoint& b) {
        return a.qx != b.qx ? a.qx < b.qx : a.qy < b.qy;
    });
    return points;
}

std::vector<double> node_qx_values(int n, const FieldConfig& cfg, double spin) {
    std::vector<double> qx;
    for (const NodePoint& p : node_positions(n, cfg, spin))
        if (qx.empty() || qx.back() != p.qx) qx.push_back(p.qx);
    return qx;
}

void SemianalyticConfig::validate() const {
    if (!(q_factor > 0.0)) throw ConfigError("semianalytic: q_factor must be > 0");
    if (!(delta_reg_width >= 0.0))
        throw ConfigError("semianalytic: delta_reg_width must be >= 0");
    const long twice_s = std::lround(2.0 * spin);
    if (std::abs(2.0 * spin - twice_s) > 1e-12 || twice_s < 0)
        throw ConfigError("semianalytic: 2*spin must be a non-negative integer");
}

double fn_value(const Momentum3& q, int n, const FieldConfig& cfg,
                const SemianalyticConfig& sconf) {
    cfg.validate();
    sconf.validate();
    if (!(cfg.e0 > 0.0)) throw ConfigError("fn_value: requires e0 > 0");

    const RateCoefficients c = rate_coefficients(keldysh_gamma(cfg));
    const double q_perp2 = q.y * q.y + q.z * q.z;
    const double qx2 = q.x * q.x;

    double exponent = -(std::numbers::pi / cfg.e0) * (c.g + sconf.q_factor * c.b1 * q_perp2);
    if (sconf.envelope_variant == EnvelopeVariant::AsPrinted)
        exponent += c.b2 * qx2;
    else
        exponent -= (std::numbers::pi / cfg.e0) * c.b2 * qx2;

    double shell = 1.0;
    if (sconf.evaluation_mode == EvaluationMode::RingLocus) {
        if (!ring_radius(n, cfg).present)
            throw RingAbsent("fn_value: ring below multiphoton threshold");
    } else {
        const double sigma = sconf.delta_reg_width > 0.0 ? sconf.delta_reg_width
                                                         : cfg.omega / 20.0;
        const double mstar = effective_mass(cfg);
        const double omega_rms = std::sqrt(q.norm2() + mstar * mstar);
        const double arg = 2.0 * omega_rms - n * cfg.omega;
        shell = std::exp(-0.5 * arg * arg / (sigma * sigma)) /
                (sigma * std::sqrt(2.0 * std::numbers::pi));
    }

    const double prefactor = 2.0 * cfg.omega * cfg.omega / std::numbers::pi;
    return prefactor * std::exp(exponent) *
           interference_factor(q.x, cfg.omega, n, sconf.spin) * shell;
}

}  // namespace dhwpair
