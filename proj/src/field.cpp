#include "dhwpair/field.hpp"

#include <cmath>
#include <numbers>

#include "dhwpair/errors.hpp"

namespace dhwpair {

void FieldConfig::validate() const {
    if (!(e0 >= 0.0) || !std::isfinite(e0))
        throw ConfigError("field: e0 must be finite and >= 0");
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw ConfigError("field: omega must be finite and > 0");
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ConfigError("field: tau must be finite and > 0");
    if (!std::isfinite(phi))
        throw ConfigError("field: phi must be finite");
    if (!(delta >= -1.0 && delta <= 1.0))
        throw ConfigError("field: delta must lie in [-1, 1]");
}

Vec3 electric_field(const FieldConfig& cfg, double t) {
    const double amp = cfg.e0 / std::sqrt(1.0 + cfg.delta * cfg.delta);
    const double env = std::exp(-t * t / (2.0 * cfg.tau * cfg.tau));
    const double phase = cfg.omega * t + cfg.phi;
    return {amp * env * std::cos(phase), amp * env * cfg.delta * std::sin(phase), 0.0};
}

double keldysh_gamma(const FieldConfig& cfg) {
    if (!(cfg.e0 > 0.0))
        throw ConfigError("keldysh_gamma: undefined for e0 = 0");
    return cfg.omega / cfg.e0;
}

double effective_mass(const FieldConfig& cfg) {
    return std::sqrt(1.0 + cfg.e0 * cfg.e0 / (2.0 * cfg.omega * cfg.omega));
}

DerivedParams derived_params(const FieldConfig& cfg) {
    return {keldysh_gamma(cfg), effective_mass(cfg)};
}

Vec3 vector_potential_tail(const FieldConfig& cfg) {
    // Gaussian-cosine integral: int exp(-t^2/(2 tau^2)) cos(omega t + phi) dt
    //                           = tau sqrt(2 pi) exp(-omega^2 tau^2/2) cos(phi),
    // and the same with sin(phi) for the sine quadrature.
    const double amp = cfg.e0 / std::sqrt(1.0 + cfg.delta * cfg.delta);
    const double gauss = cfg.tau * std::sqrt(2.0 * std::numbers::pi) *
                         std::exp(-0.5 * cfg.omega * cfg.omega * cfg.tau * cfg.tau);
    return {-amp * gauss * std::cos(cfg.phi), -amp * cfg.delta * gauss * std::sin(cfg.phi), 0.0};
}

}  // namespace dhwpair
