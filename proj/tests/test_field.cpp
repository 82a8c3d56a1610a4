#include <cmath>
#include <numbers>

#include <doctest.h>

#include "dhwpair/errors.hpp"
#include "dhwpair/field.hpp"

using namespace dhwpair;

namespace {

FieldConfig make(double e0, double omega, double delta = 0.0, double phi = 0.0,
                 double tau = 100.0) {
    FieldConfig cfg;
    cfg.e0 = e0;
    cfg.omega = omega;
    cfg.delta = delta;
    cfg.phi = phi;
    cfg.tau = tau;
    return cfg;
}

// Composite-Simpson quadrature of one field component over [-a, a];
// independent check of the closed-form pulse integral.
double simpson_field_integral(const FieldConfig& cfg, int component, double a, int n) {
    const double h = 2.0 * a / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = -a + h * i;
        const Vec3 e = electric_field(cfg, t);
        const double v = component == 0 ? e.x : e.y;
        acc += v * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("electric field values at the pulse center") {
    const Vec3 lin = electric_field(make(0.1, 0.4), 0.0);
    CHECK(lin.x == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(lin.y == 0.0);
    CHECK(lin.z == 0.0);

    // Circular polarization at matched intensity: e0 = 0.1*sqrt(2) splits
    // into 0.1 per component at t = 0.
    const Vec3 circ = electric_field(make(0.1 * std::sqrt(2.0), 0.4, 1.0), 0.0);
    CHECK(circ.x == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(circ.y == doctest::Approx(0.0));
    CHECK(circ.z == 0.0);
}

TEST_CASE("electric field envelope bound and z component") {
    const FieldConfig cfg = make(0.3, 0.5, 0.7, 1.1);
    const Vec3 far = electric_field(cfg, 10.0 * cfg.tau);
    CHECK(far.norm() <= cfg.e0 * std::exp(-50.0) * 1.0000001);

    for (int i = 0; i <= 400; ++i) {
        const double t = -2.0 * cfg.tau + cfg.tau * i / 100.0;
        const Vec3 e = electric_field(cfg, t);
        CHECK(e.z == 0.0);
        CHECK(e.norm() <= cfg.e0 * (1.0 + 1e-14));
    }
}

TEST_CASE("keldysh gamma") {
    CHECK(keldysh_gamma(make(0.1, 0.2)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(keldysh_gamma(make(0.4, 0.4)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(keldysh_gamma(make(1.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(keldysh_gamma(make(0.0, 0.4)), ConfigError);

    // Scale invariance gamma(k e0, k omega) = gamma(e0, omega).
    for (double k : {0.3, 2.0, 17.5}) {
        CHECK(keldysh_gamma(make(k * 0.1, k * 0.2)) ==
              doctest::Approx(keldysh_gamma(make(0.1, 0.2))).epsilon(1e-14));
    }
}

TEST_CASE("effective mass") {
    CHECK(effective_mass(make(0.0, 0.7)) == 1.0);
    CHECK(effective_mass(make(0.1 * std::sqrt(2.0), 0.4)) ==
          doctest::Approx(1.030776).epsilon(1e-6));
    CHECK(effective_mass(make(0.4, 0.4)) == doctest::Approx(1.224745).epsilon(1e-6));

    // Independent of delta and phi.
    const double ref = effective_mass(make(0.25, 0.4));
    for (double d : {-1.0, -0.3, 0.5, 1.0})
        CHECK(effective_mass(make(0.25, 0.4, d, 0.9)) == ref);
}

TEST_CASE("vector potential tail closed form") {
    CHECK(vector_potential_tail(make(0.0, 0.4)).norm() == 0.0);

    // omega*tau = 40: the Gaussian factor underflows to numerically zero.
    const Vec3 tail = vector_potential_tail(make(0.2, 0.4));
    CHECK(std::abs(tail.x) <= 1e-300);
    CHECK(tail.y == 0.0);

    // Short pulse where the tail is finite: compare against quadrature.
    const FieldConfig cfg = make(0.2, 0.05, 0.6, 0.8, 20.0);
    const Vec3 expect = vector_potential_tail(cfg);
    const double ix = -simpson_field_integral(cfg, 0, 12.0 * cfg.tau, 20000);
    const double iy = -simpson_field_integral(cfg, 1, 12.0 * cfg.tau, 20000);
    CHECK(expect.x == doctest::Approx(ix).epsilon(1e-10));
    CHECK(expect.y == doctest::Approx(iy).epsilon(1e-10));
    CHECK(expect.z == 0.0);

    // phi = 0 keeps the y component exactly zero (odd integrand).
    CHECK(vector_potential_tail(make(0.2, 0.05, 0.6, 0.0, 20.0)).y == 0.0);
}

TEST_CASE("field config validation") {
    CHECK_THROWS_AS(make(-0.1, 0.4).validate(), ConfigError);
    CHECK_THROWS_AS(make(0.1, 0.0).validate(), ConfigError);
    CHECK_THROWS_AS(make(0.1, 0.4, 1.5).validate(), ConfigError);
    CHECK_THROWS_AS(make(0.1, 0.4, 0.0, 0.0, -1.0).validate(), ConfigError);
    CHECK_NOTHROW(make(0.0, 0.4).validate());
    CHECK_NOTHROW(make(0.1, 0.4, -1.0).validate());
}
