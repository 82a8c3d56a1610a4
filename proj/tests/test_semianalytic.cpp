#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include <doctest.h>

#include "dhwpair/errors.hpp"
#include "dhwpair/semianalytic.hpp"

using namespace dhwpair;

namespace {

FieldConfig make(double e0, double omega) {
    FieldConfig cfg;
    cfg.e0 = e0;
    cfg.omega = omega;
    return cfg;
}

const FieldConfig kStrong = make(0.4, 0.4);                  // gamma = 1
const FieldConfig kMatched = make(0.1 * std::sqrt(2.0), 0.4);  // polarization-scan field

// Brute-force fixed-sample oracle for g: composite Simpson on the
// trigonometric substitution u = sin(theta), which removes the endpoint
// singularity. Independent of the adaptive quadrature path.
double g_oracle(double gamma, int n = 20000) {
    const double h = 0.5 * std::numbers::pi / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double th = h * i;
        const double c = std::cos(th), s = std::sin(th);
        const double v = c * c / std::sqrt(1.0 + gamma * gamma * s * s);
        acc += v * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return acc * h / 3.0 * 4.0 / std::numbers::pi;
}

}  // namespace

TEST_CASE("g quadrature against the fixed-sample oracle") {
    CHECK(std::abs(g_of_gamma(0.0) - 1.0) <= 1e-10);
    for (double gamma : {0.3, 1.0, 2.0, 4.0, 10.0})
        CHECK(std::abs(g_of_gamma(gamma) - g_oracle(gamma)) <= 1e-9);
    CHECK(g_of_gamma(4.0) < g_of_gamma(2.0));
    // strictly decreasing on a grid
    double prev = g_of_gamma(0.0);
    for (double gamma = 0.25; gamma <= 6.0; gamma += 0.25) {
        const double cur = g_of_gamma(gamma);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("coefficient small-gamma expansion") {
    const RateCoefficients c = rate_coefficients(0.01);
    CHECK(std::abs(c.b1 - (1.0 - 0.01 * 0.01 / 4.0)) <= 1e-5);
    CHECK(std::abs(c.b2 - 0.01 * 0.01 / 2.0) <= 1e-5);
    CHECK(std::abs(c.g - (1.0 - 0.01 * 0.01 / 8.0)) <= 1e-5);
}

TEST_CASE("b2 against central finite differences of b1") {
    const double h = 1e-4;
    for (double gamma : {0.5, 1.0, 4.0}) {
        const double b1p =
            (rate_coefficients(gamma + h).b1 - rate_coefficients(gamma - h).b1) / (2.0 * h);
        CHECK(std::abs(rate_coefficients(gamma).b2 - (-gamma * b1p)) <= 1e-6);
    }
}

TEST_CASE("coefficient positivity and sign structure") {
    CHECK(rate_coefficients(1.0).b1 > 0.0);
    for (double gamma : {0.0, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0})
        CHECK(rate_coefficients(gamma).b2 >= 0.0);
}

TEST_CASE("memoized coefficients are reproducible and thread-safe") {
    const RateCoefficients a = rate_coefficients(1.7);
    const RateCoefficients b = rate_coefficients(1.7);
    CHECK(a.g == b.g);
    CHECK(a.b1 == b.b1);
    CHECK(a.b2 == b.b2);

    std::vector<std::thread> pool;
    std::vector<double> results(8);
    for (int i = 0; i < 8; ++i)
        pool.emplace_back([i, &results]() { results[i] = rate_coefficients(2.3).b2; });
    for (auto& t : pool) t.join();
    for (int i = 1; i < 8; ++i) CHECK(results[i] == results[0]);
}

TEST_CASE("ring radii") {
    CHECK(ring_radius(6, kMatched).radius == doctest::Approx(0.61441).epsilon(1e-5));
    CHECK(ring_radius(8, kStrong).radius == doctest::Approx(1.02956).epsilon(1e-5));
    CHECK(ring_radius(7, kStrong).radius == doctest::Approx(0.67823).epsilon(1e-5));
    CHECK_FALSE(ring_radius(2, kStrong).present);

    // strictly increasing in n once present
    double prev = 0.0;
    for (int n = min_photon_number(kStrong); n <= 12; ++n) {
        const auto ring = ring_radius(n, kStrong);
        CHECK(ring.present);
        CHECK(ring.radius > prev);
        prev = ring.radius;
    }
}

TEST_CASE("minimum photon number") {
    CHECK(min_photon_number(kStrong) == 7);
    CHECK(min_photon_number(kMatched) == 6);
    CHECK(min_photon_number(make(0.0, 0.4)) == 5);  // threshold tie counts as present
    // consistency with ring presence
    for (const FieldConfig& cfg : {kStrong, kMatched}) {
        const int nmin = min_photon_number(cfg);
        CHECK(ring_radius(nmin, cfg).present);
        CHECK_FALSE(ring_radius(nmin - 1, cfg).present);
    }
}

TEST_CASE("interference factor zeros and boson flip") {
    CHECK(interference_factor(0.0, 0.4, 8, 0.5) == 0.0);
    CHECK(interference_factor(0.2, 0.4, 7, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(interference_factor(0.0, 0.4, 8, 0.0) == 2.0);
    for (double qx = -1.0; qx <= 1.0; qx += 0.01)
        CHECK(interference_factor(qx, 0.4, 7, 0.5) >= 0.0);
}

TEST_CASE("adiabatic interference factor") {
    // arctan(1) = pi/4: the cosine argument at qx = omega is exactly pi.
    CHECK(std::cos(4.0 * 1.0 * std::atan(1.0)) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(interference_factor_adiabatic(0.4, 0.4, 1.0, 8, 0.5) ==
          doctest::Approx(2.0).epsilon(1e-12));

    // Same value at qx = 0 for any gamma.
    for (double gamma : {0.1, 1.0, 100.0})
        CHECK(interference_factor_adiabatic(0.0, 0.4, gamma, 7, 0.5) ==
              interference_factor(0.0, 0.4, 7, 0.5));

    // Large gamma approaches the asymptotic form. The exact supremum over
    // |qx| <= omega is 4*arctan(1e-3) * max_t(t |sin(2 pi t)|) ~ 3.07e-3.
    double worst = 0.0;
    for (double qx = -0.4; qx <= 0.4; qx += 0.004) {
        const double d = std::abs(interference_factor_adiabatic(qx, 0.4, 1e3, 8, 0.5) -
                                  interference_factor(qx, 0.4, 8, 0.5));
        worst = std::max(worst, d);
    }
    CHECK(worst <= 3.1e-3);
}

TEST_CASE("node positions") {
    const auto qx8 = node_qx_values(8, kStrong, 0.5);
    CHECK(qx8.size() == 5);
    const double expect8[] = {-0.8, -0.4, 0.0, 0.4, 0.8};
    for (int i = 0; i < 5; ++i) CHECK(qx8[i] == doctest::Approx(expect8[i]).epsilon(1e-12));
    CHECK(node_positions(8, kStrong, 0.5).size() == 10);

    const auto qx7 = node_qx_values(7, kStrong, 0.5);
    CHECK(qx7.size() == 4);
    const double expect7[] = {-0.6, -0.2, 0.2, 0.6};
    for (int i = 0; i < 4; ++i) CHECK(qx7[i] == doctest::Approx(expect7[i]).epsilon(1e-12));
    CHECK(node_positions(7, kStrong, 0.5).size() == 8);

    const auto qx6 = node_qx_values(6, kMatched, 0.5);
    CHECK(qx6.size() == 3);  // radius 0.614 < 0.8 excludes |k| = 2
    CHECK(node_positions(6, kMatched, 0.5).size() == 6);

    CHECK_THROWS_AS(node_positions(2, kStrong, 0.5), RingAbsent);
}

TEST_CASE("node ladder does not move with field strength") {
    // Stronger fields grow the effective mass and shrink the ring, so the
    // outermost rungs can drop off; the shared extent must agree exactly.
    std::vector<std::vector<double>> sets;
    double min_radius = 1e300;
    for (double e0 : {0.1, 0.2, 0.3, 0.4}) {
        sets.push_back(node_qx_values(8, make(e0, 0.4), 0.5));
        min_radius = std::min(min_radius, ring_radius(8, make(e0, 0.4)).radius);
    }
    for (const auto& set : sets) {
        std::vector<double> shared;
        for (double qx : set)
            if (std::abs(qx) <= min_radius) shared.push_back(qx);
        CHECK(shared == ([&] {
                  std::vector<double> ref;
                  for (double qx : sets[0])
                      if (std::abs(qx) <= min_radius) ref.push_back(qx);
                  return ref;
              })());
    }
}

TEST_CASE("adjacent node spacing equals the frequency") {
    for (int n : {7, 8, 9}) {
        const auto qx = node_qx_values(n, kStrong, 0.5);
        for (std::size_t i = 0; i + 1 < qx.size(); ++i)
            CHECK(qx[i + 1] - qx[i] == doctest::Approx(0.4).epsilon(1e-12));
    }
}

TEST_CASE("model weight on the ring") {
    SemianalyticConfig sconf;  // ring-locus, as-printed, Q = 0.88
    const auto ring = ring_radius(8, kStrong);

    // zero exactly at a node
    CHECK(fn_value({0.0, ring.radius, 0.0}, 8, kStrong, sconf) == 0.0);

    // nonnegative along the ring; zeros exactly where predicted
    const auto nodes = node_qx_values(8, kStrong, 0.5);
    for (int i = 0; i <= 200; ++i) {
        const double qx = -ring.radius + 2.0 * ring.radius * i / 200.0;
        const double qy = std::sqrt(std::max(0.0, ring.radius * ring.radius - qx * qx));
        const double v = fn_value({qx, qy, 0.0}, 8, kStrong, sconf);
        CHECK(v >= 0.0);
    }
    for (double qx : nodes) {
        const double qy = std::sqrt(std::max(0.0, ring.radius * ring.radius - qx * qx));
        CHECK(fn_value({qx, qy, 0.0}, 8, kStrong, sconf) <= 1e-20);
    }

    CHECK_THROWS_AS(fn_value({0.1, 0.0, 0.0}, 2, kStrong, sconf), RingAbsent);

    // Both envelope readings share the zero set but differ off the nodes.
    SemianalyticConfig bracketed = sconf;
    bracketed.envelope_variant = EnvelopeVariant::Bracketed;
    const Momentum3 probe{0.3, 0.9, 0.0};
    CHECK(fn_value(probe, 8, kStrong, sconf) != fn_value(probe, 8, kStrong, bracketed));
}

TEST_CASE("regularized-delta mode peaks on the ring") {
    SemianalyticConfig sconf;
    sconf.evaluation_mode = EvaluationMode::RegularizedDelta;
    const auto ring = ring_radius(7, kStrong);
    const Momentum3 on{0.3, std::sqrt(ring.radius * ring.radius - 0.09), 0.0};
    const Momentum3 off{0.3, 0.2, 0.0};
    CHECK(fn_value(on, 7, kStrong, sconf) > fn_value(off, 7, kStrong, sconf));

    // Unit-area Gaussian: value on the shell equals 1/(sigma sqrt(2 pi))
    // times the envelope/interference weight.
    const double sigma = kStrong.omega / 20.0;
    SemianalyticConfig locus;  // ring-locus reference
    const double ratio = fn_value(on, 7, kStrong, sconf) / fn_value(on, 7, kStrong, locus);
    CHECK(ratio == doctest::Approx(1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi)))
                       .epsilon(1e-9));
}
