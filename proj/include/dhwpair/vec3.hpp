#ifndef DHWPAIR_VEC3_HPP
#define DHWPAIR_VEC3_HPP

#include <cmath>

namespace dhwpair {

// Plain 3-vector in natural units (m = 1). Used for momenta, fields and
// the accumulated vector potential alike.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    constexpr double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

constexpr inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Canonical momentum of the created particle, components in units of m.
using Momentum3 = Vec3;

}  // namespace dhwpair

#endif
