#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace fogsim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Vec3 {
    double x = 0, y = 0, z = 0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 &operator+=(const Vec3 &o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3 &operator-=(const Vec3 &o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3 &operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3 &b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3 &b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(Vec3 a, double s) { return a *= 1.0 / s; }
    friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;
};

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length(const Vec3 &v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalize(const Vec3 &v) { return v / length(v); }

/// Orthonormal frame whose z axis is the given unit vector (Duff et al. branchless construction).
struct Frame {
    Vec3 s, t, n;

    explicit Frame(const Vec3 &normal) : n(normal) {
        const double sign = std::copysign(1.0, n.z);
        const double a = -1.0 / (sign + n.z);
        const double b = n.x * n.y * a;
        s = {1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x};
        t = {b, sign + n.y * n.y * a, -n.y};
    }

    Vec3 to_world(const Vec3 &v) const { return s * v.x + t * v.y + n * v.z; }
    Vec3 to_local(const Vec3 &v) const { return {dot(v, s), dot(v, t), dot(v, n)}; }
};

struct Ray {
    Vec3 origin;
    Vec3 direction; // unit length

    Vec3 at(double t) const { return origin + direction * t; }
};

struct Aabb {
    Vec3 min;
    Vec3 max;

    /// Parametric overlap of the ray with the box clipped to [t_min, t_max].
    /// Returns an empty interval (first >= second) when they do not overlap.
    std::pair<double, double> clip(const Ray &ray, double t_min, double t_max) const {
        for (int axis = 0; axis < 3; ++axis) {
            const double d = ray.direction[axis];
            const double o = ray.origin[axis];
            const double lo = min[axis], hi = max[axis];
            if (d == 0.0) {
                if (o < lo || o > hi) return {0.0, 0.0};
                continue;
            }
            double t0 = (lo - o) / d;
            double t1 = (hi - o) / d;
            if (t0 > t1) std::swap(t0, t1);
            t_min = std::max(t_min, t0);
            t_max = std::min(t_max, t1);
            if (t_min >= t_max) return {0.0, 0.0};
        }
        return {t_min, t_max};
    }
};

} // namespace fogsim
