#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "medium.hpp"
#include "spectrum.hpp"
#include "vec3.hpp"

namespace fogsim {

/// Self-intersection epsilon, m. Hits closer than this are ignored.
inline constexpr double kRayEpsilon = 1e-4;

// -- Geometry ----------------------------------------------------------------

struct Sphere {
    Vec3 center;
    double radius = 1.0;
};

/// Parallelogram spanned by edge_u and edge_v from origin. Its geometric
/// normal is normalize(cross(edge_u, edge_v)).
struct Quad {
    Vec3 origin;
    Vec3 edge_u;
    Vec3 edge_v;

    Vec3 normal() const { return normalize(cross(edge_u, edge_v)); }
    double area() const { return length(cross(edge_u, edge_v)); }
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> indices;
};

using Shape = std::variant<Sphere, Quad, TriangleMesh>;

struct Primitive {
    Shape shape;
    std::size_t material_id = 0;
};

// -- Materials ---------------------------------------------------------------

struct Lambertian {
    Spectrum albedo; ///< per-band reflectance in [0, 1]
};

struct Emissive {
    Spectrum radiance; ///< W sr^-1 m^-2 nm^-1, emitted from both faces
};

struct Material {
    std::string name;
    std::variant<Lambertian, Emissive> kind;
};

// -- Lights ------------------------------------------------------------------

enum class LightRole { sky, active };

struct PointLight {
    Vec3 position;
    Spectrum intensity; ///< W sr^-1 nm^-1
};

/// One-sided emitter; emits on the side its quad normal points to.
struct AreaLight {
    Quad quad;
    Spectrum radiance;
};

/// Latitude-longitude multiplier map. Row 0 is the zenith (+y), columns
/// run with azimuth atan2(x, -z) from -pi to pi.
struct LatLongMap {
    int width = 1;
    int height = 1;
    std::vector<double> values; ///< row-major, width * height, >= 0
};

struct EnvironmentLight {
    Spectrum radiance;
    std::optional<LatLongMap> map;
};

struct Light {
    std::string name;
    LightRole role = LightRole::active;
    std::variant<PointLight, AreaLight, EnvironmentLight> kind;
};

// -- Camera ------------------------------------------------------------------

struct CameraPose {
    Vec3 position;
    Vec3 look_at{0, 0, -1};
    Vec3 up{0, 1, 0};
    double vertical_fov = 45.0; ///< degrees
    int width = 64;
    int height = 64;

    void validate() const {
        if (look_at == position) throw ValidationError("camera.look_at", "must differ from camera.position");
        if (!(vertical_fov > 0.0 && vertical_fov < 180.0)) throw ValidationError("camera.vertical_fov", "must be in (0, 180)");
        if (width < 1 || height < 1) throw ValidationError("camera.resolution", "must be at least 1x1");
        if (length(cross(normalize(look_at - position), up)) < 1e-9)
            throw ValidationError("camera.up", "must not be parallel to the view direction");
    }

    /// Ray through image-plane position (px, py) in pixel units; (0, 0) is the
    /// top-left corner, (width, height) the bottom-right.
    Ray generate_ray(double px, double py) const {
        const Vec3 forward = normalize(look_at - position);
        const Vec3 right = normalize(cross(forward, up));
        const Vec3 true_up = cross(right, forward);
        const double tan_half = std::tan(0.5 * vertical_fov * kPi / 180.0);
        const double aspect = static_cast<double>(width) / height;
        const double sx = (2.0 * px / width - 1.0) * tan_half * aspect;
        const double sy = (1.0 - 2.0 * py / height) * tan_half;
        return {position, normalize(forward + right * sx + true_up * sy)};
    }
};

// -- Scene -------------------------------------------------------------------

struct Scene {
    std::string name = "scene";
    std::optional<CameraPose> camera;
    Medium medium;
    std::vector<Material> materials;
    std::vector<Primitive> primitives;
    std::vector<Light> lights;
};

struct Hit {
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    double t = kInfinity;
    Vec3 point;
    Vec3 normal;          ///< unit, facing the ray origin's side
    Vec3 geometric_normal; ///< unit, as authored (used for one-sided emitters)
    std::size_t material_id = kNone;
    std::size_t light_id = kNone; ///< set when an area light's quad was hit
};

namespace detail {

inline std::optional<double> intersect_sphere(const Sphere &s, const Ray &ray, double t_max) {
    const Vec3 oc = ray.origin - s.center;
    const double b = dot(oc, ray.direction);
    const double c = dot(oc, oc) - s.radius * s.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    // Numerically stable pair of roots.
    const double q = b > 0.0 ? -b - sq : -b + sq;
    double t0 = q, t1 = q != 0.0 ? c / q : -b;
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > kRayEpsilon && t0 < t_max) return t0;
    if (t1 > kRayEpsilon && t1 < t_max) return t1;
    return std::nullopt;
}

inline std::optional<double> intersect_quad(const Quad &q, const Ray &ray, double t_max) {
    const Vec3 n = cross(q.edge_u, q.edge_v);
    const double denom = dot(n, ray.direction);
    if (std::abs(denom) < 1e-12 * length(n)) return std::nullopt;
    const double t = dot(n, q.origin - ray.origin) / denom;
    if (!(t > kRayEpsilon && t < t_max)) return std::nullopt;
    const Vec3 rel = ray.at(t) - q.origin;
    const double nn = dot(n, n);
    const double a = dot(cross(rel, q.edge_v), n) / nn;
    const double b = dot(cross(q.edge_u, rel), n) / nn;
    if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) return std::nullopt;
    return t;
}

/// Moller-Trumbore.
inline std::optional<double> intersect_triangle(const Vec3 &p0, const Vec3 &p1, const Vec3 &p2, const Ray &ray,
                                                double t_max) {
    const Vec3 e1 = p1 - p0, e2 = p2 - p0;
    const Vec3 pv = cross(ray.direction, e2);
    const double det = dot(e1, pv);
    if (std::abs(det) < 1e-14) return std::nullopt;
    const double inv = 1.0 / det;
    const Vec3 tv = ray.origin - p0;
    const double u = dot(tv, pv) * inv;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    const Vec3 qv = cross(tv, e1);
    const double v = dot(ray.direction, qv) * inv;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;
    const double t = dot(e2, qv) * inv;
    if (!(t > kRayEpsilon && t < t_max)) return std::nullopt;
    return t;
}

inline void finish_hit(Hit &hit, const Ray &ray, const Vec3 &geometric_normal) {
    hit.point = ray.at(hit.t);
    hit.geometric_normal = geometric_normal;
    hit.normal = dot(geometric_normal, ray.direction) > 0.0 ? -geometric_normal : geometric_normal;
}

} // namespace detail

/// Nearest intersection with t in (kRayEpsilon, t_max). Area-light quads
/// participate and are reported through Hit::light_id.
inline std::optional<Hit> intersect(const Scene &scene, const Ray &ray, double t_max = kInfinity) {
    Hit best;
    best.t = t_max;
    bool found = false;
    Vec3 best_normal;

    for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
        const Primitive &prim = scene.primitives[i];
        if (const auto *s = std::get_if<Sphere>(&prim.shape)) {
            if (auto t = detail::intersect_sphere(*s, ray, best.t)) {
                best.t = *t;
                best.material_id = prim.material_id;
                best.light_id = Hit::kNone;
                best_normal = (ray.at(*t) - s->center) / s->radius;
                found = true;
            }
        } else if (const auto *q = std::get_if<Quad>(&prim.shape)) {
            if (auto t = detail::intersect_quad(*q, ray, best.t)) {
                best.t = *t;
                best.material_id = prim.material_id;
                best.light_id = Hit::kNone;
                best_normal = q->normal();
                found = true;
            }
        } else if (const auto *m = std::get_if<TriangleMesh>(&prim.shape)) {
            for (const auto &tri : m->indices) {
                const Vec3 &p0 = m->vertices[tri[0]], &p1 = m->vertices[tri[1]], &p2 = m->vertices[tri[2]];
                if (auto t = detail::intersect_triangle(p0, p1, p2, ray, best.t)) {
                    best.t = *t;
                    best.material_id = prim.material_id;
                    best.light_id = Hit::kNone;
                    best_normal = normalize(cross(p1 - p0, p2 - p0));
                    found = true;
                }
            }
        }
    }
    for (std::size_t i = 0; i < scene.lights.size(); ++i) {
        if (const auto *area = std::get_if<AreaLight>(&scene.lights[i].kind)) {
            if (auto t = detail::intersect_quad(area->quad, ray, best.t)) {
                best.t = *t;
                best.material_id = Hit::kNone;
                best.light_id = i;
                best_normal = area->quad.normal();
                found = true;
            }
        }
    }
    if (!found) return std::nullopt;
    detail::finish_hit(best, ray, best_normal);
    return best;
}

/// True when something blocks the open segment from origin to origin + dir * distance.
inline bool occluded(const Scene &scene, const Vec3 &origin, const Vec3 &dir, double distance) {
    return intersect(scene, Ray{origin, dir}, distance - kRayEpsilon).has_value();
}

// -- Light sampling ----------------------------------------------------------

inline Spectrum environment_radiance(const EnvironmentLight &env, const Vec3 &dir) {
    if (!env.map) return env.radiance;
    const LatLongMap &map = *env.map;
    const double theta = std::acos(std::clamp(dir.y, -1.0, 1.0));
    const double phi = std::atan2(dir.x, -dir.z);
    int col = static_cast<int>((phi + kPi) / (2.0 * kPi) * map.width);
    int row = static_cast<int>(theta / kPi * map.height);
    col = std::clamp(col, 0, map.width - 1);
    row = std::clamp(row, 0, map.height - 1);
    return env.radiance * map.values[static_cast<std::size_t>(row) * map.width + col];
}

/// Radiance emitted by an area light toward `toward_dir` (pointing away from the light).
inline Spectrum area_emission(const AreaLight &area, const Vec3 &toward_dir) {
    return dot(area.quad.normal(), toward_dir) > 0.0 ? area.radiance : Spectrum{};
}

struct LightSample {
    Vec3 direction;            ///< unit, from the shading point toward the light
    double distance = kInfinity; ///< +inf for the environment
    Spectrum radiance_over_pdf;
    double pdf = 0.0;          ///< solid-angle pdf (unused for delta lights)
    bool delta = false;        ///< point light: reachable only by explicit connection
};

inline Vec3 uniform_sphere(double u1, double u2) {
    const double z = 1.0 - 2.0 * u1;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * kPi * u2;
    return {r * std::cos(phi), r * std::sin(phi), z};
}

inline LightSample sample_light(const Light &light, const Vec3 &p, double u1, double u2) {
    LightSample s;
    if (const auto *pt = std::get_if<PointLight>(&light.kind)) {
        const Vec3 d = pt->position - p;
        const double dist2 = dot(d, d);
        s.distance = std::sqrt(dist2);
        s.direction = d / s.distance;
        s.radiance_over_pdf = pt->intensity * (1.0 / dist2);
        s.pdf = 1.0;
        s.delta = true;
    } else if (const auto *area = std::get_if<AreaLight>(&light.kind)) {
        const Vec3 q = area->quad.origin + area->quad.edge_u * u1 + area->quad.edge_v * u2;
        const Vec3 d = q - p;
        const double dist2 = dot(d, d);
        s.distance = std::sqrt(dist2);
        s.direction = d / s.distance;
        const double cos_light = -dot(area->quad.normal(), s.direction);
        if (cos_light <= 0.0) {
            s.pdf = 0.0;
            return s; // back face: black
        }
        const double area_size = area->quad.area();
        s.pdf = dist2 / (area_size * cos_light);
        s.radiance_over_pdf = area->radiance * (1.0 / s.pdf);
    } else {
        const auto &env = std::get<EnvironmentLight>(light.kind);
        s.direction = uniform_sphere(u1, u2);
        s.distance = kInfinity;
        s.pdf = 1.0 / (4.0 * kPi);
        s.radiance_over_pdf = environment_radiance(env, s.direction) * (4.0 * kPi);
    }
    return s;
}

} // namespace fogsim
