#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "vec3.hpp"

namespace fogsim {

/// Homogeneous fog. Coefficients are wavelength independent; fog does not emit.
struct Medium {
    double sigma_s = 0.0; ///< scattering coefficient, 1/m
    double sigma_a = 0.0; ///< absorption coefficient, 1/m
    double g = 0.87;      ///< Henyey-Greenstein asymmetry
    /// Region filled with fog. Unbounded when empty.
    std::optional<Aabb> bounds;

    double sigma_t() const { return sigma_s + sigma_a; }

    void validate() const {
        if (!(sigma_s >= 0.0) || !std::isfinite(sigma_s)) throw ValidationError("sigma_s", "must be finite and >= 0");
        if (!(sigma_a >= 0.0) || !std::isfinite(sigma_a)) throw ValidationError("sigma_a", "must be finite and >= 0");
        if (!(g > -1.0 && g < 1.0)) throw ValidationError("g", "must satisfy -1 < g < 1");
        if (bounds && !(bounds->min.x < bounds->max.x && bounds->min.y < bounds->max.y && bounds->min.z < bounds->max.z))
            throw ValidationError("bounds", "min must be below max on every axis");
    }

    /// Portion of the ray segment (0, t_max) that lies inside the fog.
    std::pair<double, double> overlap(const Ray &ray, double t_max) const {
        if (!bounds) return {0.0, t_max};
        return bounds->clip(ray, 0.0, t_max);
    }
};

// -- Visibility / calibration ------------------------------------------------

/// Koschmieder constant: contrast threshold of 5 % gives MOR = -ln(0.05)/sigma.
inline constexpr double kMorConstant = 2.996;

inline double mor_from_sigma(double sigma_s) {
    if (!(sigma_s > 0.0)) throw DomainError("mor_from_sigma: sigma_s must be > 0");
    return kMorConstant / sigma_s;
}

inline double sigma_from_mor(double mor_m) {
    if (!(mor_m > 0.0)) throw DomainError("sigma_from_mor: MOR must be > 0");
    return kMorConstant / mor_m;
}

/// Extinction from a laser transmission measurement: P_u = P_0 exp(-sigma u).
inline double sigma_from_power(double p0, double pu, double path_length) {
    if (!(p0 > 0.0) || !(pu > 0.0) || !(path_length > 0.0))
        throw DomainError("sigma_from_power: powers and path length must be > 0");
    if (pu > p0) throw DomainError("sigma_from_power: received power exceeds reference power");
    return std::log(p0 / pu) / path_length;
}

enum class FogTierName { heavy, thick, dense, custom };

inline const char *to_string(FogTierName n) {
    switch (n) {
    case FogTierName::heavy: return "heavy";
    case FogTierName::thick: return "thick";
    case FogTierName::dense: return "dense";
    case FogTierName::custom: return "custom";
    }
    return "custom";
}

struct FogTier {
    FogTierName name = FogTierName::custom;
    double sigma_s = 0.0;
    double visibility_m = kInfinity;

    /// Named tiers for the three standard densities, custom otherwise.
    static FogTier from_sigma(double sigma_s) {
        if (!(sigma_s >= 0.0) || !std::isfinite(sigma_s)) throw ValidationError("sigma_s", "fog tier needs finite sigma_s >= 0");
        FogTier t;
        t.sigma_s = sigma_s;
        t.visibility_m = sigma_s > 0.0 ? mor_from_sigma(sigma_s) : kInfinity;
        if (sigma_s == 0.005) t.name = FogTierName::heavy;
        else if (sigma_s == 0.01) t.name = FogTierName::thick;
        else if (sigma_s == 0.02) t.name = FogTierName::dense;
        return t;
    }

    static std::vector<FogTier> standard() { return {from_sigma(0.005), from_sigma(0.01), from_sigma(0.02)}; }

    /// File-name label: tier name, or "s<sigma>" for custom densities.
    std::string label() const {
        if (name != FogTierName::custom) return to_string(name);
        char buf[64];
        std::snprintf(buf, sizeof buf, "s%g", sigma_s);
        return buf;
    }
};

// -- Phase function ----------------------------------------------------------

/// Henyey-Greenstein density per steradian. cos_theta is the cosine between
/// the incident propagation direction and the scattered direction, so g > 0
/// peaks at cos_theta = 1 (forward scattering).
inline double hg_phase(double cos_theta, double g) {
    if (!(std::abs(cos_theta) <= 1.0 + 1e-12)) throw DomainError("hg_phase: |cos_theta| > 1");
    if (!(std::abs(g) < 1.0)) throw DomainError("hg_phase: |g| >= 1");
    cos_theta = std::clamp(cos_theta, -1.0, 1.0);
    const double denom = 1.0 + g * g - 2.0 * g * cos_theta;
    return (1.0 - g * g) / (4.0 * kPi * denom * std::sqrt(denom));
}

struct PhaseSample {
    Vec3 direction;
    double pdf = 0.0;
    double cos_theta = 0.0;
};

/// Below this |g| the inverse CDF loses precision and the sampler falls back to the uniform sphere.
inline constexpr double kIsotropicG = 1e-3;

inline double sample_hg_cos_theta(double g, double u1) {
    if (std::abs(g) < kIsotropicG) return 1.0 - 2.0 * u1;
    const double sq = (1.0 - g * g) / (1.0 - g + 2.0 * g * u1);
    return std::clamp((1.0 + g * g - sq * sq) / (2.0 * g), -1.0, 1.0);
}

/// Draws a scattered direction around the incident propagation direction.
inline PhaseSample sample_hg(double g, double u1, double u2, const Vec3 &incident_dir) {
    const double cos_theta = sample_hg_cos_theta(g, u1);
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    const double phi = 2.0 * kPi * u2;
    const Frame frame(incident_dir);
    PhaseSample s;
    s.direction = normalize(frame.to_world({sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta}));
    s.cos_theta = cos_theta;
    s.pdf = std::abs(g) < kIsotropicG ? 1.0 / (4.0 * kPi) : hg_phase(cos_theta, g);
    return s;
}

// -- Transport ---------------------------------------------------------------

inline double transmittance(double sigma_t, double distance) {
    if (distance == 0.0 || sigma_t == 0.0) return 1.0;
    return std::exp(-sigma_t * distance);
}

struct ScatterEvent {
    double t = 0.0;   ///< distance to the scattering point, m
    double pdf = 0.0; ///< density of t, 1/m
};

struct PassThrough {
    double prob = 1.0; ///< probability of reaching the surface
};

using DistanceSample = std::variant<ScatterEvent, PassThrough>;

/// Free-flight sampling against a surface at surface_hit_distance (may be +inf).
inline DistanceSample sample_distance(double sigma_t, double u, double surface_hit_distance) {
    if (sigma_t <= 0.0) return PassThrough{1.0};
    const double t = -std::log1p(-u) / sigma_t;
    if (t < surface_hit_distance) return ScatterEvent{t, sigma_t * std::exp(-sigma_t * t)};
    return PassThrough{transmittance(sigma_t, surface_hit_distance)};
}

} // namespace fogsim
