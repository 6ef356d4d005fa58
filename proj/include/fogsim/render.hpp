#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "image.hpp"
#include "medium.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "scene.hpp"

namespace fogsim {

struct RenderSettings {
    int samples_per_pixel = 16;
    /// Longest light path in segments, counting the camera segment and the
    /// final light connection. 2 = direct lighting plus single scattering.
    int max_bounces = 32;
    /// First segment index at which Russian roulette may terminate a path.
    int rr_start_bounce = 4;
    std::uint64_t seed = 0;
    int tile_size = 16;
    int threads = 0; ///< 0 = hardware concurrency
    /// Jitter primary rays over the pixel footprint; off traces pixel centers.
    bool jitter = true;
    /// Connect every vertex to one uniformly chosen area light, combined with
    /// phase/BSDF hits by multiple importance sampling. When false, area
    /// lights are only found by phase/BSDF sampling.
    bool area_light_nee = true;

    void validate() const {
        if (samples_per_pixel < 1) throw ConfigError("samples_per_pixel must be >= 1");
        if (max_bounces < 1) throw ConfigError("max_bounces must be >= 1");
        if (rr_start_bounce < 1) throw ConfigError("rr_start_bounce must be >= 1");
        if (tile_size < 1) throw ConfigError("tile_size must be >= 1");
    }
};

struct RenderOutput {
    RadianceImage radiance;
    DepthMap depth;
};

inline Vec3 cosine_hemisphere(double u1, double u2) {
    const double r = std::sqrt(u1);
    const double phi = 2.0 * kPi * u2;
    return {r * std::cos(phi), r * std::sin(phi), std::sqrt(std::max(0.0, 1.0 - u1))};
}

/// Volumetric path tracer for a homogeneous medium with next-event estimation.
class PathTracer {
public:
    PathTracer(const Scene &scene, const RenderSettings &settings) : scene_(scene), settings_(settings) {
        for (std::size_t i = 0; i < scene.lights.size(); ++i) {
            const auto &kind = scene.lights[i].kind;
            if (std::holds_alternative<PointLight>(kind)) point_lights_.push_back(i);
            else if (std::holds_alternative<AreaLight>(kind)) area_lights_.push_back(i);
            else env_lights_.push_back(i);
        }
    }

    struct Sample {
        Spectrum radiance;
        double first_hit = kInfinity; ///< distance to the first surface along the camera ray
    };

    Sample trace(Ray ray, CounterRng &rng) const {
        const Medium &medium = scene_.medium;
        const double sigma_t = medium.sigma_t();
        Sample out;
        Spectrum beta(1.0);
        double prev_pdf = 0.0; // solid-angle pdf of the direction that produced the current ray

        for (int segment = 1;; ++segment) {
            const auto hit = intersect(scene_, ray);
            const double t_surface = hit ? hit->t : kInfinity;
            if (segment == 1) out.first_hit = t_surface;

            if (sigma_t > 0.0) {
                const auto [t0, t1] = medium.overlap(ray, t_surface);
                if (t1 > t0) {
                    const DistanceSample event = sample_distance(sigma_t, rng.uniform(), t1 - t0);
                    if (const auto *scatter = std::get_if<ScatterEvent>(&event)) {
                        // T(t)/pdf(t) = 1/sigma_t, times sigma_s at the vertex.
                        if (segment >= settings_.max_bounces || medium.sigma_s == 0.0) break;
                        beta *= medium.sigma_s / sigma_t;
                        const Vec3 p = ray.at(t0 + scatter->t);
                        out.radiance += beta * medium_direct(p, ray.direction, rng);
                        const PhaseSample ps = sample_hg(medium.g, rng.uniform(), rng.uniform(), ray.direction);
                        beta *= hg_phase(ps.cos_theta, medium.g) / ps.pdf;
                        prev_pdf = ps.pdf;
                        ray = Ray{p, ps.direction};
                        if (!survives_roulette(segment, beta, rng)) break;
                        continue;
                    }
                    // Pass-through: T(d)/P(pass) = 1.
                }
            }

            if (!hit) {
                for (std::size_t i : env_lights_)
                    out.radiance += beta * environment_radiance(std::get<EnvironmentLight>(scene_.lights[i].kind), ray.direction);
                break;
            }
            if (hit->light_id != Hit::kNone) {
                const auto &area = std::get<AreaLight>(scene_.lights[hit->light_id].kind);
                double mis = 1.0;
                if (segment > 1 && settings_.area_light_nee) {
                    const double cos_light = std::abs(dot(area.quad.normal(), ray.direction));
                    const double light_pdf = hit->t * hit->t / (area.quad.area() * cos_light) /
                                             static_cast<double>(area_lights_.size());
                    mis = prev_pdf / (prev_pdf + light_pdf);
                }
                out.radiance += beta * area_emission(area, -ray.direction) * mis;
                break;
            }
            const Material &material = scene_.materials[hit->material_id];
            if (const auto *e = std::get_if<Emissive>(&material.kind)) {
                out.radiance += beta * e->radiance;
                break;
            }
            if (segment >= settings_.max_bounces) break;
            const Spectrum &albedo = std::get<Lambertian>(material.kind).albedo;
            out.radiance += beta * surface_direct(*hit, albedo, rng);

            const double u1 = rng.uniform(), u2 = rng.uniform();
            const Vec3 dir = normalize(Frame(hit->normal).to_world(cosine_hemisphere(u1, u2)));
            beta *= albedo; // (albedo/pi) cos / (cos/pi)
            if (beta.is_black()) break;
            prev_pdf = dot(dir, hit->normal) / kPi;
            ray = Ray{hit->point, dir};
            if (!survives_roulette(segment, beta, rng)) break;
        }
        return out;
    }

    /// Transmittance of the open segment p -> p + dir * distance through the medium.
    double segment_transmittance(const Vec3 &p, const Vec3 &dir, double distance) const {
        const double sigma_t = scene_.medium.sigma_t();
        if (sigma_t == 0.0) return 1.0;
        const auto [t0, t1] = scene_.medium.overlap(Ray{p, dir}, distance);
        return t1 > t0 ? transmittance(sigma_t, t1 - t0) : 1.0;
    }

private:
    bool survives_roulette(int segment, Spectrum &beta, CounterRng &rng) const {
        if (segment < settings_.rr_start_bounce) return true;
        const double q = std::clamp(beta.max_value(), 0.05, 1.0);
        if (q >= 1.0) return true;
        if (rng.uniform() >= q) return false;
        beta *= 1.0 / q;
        return true;
    }

    /// Unoccluded, transmittance-weighted light arriving at p from one light sample.
    /// Calls weight(direction) for the phase function or BRDF * cosine.
    template <typename Weight>
    Spectrum connect(const Vec3 &p, const LightSample &ls, Weight &&weight) const {
        if (ls.radiance_over_pdf.is_black()) return {};
        const double w = weight(ls.direction);
        if (w <= 0.0) return {};
        if (occluded(scene_, p, ls.direction, ls.distance)) return {};
        return ls.radiance_over_pdf * (w * segment_transmittance(p, ls.direction, ls.distance));
    }

    template <typename Weight>
    Spectrum direct_lighting(const Vec3 &p, CounterRng &rng, Weight &&weight) const {
        Spectrum sum;
        for (std::size_t i : point_lights_) sum += connect(p, sample_light(scene_.lights[i], p, 0.0, 0.0), weight);
        if (settings_.area_light_nee && !area_lights_.empty()) {
            const double pick = rng.uniform();
            const double u1 = rng.uniform(), u2 = rng.uniform();
            const std::size_t n = area_lights_.size();
            const std::size_t k = std::min(n - 1, static_cast<std::size_t>(pick * n));
            const LightSample ls = sample_light(scene_.lights[area_lights_[k]], p, u1, u2);
            // Balance heuristic against the phase/BSDF strategy, whose pdf equals the weight.
            const double light_pdf = ls.pdf / static_cast<double>(n);
            sum += connect(p, ls, [&](const Vec3 &dir) {
                const double w = weight(dir);
                return w * (light_pdf / (light_pdf + w)) * static_cast<double>(n);
            });
        }
        return sum;
    }

    Spectrum medium_direct(const Vec3 &p, const Vec3 &incoming, CounterRng &rng) const {
        const double g = scene_.medium.g;
        return direct_lighting(p, rng, [&](const Vec3 &to_light) { return hg_phase(std::clamp(dot(to_light, incoming), -1.0, 1.0), g); });
    }

    Spectrum surface_direct(const Hit &hit, const Spectrum &albedo, CounterRng &rng) const {
        const Vec3 n = hit.normal;
        return albedo * direct_lighting(hit.point, rng, [&](const Vec3 &to_light) {
            const double c = dot(n, to_light);
            return c > 0.0 ? c / kPi : 0.0;
        });
    }

    const Scene &scene_;
    const RenderSettings &settings_;
    std::vector<std::size_t> point_lights_, area_lights_, env_lights_;
};

/// Monte Carlo estimate of per-pixel spectral radiance plus the first-hit
/// depth AOV. Each (pixel, sample) draws from its own counter-based stream
/// keyed on (seed, x, y, sample), so the result does not depend on tiling
/// or thread count.
inline RenderOutput render(const Scene &scene, const RenderSettings &settings) {
    settings.validate();
    if (!scene.camera) throw ConfigError("scene has no camera");
    const CameraPose &cam = *scene.camera;
    cam.validate();
    scene.medium.validate();

    RenderOutput out{RadianceImage(cam.width, cam.height), DepthMap(cam.width, cam.height)};
    out.radiance.vertical_fov = cam.vertical_fov;
    const PathTracer tracer(scene, settings);

    const int ts = settings.tile_size;
    const int tiles_x = (cam.width + ts - 1) / ts;
    const int tiles_y = (cam.height + ts - 1) / ts;
    const std::size_t spp = static_cast<std::size_t>(settings.samples_per_pixel);

    parallel_for(static_cast<std::size_t>(tiles_x) * tiles_y, settings.threads, [&](std::size_t tile) {
        const int tx = static_cast<int>(tile % tiles_x), ty = static_cast<int>(tile / tiles_x);
        for (int y = ty * ts; y < std::min(cam.height, (ty + 1) * ts); ++y) {
            for (int x = tx * ts; x < std::min(cam.width, (tx + 1) * ts); ++x) {
                Spectrum sum;
                double mean_acc = 0.0, m2 = 0.0;
                double depth_sum = 0.0;
                std::size_t depth_hits = 0;
                for (std::size_t s = 0; s < spp; ++s) {
                    CounterRng rng{settings.seed, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y), s};
                    const double jx = settings.jitter ? rng.uniform() : 0.5;
                    const double jy = settings.jitter ? rng.uniform() : 0.5;
                    const auto sample = tracer.trace(cam.generate_ray(x + jx, y + jy), rng);
                    sum += sample.radiance;
                    // Welford update of the band-averaged value.
                    const double v = sample.radiance.average();
                    const double delta = v - mean_acc;
                    mean_acc += delta / static_cast<double>(s + 1);
                    m2 += delta * (v - mean_acc);
                    if (std::isfinite(sample.first_hit)) {
                        depth_sum += sample.first_hit;
                        ++depth_hits;
                    }
                }
                const std::size_t idx = static_cast<std::size_t>(y) * cam.width + x;
                out.radiance.set(x, y, sum * (1.0 / static_cast<double>(spp)));
                out.radiance.sample_count[idx] = static_cast<std::uint32_t>(spp);
                out.radiance.estimate_variance[idx] = spp > 1 ? m2 / static_cast<double>(spp - 1) / static_cast<double>(spp) : 0.0;
                out.depth.at(x, y) = depth_hits ? depth_sum / static_cast<double>(depth_hits) : kInfinity;
            }
        }
    });
    return out;
}

struct VariantRenders {
    std::vector<std::pair<FogTier, RadianceImage>> foggy;
    RadianceImage clear;
    DepthMap depth;
};

/// The scene with its scattering coefficient replaced; everything else untouched.
inline Scene with_scattering(const Scene &scene, double sigma_s) {
    Scene s = scene;
    s.medium.sigma_s = sigma_s;
    return s;
}

/// Clear render (sigma_s = 0) plus one render per tier, all with the same
/// seed. The depth map comes from the clear render; depth does not depend on fog.
inline VariantRenders render_variants(const Scene &scene, const std::vector<FogTier> &tiers,
                                      const RenderSettings &settings) {
    if (tiers.empty()) throw ConfigError("render_variants: at least one fog tier is required");
    VariantRenders out;
    RenderOutput clear = render(with_scattering(scene, 0.0), settings);
    out.clear = std::move(clear.radiance);
    out.depth = std::move(clear.depth);
    for (const FogTier &tier : tiers) {
        RenderOutput r = render(with_scattering(scene, tier.sigma_s), settings);
        out.foggy.emplace_back(tier, std::move(r.radiance));
    }
    return out;
}

} // namespace fogsim
