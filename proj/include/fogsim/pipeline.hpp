#pragma once

#include <bit>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "atmospheric.hpp"
#include "camera.hpp"
#include "camera_io.hpp"
#include "hash.hpp"
#include "image_io.hpp"
#include "isp.hpp"
#include "json_fields.hpp"
#include "render.hpp"
#include "scene_io.hpp"

namespace fogsim {

enum class OutputKind { radiance, depth, raw, rgb, asm_rgb };
enum class LightingMode { sky_only, sky_plus_active };

inline const char *to_string(OutputKind k) {
    switch (k) {
    case OutputKind::radiance: return "radiance";
    case OutputKind::depth: return "depth";
    case OutputKind::raw: return "raw";
    case OutputKind::rgb: return "rgb";
    case OutputKind::asm_rgb: return "asm_rgb";
    }
    return "?";
}

inline const char *to_string(LightingMode m) { return m == LightingMode::sky_only ? "sky_only" : "sky_plus_active"; }

inline OutputKind parse_output_kind(const std::string &s) {
    for (OutputKind k : {OutputKind::radiance, OutputKind::depth, OutputKind::raw, OutputKind::rgb, OutputKind::asm_rgb})
        if (s == to_string(k)) return k;
    throw ValidationError("outputs", "unknown output '" + s + "'");
}

inline LightingMode parse_lighting_mode(const std::string &s) {
    if (s == "sky_only") return LightingMode::sky_only;
    if (s == "sky_plus_active") return LightingMode::sky_plus_active;
    throw ValidationError("lighting", "unknown lighting mode '" + s + "'");
}

/// Keeps only sky-role lights, or all lights.
inline Scene lighting_variant(const Scene &scene, LightingMode mode) {
    if (mode == LightingMode::sky_plus_active) return scene;
    Scene out = scene;
    out.lights.clear();
    for (const Light &l : scene.lights)
        if (l.role == LightRole::sky) out.lights.push_back(l);
    if (out.lights.empty()) throw ConfigError("lighting_variant: scene has no sky light for sky_only");
    return out;
}

/// White-balance selection: fixed gains, gray-world, or the sensor's neutral gains.
enum class WhiteBalanceMode { fixed, gray_world, neutral };

struct AsmSettings {
    int patch_radius = 7;
    double top_fraction = 0.001;
    bool scalar_airlight = false;
};

struct JobConfig {
    std::string scene_path;
    std::string name; ///< defaults to the scene name
    std::vector<FogTier> tiers = FogTier::standard();
    std::vector<LightingMode> lighting{LightingMode::sky_plus_active};
    RenderSettings render;
    OpticsSpec optics;
    std::string sensor_preset = "generic_smartphone";
    SensorSpec sensor = generic_smartphone_sensor();
    IspConfig isp;
    WhiteBalanceMode wb_mode = WhiteBalanceMode::neutral;
    AsmSettings asm_settings;
    std::set<OutputKind> outputs{OutputKind::rgb, OutputKind::depth};
    std::optional<std::uint64_t> seed;
    std::string output_dir = "out";
    int threads = 0;

    void validate() const {
        if (outputs.empty()) throw ConfigError("at least one output must be requested");
        if (tiers.empty()) throw ConfigError("at least one fog tier is required");
        if (lighting.empty()) throw ConfigError("at least one lighting mode is required");
        render.validate();
        optics.validate();
        sensor.validate();
        isp.validate();
        if (asm_settings.patch_radius < 0) throw ValidationError("asm.patch_radius", "must be >= 0");
        if (!(asm_settings.top_fraction > 0.0 && asm_settings.top_fraction <= 1.0))
            throw ValidationError("asm.top_fraction", "must be in (0, 1]");
    }
};

namespace detail {

inline void read_render_settings(FieldReader r, RenderSettings &s) {
    s.samples_per_pixel = static_cast<int>(r.integer("samples_per_pixel", s.samples_per_pixel));
    s.max_bounces = static_cast<int>(r.integer("max_bounces", s.max_bounces));
    s.rr_start_bounce = static_cast<int>(r.integer("rr_start_bounce", s.rr_start_bounce));
    s.tile_size = static_cast<int>(r.integer("tile_size", s.tile_size));
    s.jitter = r.boolean("jitter", s.jitter);
    s.area_light_nee = r.boolean("area_light_nee", s.area_light_nee);
    r.finish();
}

inline void read_optics(FieldReader r, OpticsSpec &o) {
    o.f_number = r.number("f_number", o.f_number);
    o.magnification = r.number("magnification", o.magnification);
    o.vertical_fov = r.number("vertical_fov", o.vertical_fov);
    o.psf_sigma_px = r.number("psf_sigma_px", o.psf_sigma_px);
    r.finish();
}

inline void read_sensor(FieldReader r, JobConfig &cfg) {
    cfg.sensor_preset = r.string("preset", cfg.sensor_preset);
    SensorSpec s = sensor_preset(cfg.sensor_preset, cfg.sensor.width, cfg.sensor.height);
    if (r.has("cfa")) s.cfa = CfaPattern::parse(r.string("cfa"));
    if (r.has("qe")) {
        FieldReader q = r.object("qe");
        s.qe[0] = q.spectrum("r");
        s.qe[1] = q.spectrum("g");
        s.qe[2] = q.spectrum("b");
        q.finish();
    }
    s.pixel_area = r.number("pixel_area", s.pixel_area);
    s.exposure_time = r.number("exposure_time", s.exposure_time);
    s.full_well = r.number("full_well", s.full_well);
    s.conversion_gain = r.number("conversion_gain", s.conversion_gain);
    s.analog_gain = r.number("analog_gain", s.analog_gain);
    s.read_noise_std = r.number("read_noise_std", s.read_noise_std);
    s.dark_current = r.number("dark_current", s.dark_current);
    s.prnu_std = r.number("prnu_std", s.prnu_std);
    s.dsnu_std = r.number("dsnu_std", s.dsnu_std);
    s.bit_depth = static_cast<int>(r.integer("bit_depth", s.bit_depth));
    s.black_level = static_cast<int>(r.integer("black_level", s.black_level));
    s.shot_noise = r.boolean("shot_noise", s.shot_noise);
    r.finish();
    cfg.sensor = s;
}

inline void read_isp(FieldReader r, JobConfig &cfg) {
    if (r.has("wb")) {
        const Json &wb = r.raw("wb");
        if (wb.is_string() && wb.get<std::string>() == "gray_world") {
            cfg.wb_mode = WhiteBalanceMode::gray_world;
        } else if (wb.is_string() && wb.get<std::string>() == "neutral") {
            cfg.wb_mode = WhiteBalanceMode::neutral;
        } else {
            const auto g = r.numbers("wb");
            if (g.size() != 3) throw ValidationError(r.field("wb"), "expected 'gray_world', 'neutral' or [r, g, b]");
            cfg.wb_mode = WhiteBalanceMode::fixed;
            cfg.isp.wb_gains = std::array<double, 3>{g[0], g[1], g[2]};
        }
    }
    if (r.has("ccm")) {
        const auto m = r.numbers("ccm");
        if (m.size() != 9) throw ValidationError(r.field("ccm"), "expected 9 values, row-major");
        std::copy(m.begin(), m.end(), cfg.isp.ccm.begin());
    }
    cfg.isp.gamma = r.number("gamma", cfg.isp.gamma);
    cfg.isp.output_bits = static_cast<int>(r.integer("output_bits", cfg.isp.output_bits));
    r.finish();
}

} // namespace detail

/// Parses a job config. Relative scene paths resolve against `base_dir`.
inline JobConfig parse_job_config_text(const std::string &text, const std::string &source,
                                       const std::filesystem::path &base_dir = {}) {
    const Json root = parse_json_text(text, source);
    FieldReader r(root, "");
    JobConfig cfg;
    if (r.has("scene")) {
        std::filesystem::path p = r.string("scene");
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        cfg.scene_path = p.lexically_normal().string();
    }
    cfg.name = r.string("name", "");
    if (r.has("tiers")) {
        const auto sig = r.numbers("tiers");
        cfg.tiers.clear();
        for (double s : sig) cfg.tiers.push_back(FogTier::from_sigma(s));
    }
    if (r.has("lighting")) {
        const Json &l = r.raw("lighting");
        cfg.lighting.clear();
        if (!l.is_array()) throw ValidationError("lighting", "expected a list of lighting modes");
        for (const auto &m : l) {
            if (!m.is_string()) throw ValidationError("lighting", "expected strings");
            cfg.lighting.push_back(parse_lighting_mode(m.get<std::string>()));
        }
    }
    if (r.has("render")) detail::read_render_settings(r.object("render"), cfg.render);
    if (r.has("optics")) detail::read_optics(r.object("optics"), cfg.optics);
    if (r.has("sensor")) detail::read_sensor(r.object("sensor"), cfg);
    if (r.has("isp")) detail::read_isp(r.object("isp"), cfg);
    if (r.has("asm")) {
        FieldReader a = r.object("asm");
        cfg.asm_settings.patch_radius = static_cast<int>(a.integer("patch_radius", cfg.asm_settings.patch_radius));
        cfg.asm_settings.top_fraction = a.number("top_fraction", cfg.asm_settings.top_fraction);
        cfg.asm_settings.scalar_airlight = a.boolean("scalar_airlight", cfg.asm_settings.scalar_airlight);
        a.finish();
    }
    if (r.has("outputs")) {
        const Json &o = r.raw("outputs");
        if (!o.is_array()) throw ValidationError("outputs", "expected a list");
        cfg.outputs.clear();
        for (const auto &k : o) {
            if (!k.is_string()) throw ValidationError("outputs", "expected strings");
            cfg.outputs.insert(parse_output_kind(k.get<std::string>()));
        }
    }
    if (r.has("seed")) cfg.seed = r.unsigned_integer("seed");
    cfg.output_dir = r.string("output_dir", cfg.output_dir);
    cfg.threads = static_cast<int>(r.integer("threads", cfg.threads));
    r.finish();
    return cfg;
}

inline JobConfig parse_job_config(const std::string &path) {
    return parse_job_config_text(read_text_file(path), path, std::filesystem::path(path).parent_path());
}

/// Canonical description of everything that affects output bytes. Worker
/// count and output directory are excluded.
inline Json config_snapshot(const JobConfig &cfg) {
    Json j;
    j["scene"] = cfg.scene_path;
    j["name"] = cfg.name;
    Json tiers = Json::array();
    for (const auto &t : cfg.tiers) tiers.push_back(t.sigma_s);
    j["tiers"] = tiers;
    Json lighting = Json::array();
    for (auto m : cfg.lighting) lighting.push_back(to_string(m));
    j["lighting"] = lighting;
    j["render"] = {{"samples_per_pixel", cfg.render.samples_per_pixel},
                   {"max_bounces", cfg.render.max_bounces},
                   {"rr_start_bounce", cfg.render.rr_start_bounce},
                   {"tile_size", cfg.render.tile_size},
                   {"jitter", cfg.render.jitter},
                   {"area_light_nee", cfg.render.area_light_nee}};
    j["optics"] = {{"f_number", cfg.optics.f_number},
                   {"magnification", cfg.optics.magnification},
                   {"vertical_fov", cfg.optics.vertical_fov},
                   {"psf_sigma_px", cfg.optics.psf_sigma_px}};
    const SensorSpec &s = cfg.sensor;
    j["sensor"] = {{"preset", cfg.sensor_preset},      {"cfa", s.cfa.name()},
                   {"pixel_area", s.pixel_area},       {"exposure_time", s.exposure_time},
                   {"full_well", s.full_well},         {"conversion_gain", s.conversion_gain},
                   {"analog_gain", s.analog_gain},     {"read_noise_std", s.read_noise_std},
                   {"dark_current", s.dark_current},   {"prnu_std", s.prnu_std},
                   {"dsnu_std", s.dsnu_std},           {"bit_depth", s.bit_depth},
                   {"black_level", s.black_level},
                   {"shot_noise", s.shot_noise}};
    Json qe = Json::array();
    for (int c = 0; c < 3; ++c) qe.push_back(s.qe[c].values());
    j["sensor"]["qe"] = qe;
    Json wb;
    if (cfg.wb_mode == WhiteBalanceMode::gray_world) wb = "gray_world";
    else if (cfg.wb_mode == WhiteBalanceMode::neutral) wb = "neutral";
    else wb = *cfg.isp.wb_gains;
    j["isp"] = {{"wb", wb}, {"ccm", cfg.isp.ccm}, {"gamma", cfg.isp.gamma}, {"output_bits", cfg.isp.output_bits}};
    j["asm"] = {{"patch_radius", cfg.asm_settings.patch_radius},
                {"top_fraction", cfg.asm_settings.top_fraction},
                {"scalar_airlight", cfg.asm_settings.scalar_airlight}};
    Json outputs = Json::array();
    for (auto k : cfg.outputs) outputs.push_back(to_string(k));
    j["outputs"] = outputs;
    j["seed"] = cfg.seed ? Json(*cfg.seed) : Json(nullptr);
    return j;
}

struct ManifestEntry {
    std::string file;    ///< path relative to the output directory
    std::string sha256;
    std::string variant; ///< "<lighting>/<tier|clear>"
    std::string output;  ///< output kind
};

struct Manifest {
    std::string path;
    Json config;
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> entries;
    std::vector<std::pair<std::string, std::string>> failures; ///< (variant, message)

    bool ok() const { return failures.empty(); }

    std::string to_text() const {
        std::ostringstream out;
        out << "fogsim-manifest 1\n";
        out << "seed " << seed << "\n";
        out << "config " << config.dump() << "\n";
        for (const auto &e : entries)
            out << "file " << e.file << " sha256 " << e.sha256 << " seed " << seed << " variant " << e.variant
                << " output " << e.output << "\n";
        for (const auto &[variant, msg] : failures) out << "failed " << variant << " " << msg << "\n";
        return out.str();
    }
};

/// Temporal-noise frame id for a capture; depends on the variant only, so
/// adding or removing tiers does not disturb the others.
inline std::uint64_t capture_frame(LightingMode mode, double sigma_s) {
    return hash_words({static_cast<std::uint64_t>(mode), std::bit_cast<std::uint64_t>(sigma_s)});
}

/// Optics, sensor and ISP applied to one radiance image.
struct CameraChain {
    const JobConfig &cfg;
    std::uint64_t seed;

    SensorSpec sensor_for(const RadianceImage &rad) const {
        SensorSpec s = cfg.sensor;
        s.width = rad.width();
        s.height = rad.height();
        return s;
    }

    IspConfig isp_for(const SensorSpec &s) const {
        IspConfig isp = cfg.isp;
        if (cfg.wb_mode == WhiteBalanceMode::gray_world) isp.wb_gains.reset();
        else if (cfg.wb_mode == WhiteBalanceMode::neutral) isp.wb_gains = s.neutral_wb_gains();
        return isp;
    }

    RawImage raw(const RadianceImage &rad, std::uint64_t frame) const {
        const SensorSpec s = sensor_for(rad);
        return expose(optics_irradiance(rad, cfg.optics), s, seed, frame, cfg.threads);
    }

    Rgb8Image rgb(const RawImage &raw) const { return process(raw, isp_for(raw.spec), cfg.threads); }
};

/// End-to-end dataset generation: per lighting mode, one clear and one
/// foggy capture per tier, the shared depth map, and optional ASM variants
/// built from the clear RGB image and depth. Writes a manifest last.
inline Manifest run(const JobConfig &cfg_in) {
    JobConfig cfg = cfg_in;
    cfg.validate();
    if (!cfg.seed) throw ConfigError("a seed is required");
    if (cfg.scene_path.empty()) throw ConfigError("no scene file given");
    const Scene scene = parse_scene(cfg.scene_path);
    const std::string name = cfg.name.empty() ? scene.name : cfg.name;
    const std::uint64_t seed = *cfg.seed;
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);

    Manifest manifest;
    manifest.config = config_snapshot(cfg);
    manifest.seed = seed;
    manifest.path = (dir / (name + "_manifest.txt")).string();

    RenderSettings rs = cfg.render;
    rs.seed = seed;
    rs.threads = cfg.threads;
    const CameraChain chain{cfg, seed};
    auto wants = [&](OutputKind k) { return cfg.outputs.count(k) > 0; };

    auto emit = [&](const std::string &file, const std::string &bytes, const std::string &variant, OutputKind kind) {
        write_file_atomic((dir / file).string(), bytes);
        manifest.entries.push_back({file, sha256_hex(bytes), variant, to_string(kind)});
    };

    for (LightingMode mode : cfg.lighting) {
        const std::string prefix = name + "_" + to_string(mode) + "_";
        Scene lit;
        try {
            lit = lighting_variant(scene, mode);
        } catch (const std::exception &e) {
            manifest.failures.emplace_back(std::string(to_string(mode)) + "/*", e.what());
            continue;
        }

        // Clear capture; its RGB and depth also feed the ASM variants.
        std::optional<Image> clear_linear;
        DepthMap depth;
        bool clear_ok = false;
        const std::string clear_variant = std::string(to_string(mode)) + "/clear";
        try {
            RenderOutput clear = render(with_scattering(lit, 0.0), rs);
            depth = clear.depth;
            if (wants(OutputKind::depth))
                emit(prefix + "depth.fimg", encode_float_container(to_container(depth)), clear_variant, OutputKind::depth);
            if (wants(OutputKind::radiance))
                emit(prefix + "clear_radiance.fimg", encode_float_container(to_container(clear.radiance)), clear_variant,
                     OutputKind::radiance);
            if (wants(OutputKind::raw) || wants(OutputKind::rgb) || wants(OutputKind::asm_rgb)) {
                const RawImage raw = chain.raw(clear.radiance, capture_frame(mode, 0.0));
                if (wants(OutputKind::raw)) {
                    emit(prefix + "clear_raw.pgm", encode_raw_pnm(raw), clear_variant, OutputKind::raw);
                    emit(prefix + "clear_raw.pgm.meta", encode_raw_meta(raw), clear_variant, OutputKind::raw);
                }
                const Rgb8Image rgb = chain.rgb(raw);
                if (wants(OutputKind::rgb)) emit(prefix + "clear_rgb.ppm", encode_ppm(rgb), clear_variant, OutputKind::rgb);
                clear_linear = to_linear(rgb, cfg.isp.gamma);
            }
            clear_ok = true;
        } catch (const std::exception &e) {
            manifest.failures.emplace_back(clear_variant, e.what());
        }

        std::vector<double> airlight;
        if (clear_ok && wants(OutputKind::asm_rgb)) {
            airlight = estimate_airlight(*clear_linear, cfg.asm_settings.patch_radius, cfg.asm_settings.top_fraction);
            if (cfg.asm_settings.scalar_airlight) airlight = scalar_airlight(airlight);
        }

        for (const FogTier &tier : cfg.tiers) {
            const std::string variant = std::string(to_string(mode)) + "/" + tier.label();
            const std::string stem = prefix + tier.label() + "_";
            try {
                if (wants(OutputKind::radiance) || wants(OutputKind::raw) || wants(OutputKind::rgb)) {
                    RenderOutput foggy = render(with_scattering(lit, tier.sigma_s), rs);
                    if (wants(OutputKind::radiance))
                        emit(stem + "radiance.fimg", encode_float_container(to_container(foggy.radiance)), variant,
                             OutputKind::radiance);
                    if (wants(OutputKind::raw) || wants(OutputKind::rgb)) {
                        const RawImage raw = chain.raw(foggy.radiance, capture_frame(mode, tier.sigma_s));
                        if (wants(OutputKind::raw)) {
                            emit(stem + "raw.pgm", encode_raw_pnm(raw), variant, OutputKind::raw);
                            emit(stem + "raw.pgm.meta", encode_raw_meta(raw), variant, OutputKind::raw);
                        }
                        if (wants(OutputKind::rgb)) emit(stem + "rgb.ppm", encode_ppm(chain.rgb(raw)), variant, OutputKind::rgb);
                    }
                }
                if (wants(OutputKind::asm_rgb)) {
                    if (!clear_ok) throw std::runtime_error("clear capture failed; ASM variant needs it");
                    const Image fog = synthesize_asm(*clear_linear, depth, AsmParams{tier.sigma_s, airlight});
                    emit(stem + "asm_rgb.ppm", encode_ppm(to_rgb8(fog, cfg.isp.gamma)), variant, OutputKind::asm_rgb);
                }
            } catch (const std::exception &e) {
                manifest.failures.emplace_back(variant, e.what());
            }
        }
    }
    write_file_atomic(manifest.path, manifest.to_text());
    return manifest;
}

} // namespace fogsim
