// fogsim command-line driver. Every subcommand reads an optional job config
// and applies flag overrides on top of it.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "fogsim/analysis.hpp"
#include "fogsim/pipeline.hpp"

using namespace fogsim;

namespace {

struct JobFlags {
    std::string config;
    std::optional<std::string> scene;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> output_dir;
    std::vector<double> tiers;
    std::vector<std::string> lighting;
    std::vector<std::string> outputs;
    std::optional<int> spp, max_bounces, rr_start, tile_size;
    std::optional<bool> jitter, area_nee;
    std::optional<double> f_number, magnification, vfov, psf_sigma;
    std::optional<std::string> preset, cfa;
    std::optional<double> exposure, pixel_area, full_well, conversion_gain, analog_gain, read_noise, dark_current,
        prnu, dsnu;
    std::optional<int> bit_depth, black_level;
    std::optional<bool> shot_noise;
    std::optional<std::string> wb;
    std::vector<double> ccm;
    std::optional<double> gamma;
    std::optional<int> patch_radius;
    std::optional<double> top_fraction;
    std::optional<bool> scalar_airlight;
};

void add_job_flags(CLI::App *app, JobFlags &f) {
    app->add_option("--config", f.config, "Job config file");
    app->add_option("--scene", f.scene, "Scene file");
    app->add_option("--seed", f.seed, "Master seed");
    app->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
    app->add_option("--output-dir", f.output_dir);
    app->add_option("--tiers", f.tiers, "Fog tiers as sigma_s values (1/m)")->delimiter(',');
    app->add_option("--lighting", f.lighting, "sky_only and/or sky_plus_active")->delimiter(',');
    app->add_option("--outputs", f.outputs, "radiance,depth,raw,rgb,asm_rgb")->delimiter(',');
    app->add_option("--spp", f.spp);
    app->add_option("--max-bounces", f.max_bounces);
    app->add_option("--rr-start-bounce", f.rr_start);
    app->add_option("--tile-size", f.tile_size);
    app->add_option("--jitter", f.jitter);
    app->add_option("--area-light-nee", f.area_nee);
    app->add_option("--f-number", f.f_number);
    app->add_option("--magnification", f.magnification);
    app->add_option("--vertical-fov", f.vfov);
    app->add_option("--psf-sigma", f.psf_sigma);
    app->add_option("--sensor-preset", f.preset);
    app->add_option("--cfa", f.cfa);
    app->add_option("--exposure", f.exposure, "Exposure time (s)");
    app->add_option("--pixel-area", f.pixel_area);
    app->add_option("--full-well", f.full_well);
    app->add_option("--conversion-gain", f.conversion_gain);
    app->add_option("--analog-gain", f.analog_gain);
    app->add_option("--read-noise", f.read_noise);
    app->add_option("--dark-current", f.dark_current);
    app->add_option("--prnu", f.prnu);
    app->add_option("--dsnu", f.dsnu);
    app->add_option("--bit-depth", f.bit_depth);
    app->add_option("--black-level", f.black_level);
    app->add_option("--shot-noise", f.shot_noise);
    app->add_option("--wb", f.wb, "neutral, gray_world or r,g,b");
    app->add_option("--ccm", f.ccm, "9 values, row-major")->delimiter(',');
    app->add_option("--gamma", f.gamma);
    app->add_option("--patch-radius", f.patch_radius);
    app->add_option("--top-fraction", f.top_fraction);
    app->add_option("--scalar-airlight", f.scalar_airlight);
}

template <class T, class U>
void set_if(const std::optional<T> &v, U &dst) {
    if (v) dst = *v;
}

JobConfig build_config(const JobFlags &f) {
    JobConfig cfg = f.config.empty() ? JobConfig{} : parse_job_config(f.config);
    set_if(f.scene, cfg.scene_path);
    if (f.seed) cfg.seed = f.seed;
    set_if(f.threads, cfg.threads);
    set_if(f.output_dir, cfg.output_dir);
    if (!f.tiers.empty()) {
        cfg.tiers.clear();
        for (double s : f.tiers) cfg.tiers.push_back(FogTier::from_sigma(s));
    }
    if (!f.lighting.empty()) {
        cfg.lighting.clear();
        for (const auto &m : f.lighting) cfg.lighting.push_back(parse_lighting_mode(m));
    }
    if (!f.outputs.empty()) {
        cfg.outputs.clear();
        for (const auto &o : f.outputs) cfg.outputs.insert(parse_output_kind(o));
    }
    set_if(f.spp, cfg.render.samples_per_pixel);
    set_if(f.max_bounces, cfg.render.max_bounces);
    set_if(f.rr_start, cfg.render.rr_start_bounce);
    set_if(f.tile_size, cfg.render.tile_size);
    set_if(f.jitter, cfg.render.jitter);
    set_if(f.area_nee, cfg.render.area_light_nee);
    set_if(f.f_number, cfg.optics.f_number);
    set_if(f.magnification, cfg.optics.magnification);
    set_if(f.vfov, cfg.optics.vertical_fov);
    set_if(f.psf_sigma, cfg.optics.psf_sigma_px);
    if (f.preset) {
        cfg.sensor_preset = *f.preset;
        cfg.sensor = sensor_preset(*f.preset, cfg.sensor.width, cfg.sensor.height);
    }
    if (f.cfa) cfg.sensor.cfa = CfaPattern::parse(*f.cfa);
    set_if(f.exposure, cfg.sensor.exposure_time);
    set_if(f.pixel_area, cfg.sensor.pixel_area);
    set_if(f.full_well, cfg.sensor.full_well);
    set_if(f.conversion_gain, cfg.sensor.conversion_gain);
    set_if(f.analog_gain, cfg.sensor.analog_gain);
    set_if(f.read_noise, cfg.sensor.read_noise_std);
    set_if(f.dark_current, cfg.sensor.dark_current);
    set_if(f.prnu, cfg.sensor.prnu_std);
    set_if(f.dsnu, cfg.sensor.dsnu_std);
    set_if(f.bit_depth, cfg.sensor.bit_depth);
    set_if(f.black_level, cfg.sensor.black_level);
    set_if(f.shot_noise, cfg.sensor.shot_noise);
    if (f.wb) {
        if (*f.wb == "neutral") {
            cfg.wb_mode = WhiteBalanceMode::neutral;
        } else if (*f.wb == "gray_world") {
            cfg.wb_mode = WhiteBalanceMode::gray_world;
        } else {
            std::array<double, 3> g{};
            char c1 = 0, c2 = 0;
            std::istringstream in(*f.wb);
            if (!(in >> g[0] >> c1 >> g[1] >> c2 >> g[2]) || c1 != ',' || c2 != ',')
                throw ValidationError("isp.wb", "expected neutral, gray_world or r,g,b");
            cfg.wb_mode = WhiteBalanceMode::fixed;
            cfg.isp.wb_gains = g;
        }
    }
    if (!f.ccm.empty()) {
        if (f.ccm.size() != 9) throw ValidationError("isp.ccm", "expected 9 values");
        std::copy(f.ccm.begin(), f.ccm.end(), cfg.isp.ccm.begin());
    }
    set_if(f.gamma, cfg.isp.gamma);
    set_if(f.patch_radius, cfg.asm_settings.patch_radius);
    set_if(f.top_fraction, cfg.asm_settings.top_fraction);
    set_if(f.scalar_airlight, cfg.asm_settings.scalar_airlight);
    return cfg;
}

std::uint64_t require_seed(const JobConfig &cfg) {
    if (!cfg.seed) throw ConfigError("--seed is required (or 'seed' in the config)");
    return *cfg.seed;
}

Rect parse_rect(const std::string &s) {
    Rect r;
    char a = 0, b = 0, c = 0;
    std::istringstream in(s);
    if (!(in >> r.x >> a >> r.y >> b >> r.width >> c >> r.height) || a != ',' || b != ',' || c != ',')
        throw ValidationError("rect", "expected x,y,w,h: '" + s + "'");
    return r;
}

Image read_analysis_image(const std::string &path) {
    const std::string bytes = read_binary_file(path);
    if (bytes.rfind("P6", 0) == 0) return to_unit(decode_ppm(bytes, path));
    return decode_float_container(bytes, path).image;
}

void print_channels(const char *label, const std::vector<double> &v) {
    std::printf("%s", label);
    for (double x : v) std::printf(" %.9g", x);
    std::printf("\n");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Spectral fog simulation: rendering, sensor, ISP and fog analysis"};
    app.require_subcommand(1);

    // render
    JobFlags render_f;
    std::string render_out, render_depth;
    double render_sigma = 0.0;
    auto *render_cmd = app.add_subcommand("render", "Path-trace one radiance image (and depth)");
    add_job_flags(render_cmd, render_f);
    render_cmd->add_option("--sigma-s", render_sigma, "Scattering coefficient (1/m)");
    render_cmd->add_option("-o,--out", render_out, "Radiance float container")->required();
    render_cmd->add_option("--depth-out", render_depth, "Depth float container");

    // asm-fog
    JobFlags asm_f;
    std::string asm_image, asm_depth, asm_out;
    double asm_beta = 0.0;
    std::vector<double> asm_airlight;
    auto *asm_cmd = app.add_subcommand("asm-fog", "Synthesize fog from a clear image and depth map");
    add_job_flags(asm_cmd, asm_f);
    asm_cmd->add_option("--image", asm_image, "Clear RGB (PPM or float container)")->required();
    asm_cmd->add_option("--depth", asm_depth, "Depth float container")->required();
    asm_cmd->add_option("--beta", asm_beta, "Extinction (1/m)")->required();
    asm_cmd->add_option("--airlight", asm_airlight, "r,g,b linear airlight (default: estimated)")->delimiter(',');
    asm_cmd->add_option("-o,--out", asm_out, "Output PPM")->required();

    // expose
    JobFlags expose_f;
    std::string expose_in, expose_out;
    std::uint64_t expose_frame = 0;
    auto *expose_cmd = app.add_subcommand("expose", "Optics and sensor: radiance to raw mosaic");
    add_job_flags(expose_cmd, expose_f);
    expose_cmd->add_option("--radiance", expose_in, "Radiance float container")->required();
    expose_cmd->add_option("--frame", expose_frame, "Temporal noise frame id");
    expose_cmd->add_option("-o,--out", expose_out, "Raw PGM (sidecar written alongside)")->required();

    // isp
    JobFlags isp_f;
    std::string isp_in, isp_out;
    auto *isp_cmd = app.add_subcommand("isp", "Raw mosaic to 8-bit RGB");
    add_job_flags(isp_cmd, isp_f);
    isp_cmd->add_option("--raw", isp_in, "Raw PGM with .meta sidecar")->required();
    isp_cmd->add_option("-o,--out", isp_out, "Output PPM")->required();

    // dataset
    JobFlags dataset_f;
    auto *dataset_cmd = app.add_subcommand("dataset", "Full multi-tier dataset run");
    add_job_flags(dataset_cmd, dataset_f);

    // chamber
    std::optional<double> ch_sigma, ch_mor, ch_p0, ch_pu, ch_len;
    auto *chamber_cmd = app.add_subcommand("chamber", "Visibility and attenuation calculators");
    chamber_cmd->add_option("--sigma-s", ch_sigma, "Scattering coefficient -> MOR");
    chamber_cmd->add_option("--mor", ch_mor, "MOR (m) -> scattering coefficient");
    chamber_cmd->add_option("--p0", ch_p0, "Emitted power");
    chamber_cmd->add_option("--pu", ch_pu, "Received power");
    chamber_cmd->add_option("--length", ch_len, "Path length (m)");
    std::string ch_config;
    chamber_cmd->add_option("--config", ch_config, "Job config; prints MOR for each tier");

    // analyze
    auto *analyze_cmd = app.add_subcommand("analyze", "Contrast stretch, noise and trend analysis");
    analyze_cmd->require_subcommand(1);
    std::string an_config;
    analyze_cmd->add_option("--config", an_config, "Job config (unused by the analysis itself)");

    std::string st_in, st_out;
    int st_window = 31;
    auto *stretch_cmd = analyze_cmd->add_subcommand("stretch", "Regional contrast stretch");
    stretch_cmd->add_option("--image", st_in)->required();
    stretch_cmd->add_option("--window", st_window, "Odd window size (px)");
    stretch_cmd->add_option("-o,--out", st_out, "Output PPM")->required();

    std::string nz_in, nz_rect;
    std::optional<int> nz_window;
    auto *noise_cmd = analyze_cmd->add_subcommand("noise", "Residual noise std in a region");
    noise_cmd->add_option("--image", nz_in)->required();
    noise_cmd->add_option("--rect", nz_rect, "x,y,w,h")->required();
    noise_cmd->add_option("--stretch-window", nz_window, "Stretch before measuring");

    std::vector<std::string> tr_images, tr_patches;
    std::string tr_out, tr_stretch_dir;
    int tr_window = 31;
    auto *trend_cmd = analyze_cmd->add_subcommand("trend", "Per-patch mean against fog density (CSV)");
    trend_cmd->add_option("--image", tr_images, "sigma_s=path, repeatable")->required();
    trend_cmd->add_option("--patch", tr_patches, "x,y,w,h, repeatable")->required();
    trend_cmd->add_option("-o,--out", tr_out, "CSV file (default stdout)");
    trend_cmd->add_option("--stretch-dir", tr_stretch_dir, "Write stretched images here");
    trend_cmd->add_option("--stretch-window", tr_window);

    CLI11_PARSE(app, argc, argv);

    try {
        if (render_cmd->parsed()) {
            JobConfig cfg = build_config(render_f);
            RenderSettings rs = cfg.render;
            rs.seed = require_seed(cfg);
            rs.threads = cfg.threads;
            Scene scene = lighting_variant(parse_scene(cfg.scene_path), cfg.lighting.front());
            if (render_cmd->count("--sigma-s")) scene = with_scattering(scene, render_sigma);
            const RenderOutput out = render(scene, rs);
            write_float_container(render_out, to_container(out.radiance));
            if (!render_depth.empty()) write_float_container(render_depth, to_container(out.depth));
        } else if (asm_cmd->parsed()) {
            JobConfig cfg = build_config(asm_f);
            const Image clear = read_linear_rgb(asm_image, cfg.isp.gamma);
            const DepthMap depth = depth_from_container(read_float_container(asm_depth), asm_depth);
            std::vector<double> airlight = asm_airlight;
            if (airlight.empty()) {
                airlight = estimate_airlight(clear, cfg.asm_settings.patch_radius, cfg.asm_settings.top_fraction);
                if (cfg.asm_settings.scalar_airlight) airlight = scalar_airlight(airlight);
            }
            print_channels("airlight", airlight);
            write_ppm(asm_out, to_rgb8(synthesize_asm(clear, depth, AsmParams{asm_beta, airlight}), cfg.isp.gamma));
        } else if (expose_cmd->parsed()) {
            JobConfig cfg = build_config(expose_f);
            const RadianceImage rad = radiance_from_container(read_float_container(expose_in), expose_in);
            cfg.validate();
            const CameraChain chain{cfg, require_seed(cfg)};
            write_raw(expose_out, chain.raw(rad, expose_frame));
        } else if (isp_cmd->parsed()) {
            JobConfig cfg = build_config(isp_f);
            const RawImage raw = read_raw(isp_in);
            const CameraChain chain{cfg, 0};
            write_ppm(isp_out, chain.rgb(raw));
        } else if (dataset_cmd->parsed()) {
            JobConfig cfg = build_config(dataset_f);
            require_seed(cfg);
            const Manifest m = run(cfg);
            std::printf("%zu files, %zu failures, manifest %s\n", m.entries.size(), m.failures.size(), m.path.c_str());
            for (const auto &[variant, msg] : m.failures) std::fprintf(stderr, "failed %s: %s\n", variant.c_str(), msg.c_str());
            return m.ok() ? 0 : 1;
        } else if (chamber_cmd->parsed()) {
            bool any = false;
            if (ch_sigma) {
                std::printf("sigma_s %.9g -> MOR %.9g m\n", *ch_sigma, mor_from_sigma(*ch_sigma));
                any = true;
            }
            if (ch_mor) {
                std::printf("MOR %.9g m -> sigma_s %.9g 1/m\n", *ch_mor, sigma_from_mor(*ch_mor));
                any = true;
            }
            if (ch_p0 || ch_pu || ch_len) {
                if (!(ch_p0 && ch_pu && ch_len)) throw ConfigError("--p0, --pu and --length go together");
                std::printf("sigma_s %.9g 1/m\n", sigma_from_power(*ch_p0, *ch_pu, *ch_len));
                any = true;
            }
            if (!ch_config.empty()) {
                for (const FogTier &t : parse_job_config(ch_config).tiers)
                    std::printf("%s sigma_s %.9g -> MOR %.9g m\n", t.label().c_str(), t.sigma_s, mor_from_sigma(t.sigma_s));
                any = true;
            }
            if (!any) throw ConfigError("nothing to compute; pass --sigma-s, --mor, --p0/--pu/--length or --config");
        } else if (stretch_cmd->parsed()) {
            write_ppm(st_out, to_rgb8(regional_contrast_stretch(read_analysis_image(st_in), st_window), 1.0));
        } else if (noise_cmd->parsed()) {
            Image img = read_analysis_image(nz_in);
            if (nz_window) img = regional_contrast_stretch(img, *nz_window);
            print_channels("noise_std", noise_std_estimate(img, parse_rect(nz_rect)));
        } else if (trend_cmd->parsed()) {
            std::vector<std::pair<double, Image>> series;
            for (const auto &spec : tr_images) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos) throw ValidationError("image", "expected sigma_s=path: '" + spec + "'");
                const double sigma = std::stod(spec.substr(0, eq));
                Image img = read_analysis_image(spec.substr(eq + 1));
                if (!tr_stretch_dir.empty()) {
                    const std::string out = tr_stretch_dir + "/stretch_s" + spec.substr(0, eq) + ".ppm";
                    write_ppm(out, to_rgb8(regional_contrast_stretch(img, tr_window), 1.0));
                }
                series.emplace_back(sigma, std::move(img));
            }
            std::vector<Rect> patches;
            for (const auto &p : tr_patches) patches.push_back(parse_rect(p));
            const PatchTrend trend = patch_trend(std::move(series), patches);
            if (tr_out.empty()) std::cout << trend.to_csv();
            else write_file_atomic(tr_out, trend.to_csv());
            for (std::size_t p = 0; p < trend.verdicts.size(); ++p)
                std::fprintf(stderr, "patch %zu: %s\n", p, to_string(trend.verdicts[p]));
        }
    } catch (const std::exception &e) {
        std::fprintf(stderr, "fogsim: %s\n", e.what());
        return 1;
    }
    return 0;
}
