#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <map>

#include "fogsim/pipeline.hpp"
#include "test_support.hpp"

using namespace fogsim;
using namespace fogsim::testing;
namespace fs = std::filesystem;

namespace {

JobConfig small_job(const fs::path &dir, const std::string &scene = "minimal.scene") {
    JobConfig cfg;
    cfg.scene_path = scene_path(scene);
    cfg.render.samples_per_pixel = 4;
    cfg.render.max_bounces = 4;
    cfg.tiers = {FogTier::from_sigma(0.005), FogTier::from_sigma(0.01), FogTier::from_sigma(0.02)};
    cfg.outputs = {OutputKind::rgb, OutputKind::depth};
    cfg.seed = 7;
    cfg.output_dir = dir.string();
    cfg.threads = 1;
    return cfg;
}

std::map<std::string, std::string> hashes(const Manifest &m) {
    std::map<std::string, std::string> out;
    for (const auto &e : m.entries) out[e.file] = e.sha256;
    return out;
}

std::vector<std::string> files_in(const fs::path &dir) {
    std::vector<std::string> out;
    for (const auto &e : fs::directory_iterator(dir)) out.push_back(e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

int run_cli(const std::string &args) {
    const std::string cmd = std::string(FOGSIM_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(JobConfig, ParsesAllSections) {
    const JobConfig cfg = parse_job_config_text(R"({
      "scene": "scenes/chamber.scene",
      "tiers": [0.005, 0.03],
      "lighting": ["sky_only", "sky_plus_active"],
      "render": {"samples_per_pixel": 16, "max_bounces": 6},
      "optics": {"f_number": 4},
      "sensor": {"preset": "generic_smartphone", "exposure_time": 0.02, "shot_noise": false},
      "isp": {"wb": [2, 1, 1.5], "gamma": 0.5},
      "asm": {"patch_radius": 3, "scalar_airlight": true},
      "outputs": ["raw", "asm_rgb"],
      "seed": 42
    })", "job", "/data");
    EXPECT_EQ(cfg.scene_path, "/data/scenes/chamber.scene");
    ASSERT_EQ(cfg.tiers.size(), 2u);
    EXPECT_EQ(cfg.tiers[0].label(), "heavy");
    EXPECT_EQ(cfg.tiers[1].label(), "s0.03");
    EXPECT_EQ(cfg.lighting.size(), 2u);
    EXPECT_EQ(cfg.render.samples_per_pixel, 16);
    EXPECT_EQ(cfg.optics.f_number, 4.0);
    EXPECT_EQ(cfg.sensor.exposure_time, 0.02);
    EXPECT_FALSE(cfg.sensor.shot_noise);
    EXPECT_EQ(cfg.wb_mode, WhiteBalanceMode::fixed);
    EXPECT_EQ((*cfg.isp.wb_gains)[2], 1.5);
    EXPECT_EQ(cfg.asm_settings.patch_radius, 3);
    EXPECT_TRUE(cfg.asm_settings.scalar_airlight);
    EXPECT_EQ(cfg.outputs, (std::set<OutputKind>{OutputKind::raw, OutputKind::asm_rgb}));
    EXPECT_EQ(*cfg.seed, 42u);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(JobConfig, RejectsBadInput) {
    EXPECT_THROW(parse_job_config_text(R"({"tiers": [-0.01]})", "job"), ValidationError);
    EXPECT_THROW(parse_job_config_text(R"({"outputs": ["jpeg"]})", "job"), ValidationError);
    EXPECT_THROW(parse_job_config_text(R"({"lighting": ["moonlight"]})", "job"), ValidationError);
    EXPECT_THROW(parse_job_config_text(R"({"sample_per_pixel": 4})", "job"), std::exception);
    EXPECT_THROW(parse_job_config_text(R"({"isp": {"ccm": [1, 0, 0]}})", "job"), ValidationError);
    EXPECT_THROW(parse_job_config_text(R"({"sensor": {"preset": "nope"}})", "job"), std::exception);
    EXPECT_THROW(parse_job_config_text("{", "job"), std::exception);
    EXPECT_THROW(parse_job_config_text(R"({"outputs": []})", "job").validate(), ConfigError);
}

TEST(JobConfig, ShippedConfigsParse) {
    for (const auto &e : fs::directory_iterator(FOGSIM_CONFIG_DIR)) {
        SCOPED_TRACE(e.path().string());
        const JobConfig cfg = parse_job_config(e.path().string());
        EXPECT_NO_THROW(cfg.validate());
        EXPECT_TRUE(fs::exists(cfg.scene_path));
    }
}

TEST(LightingVariant, FiltersByRole) {
    const Scene scene = parse_scene(scene_path("street_night.scene"));
    ASSERT_EQ(scene.lights.size(), 3u);
    EXPECT_EQ(lighting_variant(scene, LightingMode::sky_only).lights.size(), 1u);
    EXPECT_EQ(lighting_variant(scene, LightingMode::sky_plus_active).lights.size(), 3u);
    EXPECT_THROW(lighting_variant(parse_scene(scene_path("minimal.scene")), LightingMode::sky_only), ConfigError);
}

TEST(LightingVariant, ActiveLightsBrightenLampRegion) {
    const Scene scene = with_scattering(parse_scene(scene_path("street_night.scene")), 0.01);
    RenderSettings rs;
    rs.samples_per_pixel = 8;
    rs.seed = 3;
    const RenderOutput sky = render(lighting_variant(scene, LightingMode::sky_only), rs);
    const RenderOutput all = render(lighting_variant(scene, LightingMode::sky_plus_active), rs);
    // Pixel of the left lamp, by inverting the pinhole projection.
    const CameraPose &cam = *scene.camera;
    const Vec3 forward = normalize(cam.look_at - cam.position);
    const Vec3 right = normalize(cross(forward, cam.up));
    const Vec3 up = cross(right, forward);
    const Vec3 d = Vec3{-6, 6, -20} - cam.position;
    const double tan_half = std::tan(0.5 * cam.vertical_fov * kPi / 180.0);
    const double aspect = static_cast<double>(cam.width) / cam.height;
    const int px = static_cast<int>((dot(d, right) / dot(d, forward) / (tan_half * aspect) + 1.0) * 0.5 * cam.width);
    const int py = static_cast<int>((1.0 - dot(d, up) / dot(d, forward) / tan_half) * 0.5 * cam.height);
    ASSERT_TRUE(px >= 0 && px < cam.width && py >= 0 && py < cam.height);
    double a = 0.0, b = 0.0;
    for (int dy = -4; dy <= 4; ++dy)
        for (int dx = -4; dx <= 4; ++dx) {
            const int x = std::clamp(px + dx, 0, cam.width - 1);
            const int y = std::clamp(py + dy, 0, cam.height - 1);
            a += sky.radiance.spectrum_at(x, y).average();
            b += all.radiance.spectrum_at(x, y).average();
        }
    EXPECT_GT(b, 2.0 * a);
}

TEST(Run, ProducesTierTaggedFiles) {
    const auto dir = scratch_dir("run_files");
    const Manifest m = run(small_job(dir));
    EXPECT_TRUE(m.ok());
    const std::vector<std::string> expect{
        "minimal_manifest.txt",
        "minimal_sky_plus_active_clear_rgb.ppm",
        "minimal_sky_plus_active_dense_rgb.ppm",
        "minimal_sky_plus_active_depth.fimg",
        "minimal_sky_plus_active_heavy_rgb.ppm",
        "minimal_sky_plus_active_thick_rgb.ppm",
    };
    EXPECT_EQ(files_in(dir), expect);
    EXPECT_EQ(m.entries.size(), 5u);
    for (const auto &e : m.entries) EXPECT_EQ(sha256_hex(read_binary_file((dir / e.file).string())), e.sha256);
    const std::string text = read_text_file(m.path);
    EXPECT_EQ(text.rfind("fogsim-manifest 1\nseed 7\nconfig {", 0), 0u);
    EXPECT_NE(text.find("file minimal_sky_plus_active_thick_rgb.ppm sha256 "), std::string::npos);
}

TEST(Run, RawOnlyWritesMosaicsAndSidecars) {
    const auto dir = scratch_dir("run_raw");
    JobConfig cfg = small_job(dir);
    cfg.outputs = {OutputKind::raw};
    cfg.tiers = {FogTier::from_sigma(0.01)};
    const Manifest m = run(cfg);
    EXPECT_TRUE(m.ok());
    for (const auto &f : files_in(dir)) EXPECT_EQ(f.find("rgb"), std::string::npos) << f;
    const RawImage raw = read_raw((dir / "minimal_sky_plus_active_thick_raw.pgm").string());
    EXPECT_EQ(raw.width, 64);
    EXPECT_EQ(raw.height, 48);
    EXPECT_TRUE(fs::exists(dir / "minimal_sky_plus_active_clear_raw.pgm.meta"));
}

TEST(Run, DeterministicAcrossRunsAndThreads) {
    const auto a = scratch_dir("run_det_a"), b = scratch_dir("run_det_b");
    JobConfig cfg = small_job(a);
    cfg.outputs = {OutputKind::rgb, OutputKind::depth, OutputKind::raw, OutputKind::asm_rgb};
    const Manifest first = run(cfg);
    cfg.output_dir = b.string();
    cfg.threads = 3;
    const Manifest second = run(cfg);
    EXPECT_EQ(hashes(first), hashes(second));
    EXPECT_EQ(first.config, second.config);
}

TEST(Run, TierIndependence) {
    const auto a = scratch_dir("run_tier_a"), b = scratch_dir("run_tier_b");
    JobConfig cfg = small_job(a);
    cfg.outputs = {OutputKind::rgb, OutputKind::asm_rgb};
    const auto all = hashes(run(cfg));
    cfg.output_dir = b.string();
    cfg.tiers = {FogTier::from_sigma(0.02)};
    const auto dense = hashes(run(cfg));
    ASSERT_EQ(dense.size(), 3u);
    for (const auto &[file, sha] : dense) EXPECT_EQ(all.at(file), sha) << file;
}

TEST(Run, AsmVariantUsesClearCapture) {
    const auto dir = scratch_dir("run_asm");
    JobConfig cfg = small_job(dir);
    cfg.outputs = {OutputKind::rgb, OutputKind::depth, OutputKind::asm_rgb};
    cfg.tiers = {FogTier::from_sigma(0.0)};
    run(cfg);
    // beta = 0 leaves the clear image unchanged up to the gamma round trip.
    const Rgb8Image clear = read_ppm((dir / "minimal_sky_plus_active_clear_rgb.ppm").string());
    const Rgb8Image fog = read_ppm((dir / "minimal_sky_plus_active_s0_asm_rgb.ppm").string());
    EXPECT_EQ(clear, fog);
}

TEST(Run, FailuresAreIsolated) {
    const auto dir = scratch_dir("run_fail");
    JobConfig cfg = small_job(dir);
    cfg.lighting = {LightingMode::sky_only, LightingMode::sky_plus_active};
    // A directory squatting on one output name makes that tier's write fail.
    fs::create_directories(dir / "minimal_sky_plus_active_thick_rgb.ppm" / "blocker");
    const Manifest m = run(cfg);
    EXPECT_FALSE(m.ok());
    ASSERT_EQ(m.failures.size(), 2u);
    EXPECT_EQ(m.failures[0].first, "sky_only/*");
    EXPECT_EQ(m.failures[1].first, "sky_plus_active/thick");
    const auto h = hashes(m);
    EXPECT_TRUE(h.count("minimal_sky_plus_active_heavy_rgb.ppm"));
    EXPECT_TRUE(h.count("minimal_sky_plus_active_dense_rgb.ppm"));
    EXPECT_FALSE(h.count("minimal_sky_plus_active_thick_rgb.ppm"));
    EXPECT_NE(read_text_file(m.path).find("failed sky_plus_active/thick "), std::string::npos);
}

TEST(Run, RequiresSeedAndScene) {
    JobConfig cfg = small_job(scratch_dir("run_req"));
    cfg.seed.reset();
    EXPECT_THROW(run(cfg), ConfigError);
    cfg.seed = 1;
    cfg.scene_path = scene_path("does_not_exist.scene");
    EXPECT_THROW(run(cfg), std::exception);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch_dir("cli");
    const std::string scene = scene_path("minimal.scene");
    EXPECT_NE(run_cli(""), 0);
    EXPECT_EQ(run_cli("chamber --sigma-s 0.01"), 0);
    EXPECT_NE(run_cli("chamber"), 0);
    EXPECT_NE(run_cli("render --scene " + scene + " -o " + (dir / "r.fimg").string()), 0) << "missing seed";
    EXPECT_EQ(run_cli("render --scene " + scene + " --seed 1 --spp 2 --sigma-s 0.01 -o " + (dir / "r.fimg").string() +
                      " --depth-out " + (dir / "d.fimg").string()),
              0);
    EXPECT_EQ(run_cli("expose --radiance " + (dir / "r.fimg").string() + " --seed 1 -o " + (dir / "r.pgm").string()), 0);
    EXPECT_EQ(run_cli("isp --raw " + (dir / "r.pgm").string() + " -o " + (dir / "r.ppm").string()), 0);
    EXPECT_EQ(run_cli("asm-fog --image " + (dir / "r.ppm").string() + " --depth " + (dir / "d.fimg").string() +
                      " --beta 0.02 -o " + (dir / "a.ppm").string()),
              0);
    EXPECT_EQ(run_cli("analyze stretch --image " + (dir / "a.ppm").string() + " --window 15 -o " +
                      (dir / "s.ppm").string()),
              0);
    EXPECT_EQ(run_cli("analyze noise --image " + (dir / "a.ppm").string() + " --rect 10,10,16,16"), 0);
    EXPECT_NE(run_cli("analyze noise --image " + (dir / "a.ppm").string() + " --rect 60,40,16,16"), 0);
    EXPECT_EQ(run_cli("analyze trend --image 0=" + (dir / "r.ppm").string() + " --image 0.02=" +
                      (dir / "a.ppm").string() + " --patch 20,14,8,8 -o " + (dir / "t.csv").string()),
              0);
    EXPECT_TRUE(fs::exists(dir / "t.csv"));
    EXPECT_EQ(run_cli("dataset --scene " + scene + " --seed 1 --spp 2 --tiers 0.01 --output-dir " +
                      (dir / "ds").string()),
              0);
    EXPECT_NE(run_cli("dataset --scene " + scene + " --seed 1 --spp 2 --tiers 0.01 --lighting sky_only --output-dir " +
                      (dir / "ds2").string()),
              0);
}
