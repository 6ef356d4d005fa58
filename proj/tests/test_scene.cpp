#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fogsim/rng.hpp"
#include "fogsim/scene_io.hpp"
#include "test_support.hpp"

using namespace fogsim;
using fogsim::testing::scene_path;

namespace {

std::string field_of(const std::string &text) {
    try {
        parse_scene_text(text);
    } catch (const ValidationError &e) {
        return e.field();
    }
    return "<no error>";
}

} // namespace

TEST(SceneParse, MinimalScene) {
    const Scene s = parse_scene(scene_path("minimal.scene"));
    EXPECT_EQ(s.name, "minimal");
    EXPECT_EQ(s.primitives.size(), 1u);
    EXPECT_EQ(s.lights.size(), 1u);
    ASSERT_TRUE(s.camera.has_value());
    EXPECT_EQ(s.camera->width, 64);
    EXPECT_EQ(s.camera->height, 48);
    EXPECT_EQ(s.lights[0].role, LightRole::active);
}

TEST(SceneParse, ChamberFixture) {
    const Scene s = parse_scene(scene_path("chamber.scene"));
    EXPECT_EQ(s.primitives.size(), 25u);
    const auto areas = std::count_if(s.lights.begin(), s.lights.end(),
                                     [](const Light &l) { return std::holds_alternative<AreaLight>(l.kind); });
    EXPECT_EQ(areas, 4);
    ASSERT_TRUE(s.medium.bounds.has_value());
    EXPECT_DOUBLE_EQ(s.medium.g, 0.87);
}

TEST(SceneParse, NegativeRadiusNamesField) {
    const std::string field = field_of(R"({
      "materials": {"m": {"type": "lambertian", "albedo": "flat 0.5"}},
      "primitives": [{"type": "sphere", "center": [0, 0, 0], "radius": -1, "material": "m"}]})");
    EXPECT_NE(field.find("radius"), std::string::npos) << field;
}

TEST(SceneParse, ErrorsNameTheField) {
    EXPECT_EQ(field_of(R"({"materials": {"m": {"type": "lambertian", "albedo": "flat 1.5"}}, "primitives": []})"),
              "materials.m.albedo");
    EXPECT_EQ(field_of(R"({"materials": {}, "primitives": [], "bogus": 1})"), "bogus");
    EXPECT_EQ(field_of(R"({"materials": {"m": {"type": "lambertian", "albedo": "flat 0.5"}},
                           "primitives": [{"type": "sphere", "center": [0, 0, 0], "radius": 1, "material": "nope"}]})"),
              "primitives[0].material");
    EXPECT_EQ(field_of(R"({"materials": {"m": {"type": "lambertian", "albedo": [0.1, 0.2]}}, "primitives": []})"),
              "materials.m.albedo");
    EXPECT_EQ(field_of(R"({"materials": {}, "primitives": [],
                           "lights": [{"type": "point", "position": [0, 0, 0], "intensity": "flat 1", "role": "moon"}]})"),
              "lights[0].role");
    EXPECT_EQ(field_of(R"({"materials": {}, "primitives": [], "medium": {"g": 1.0}})"), "medium.g");
}

TEST(SceneParse, SyntaxErrorReportsLine) {
    try {
        parse_scene_text("{\n  \"materials\": {},\n  \"primitives\": [,]\n}", "bad.scene");
        FAIL() << "expected a parse error";
    } catch (const ParseError &e) {
        EXPECT_NE(std::string(e.what()).find("bad.scene:3"), std::string::npos) << e.what();
    }
}

TEST(SceneParse, MeshIndicesChecked) {
    EXPECT_EQ(field_of(R"({"materials": {"m": {"type": "lambertian", "albedo": "flat 0.5"}},
                           "primitives": [{"type": "mesh", "vertices": [[0,0,0],[1,0,0],[0,1,0]],
                                           "indices": [[0, 1, 3]], "material": "m"}]})"),
              "primitives[0].indices");
}

TEST(Intersect, SphereAnalytic) {
    const auto t = detail::intersect_sphere(Sphere{{0, 0, 5}, 1.0}, Ray{{0, 0, 0}, {0, 0, 1}}, kInfinity);
    ASSERT_TRUE(t.has_value());
    EXPECT_NEAR(*t, 4.0, 1e-12);
}

TEST(Intersect, MissAndGrazing) {
    const Scene s = parse_scene(scene_path("minimal.scene"));
    EXPECT_FALSE(intersect(s, Ray{{0, 0, 0}, {0, 0, 1}}).has_value());
    const Quad q{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    EXPECT_FALSE(detail::intersect_quad(q, Ray{{0.5, 0.5, 0}, normalize(Vec3{1, 1, 0})}, kInfinity).has_value());
}

TEST(Intersect, TriangleMesh) {
    const Scene s = parse_scene_text(R"({"materials": {"m": {"type": "lambertian", "albedo": "flat 0.5"}},
      "primitives": [{"type": "mesh", "vertices": [[-1,-1,-3],[1,-1,-3],[0,1,-3]], "indices": [[0,1,2]], "material": "m"}]})");
    const auto hit = intersect(s, Ray{{0, 0, 0}, {0, 0, -1}});
    ASSERT_TRUE(hit.has_value());
    EXPECT_NEAR(hit->t, 3.0, 1e-12);
    EXPECT_NEAR(hit->normal.z, 1.0, 1e-12);
}

TEST(Intersect, IndependentOfPrimitiveOrder) {
    Scene s = parse_scene(scene_path("chamber.scene"));
    Scene shuffled = s;
    std::mt19937 gen(5);
    std::shuffle(shuffled.primitives.begin(), shuffled.primitives.end(), gen);
    CounterRng rng{std::uint64_t{9}};
    for (int i = 0; i < 2000; ++i) {
        const Vec3 dir = normalize(Vec3{rng.uniform() - 0.5, rng.uniform() - 0.5, -1.0});
        const auto a = intersect(s, Ray{{0, 0, 0}, dir});
        const auto b = intersect(shuffled, Ray{{0, 0, 0}, dir});
        ASSERT_EQ(a.has_value(), b.has_value());
        if (a) {
            EXPECT_EQ(a->t, b->t);
            EXPECT_EQ(a->material_id, b->material_id);
        }
    }
}

TEST(SampleLight, PointInverseSquare) {
    Light l{"p", LightRole::active, PointLight{{0, 0, 2}, Spectrum::flat(4.0)}};
    const LightSample near = sample_light(l, {0, 0, 0}, 0, 0);
    EXPECT_TRUE(near.delta);
    for (int b = 0; b < kNumBands; ++b) EXPECT_NEAR(near.radiance_over_pdf[b], 1.0, 1e-15);
    EXPECT_NEAR(near.distance, 2.0, 1e-15);
    const LightSample far = sample_light(l, {0, 0, -2}, 0, 0);
    EXPECT_NEAR(far.radiance_over_pdf[0], 0.25, 1e-15);
}

TEST(SampleLight, EnvironmentIrradianceFurnace) {
    const double L = 0.7;
    Light l{"sky", LightRole::sky, EnvironmentLight{Spectrum::flat(L), std::nullopt}};
    CounterRng rng{std::uint64_t{4}};
    const int n = 1'000'000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const LightSample s = sample_light(l, {0, 0, 0}, rng.uniform(), rng.uniform());
        sum += s.radiance_over_pdf[10] * std::max(0.0, s.direction.y);
    }
    EXPECT_NEAR(sum / n, kPi * L, 0.01 * kPi * L);
}

TEST(SampleLight, AreaLightIrradiance) {
    // Small square lamp 10 m overhead, facing down: E ~ L A / d^2.
    Light l{"a", LightRole::active, AreaLight{Quad{{-0.05, 10, -0.05}, {0.1, 0, 0}, {0, 0, 0.1}}, Spectrum::flat(2.0)}};
    ASSERT_LT(std::get<AreaLight>(l.kind).quad.normal().y, 0.0);
    CounterRng rng{std::uint64_t{6}};
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const LightSample s = sample_light(l, {0, 0, 0}, rng.uniform(), rng.uniform());
        sum += s.radiance_over_pdf[0] * s.direction.y;
    }
    EXPECT_NEAR(sum / 10000, 2.0 * 0.01 / 100.0, 1e-7);
    // Behind the lamp nothing arrives.
    EXPECT_TRUE(sample_light(l, {0, 20, 0}, 0.5, 0.5).radiance_over_pdf.is_black());
}

TEST(Environment, LatLongMapOrientation) {
    EnvironmentLight env{Spectrum::flat(1.0), LatLongMap{1, 2, {3.0, 0.5}}};
    EXPECT_EQ(environment_radiance(env, {0, 1, 0})[0], 3.0);
    EXPECT_EQ(environment_radiance(env, {0, -1, 0})[0], 0.5);
}

TEST(SpectrumOps, ElementwiseAlgebra) {
    CounterRng rng{std::uint64_t{12}};
    auto random_spectrum = [&] {
        Spectrum s;
        for (int b = 0; b < kNumBands; ++b) s[b] = rng.uniform() * 10.0;
        return s;
    };
    for (int i = 0; i < 100; ++i) {
        const Spectrum a = random_spectrum(), b = random_spectrum(), c = random_spectrum();
        for (int k = 0; k < kNumBands; ++k) {
            EXPECT_EQ((a + b)[k], (b + a)[k]);
            EXPECT_EQ((a * b)[k], (b * a)[k]);
            EXPECT_NEAR(((a + b) + c)[k], (a + (b + c))[k], 1e-12);
            EXPECT_NEAR(((a * b) * c)[k], (a * (b * c))[k], 1e-9);
        }
    }
    EXPECT_THROW(Spectrum(std::vector<double>(30, 1.0)), DomainError);
    EXPECT_EQ(WavelengthGrid::wavelength_nm(0), 400.0);
    EXPECT_EQ(WavelengthGrid::wavelength_nm(kNumBands - 1), 700.0);
}
