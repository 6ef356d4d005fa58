#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fogsim/camera.hpp"
#include "fogsim/camera_io.hpp"
#include "test_support.hpp"

using namespace fogsim;
using namespace fogsim::testing;

TEST(Optics, OnAxisIrradiance) {
    RadianceImage rad(1, 1);
    rad.vertical_fov = 20.0;
    rad.set(0, 0, Spectrum::flat(1.0));
    const Image e = optics_irradiance(rad, OpticsSpec{});
    EXPECT_NEAR(e.at(0, 0, 3), kPi / 17.0, 1e-12);
    EXPECT_NEAR(kPi / 17.0, 0.18480, 1e-5);
    rad.set(0, 0, Spectrum{});
    EXPECT_EQ(optics_irradiance(rad, OpticsSpec{}).at(0, 0, 3), 0.0);
}

TEST(Optics, CosineFourthFalloff) {
    const double phi = 30.0 * kPi / 180.0;
    EXPECT_NEAR(irradiance_factor(2.0, 0.0, phi) / irradiance_factor(2.0, 0.0, 0.0), 0.5625, 1e-12);
    // Magnification shortens the effective f-number.
    EXPECT_NEAR(irradiance_factor(2.0, 0.5, 0.0), kPi / 5.0, 1e-12);
}

TEST(Optics, FieldAngleAtImageEdge) {
    // Top-centre pixel edge of a 2-row image with a 60 degree field sits 30 degrees off axis.
    EXPECT_NEAR(field_angle(0, 0, 1, 1, 60.0), 0.0, 1e-12);
    EXPECT_NEAR(std::tan(field_angle(0, 0, 1, 2, 60.0)), 0.5 * std::tan(kPi / 6.0), 1e-12);
}

TEST(Optics, PsfBlurConservesFlux) {
    RadianceImage rad(15, 15);
    rad.vertical_fov = 1e-6;
    rad.set(7, 7, Spectrum::flat(1.0));
    OpticsSpec o;
    o.psf_sigma_px = 1.2;
    const Image e = optics_irradiance(rad, o);
    double sum = 0.0;
    for (int y = 0; y < 15; ++y)
        for (int x = 0; x < 15; ++x) sum += e.at(x, y, 0);
    EXPECT_NEAR(sum, kPi / 17.0, 1e-9);
    EXPECT_LT(e.at(7, 7, 0), kPi / 17.0);
}

TEST(Sensor, DarkFrameIsBlackLevel) {
    SensorSpec s = generic_smartphone_sensor(16, 16);
    s.dark_current = 0.0;
    s.read_noise_std = 0.0;
    s.dsnu_std = 0.0;
    const RawImage raw = expose(Image(16, 16, kNumBands), s, 3);
    for (auto dn : raw.dn) EXPECT_EQ(dn, s.black_level);
}

TEST(Sensor, PoissonMeanEqualsVariance) {
    const SensorSpec s = lab_sensor(256);
    const auto [mean, var] = mean_var(expose(flat_field(s, 10000.0), s, 11));
    EXPECT_NEAR(mean, 10000.0, 0.02 * 10000.0);
    EXPECT_NEAR(var, mean, 0.02 * mean);
}

TEST(Sensor, SaturatesAtFullWell) {
    SensorSpec s = generic_smartphone_sensor(8, 8);
    const RawImage raw = expose(flat_field(s, 2.0 * s.full_well), s, 1);
    const auto expected_max = electrons_to_dn(s.full_well, s);
    for (auto dn : raw.dn) {
        EXPECT_LE(dn, s.white_level());
        EXPECT_LE(dn, expected_max);
    }
    EXPECT_EQ(*std::max_element(raw.dn.begin(), raw.dn.end()), expected_max);
}

TEST(Sensor, AnalyticSnr) {
    SensorSpec s = lab_sensor(4);
    EXPECT_NEAR(snr_curve(s, {100.0}).front().second, 20.0, 1e-12);
    s.read_noise_std = 3.0;
    const auto low = snr_curve(s, {1e-6, 1e-3, 1.0});
    EXPECT_LT(low[0].second, low[1].second);
    EXPECT_LT(std::pow(10.0, low[0].second / 20.0), 1e-6);
    EXPECT_THROW(snr_curve(s, {0.0}), DomainError);
}

TEST(Sensor, EmpiricalSnrMatchesCurve) {
    SensorSpec s = lab_sensor(256);
    s.read_noise_std = 2.0;
    s.dark_current = 5.0;
    s.prnu_std = 0.005;
    s.dsnu_std = 1.0;
    for (double mu : {100.0, 1000.0, 10000.0}) {
        const auto [mean, var] = mean_var(expose(flat_field(s, mu), s, 21));
        const double measured = 20.0 * std::log10(mu / std::sqrt(var));
        const double analytic = snr_curve(s, {mu}).front().second;
        EXPECT_NEAR(std::pow(10.0, measured / 20.0), std::pow(10.0, analytic / 20.0), 0.05 * std::pow(10.0, analytic / 20.0))
            << "mu=" << mu;
    }
}

TEST(Sensor, FixedPatternRevealedByFrameAverage) {
    SensorSpec s = lab_sensor(32);
    s.prnu_std = 0.02;
    const double mu = 5000.0;
    const Image field = flat_field(s, mu);
    std::vector<double> avg(32 * 32, 0.0);
    for (int f = 0; f < 100; ++f) {
        const RawImage raw = expose(field, s, 8, static_cast<std::uint64_t>(f));
        for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += raw.dn[i] / 100.0;
    }
    const FixedPattern fp = fixed_pattern(s, 8);
    std::vector<double> gain(fp.gain.data().begin(), fp.gain.data().end());
    EXPECT_GT(correlation(avg, gain), 0.99);
    // Different frames do differ.
    EXPECT_NE(expose(field, s, 8, 1).dn, expose(field, s, 8, 2).dn);
}

TEST(Sensor, LinearWithoutNoise) {
    SensorSpec s = lab_sensor(8);
    s.shot_noise = false;
    s.black_level = 100;
    s.conversion_gain = 0.25;
    for (double mu : {400.0, 1600.0, 6400.0, 20000.0}) {
        const RawImage a = expose(flat_field(s, mu), s, 1), b = expose(flat_field(s, 2.0 * mu), s, 1);
        for (std::size_t i = 0; i < a.dn.size(); ++i)
            EXPECT_NEAR(b.dn[i] - s.black_level, 2.0 * (a.dn[i] - s.black_level), 1.0) << mu;
    }
    // Past full well the response flattens.
    const RawImage sat = expose(flat_field(s, 2.0 * s.full_well), s, 1);
    EXPECT_EQ(sat.dn[0], electrons_to_dn(s.full_well, s));
}

TEST(Sensor, DeterministicAcrossThreads) {
    SensorSpec s = generic_smartphone_sensor(64, 48);
    const Image field = flat_field(s, 800.0);
    EXPECT_EQ(expose(field, s, 5, 0, 1).dn, expose(field, s, 5, 0, 4).dn);
    EXPECT_THROW(expose(Image(10, 10, kNumBands), s, 5), DomainError);
}

TEST(Sensor, CfaPatterns) {
    const CfaPattern p = CfaPattern::parse("GRBG");
    EXPECT_EQ(p.at(0, 0), CfaChannel::G);
    EXPECT_EQ(p.at(1, 0), CfaChannel::R);
    EXPECT_EQ(p.at(0, 1), CfaChannel::B);
    EXPECT_EQ(p.at(3, 3), CfaChannel::G);
    EXPECT_EQ(p.name(), "GRBG");
    EXPECT_THROW(CfaPattern::parse("RGGX"), ValidationError);
    EXPECT_THROW(CfaPattern::parse("RRGG"), ValidationError);
}

TEST(Sensor, PhotonConversion) {
    // One band at 550 nm: photons = E dl A t lambda / (h c).
    SensorSpec s = generic_smartphone_sensor(1, 1);
    for (auto &q : s.qe) q = Spectrum{};
    const int band = 15; // 550 nm
    s.qe[1][band] = 1.0;
    std::vector<double> e(kNumBands, 0.0);
    e[band] = 1e-3;
    const double expected = 1e-3 * 10.0 * s.pixel_area * s.exposure_time * 550e-9 / (6.62607015e-34 * 2.99792458e8);
    EXPECT_NEAR(mean_photoelectrons(e, s, CfaChannel::G), expected, 1e-9 * expected);
}

TEST(RawIo, RoundTrip) {
    const auto dir = fogsim::testing::scratch_dir("rawio");
    SensorSpec s = generic_smartphone_sensor(12, 10);
    const RawImage raw = expose(flat_field(s, 700.0), s, 99, 3);
    const std::string path = (dir / "frame.pgm").string();
    write_raw(path, raw);
    const RawImage back = read_raw(path);
    EXPECT_EQ(back.dn, raw.dn);
    EXPECT_EQ(back.width, 12);
    EXPECT_EQ(back.seed, 99u);
    EXPECT_EQ(back.frame, 3u);
    EXPECT_EQ(back.cfa, raw.cfa);
    EXPECT_EQ(back.spec.black_level, s.black_level);
    EXPECT_EQ(back.spec.qe[0].values(), s.qe[0].values());
    // Samples are 16-bit little-endian after a P5 header with maxval 1023.
    const std::string bytes = read_binary_file(path);
    EXPECT_EQ(bytes.rfind("P5\n12 10\n1023\n", 0), 0u);
    const std::size_t off = bytes.size() - 2 * 120;
    EXPECT_EQ(static_cast<unsigned char>(bytes[off]) | (static_cast<unsigned char>(bytes[off + 1]) << 8), raw.dn[0]);
}

TEST(RawIo, RejectsBrokenSidecar) {
    SensorSpec s = generic_smartphone_sensor(4, 4);
    const RawImage raw = expose(flat_field(s, 100.0), s, 1);
    std::string meta = encode_raw_meta(raw);
    EXPECT_NO_THROW(decode_raw(encode_raw_pnm(raw), meta, "x"));
    EXPECT_THROW(decode_raw(encode_raw_pnm(raw), "", "x"), ParseError);
    EXPECT_THROW(decode_raw(encode_raw_pnm(raw).substr(0, 20), meta, "x"), ParseError);
}
