#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <vector>

#include "fogsim/medium.hpp"
#include "fogsim/rng.hpp"

using namespace fogsim;

namespace {

constexpr double kPiRef = 3.14159265358979323846;

// 2*pi * midpoint integral over mu in [-1, 1].
double phase_integral(double g, int nodes) {
    const double h = 2.0 / nodes;
    double sum = 0.0;
    for (int i = 0; i < nodes; ++i) sum += hg_phase(-1.0 + (i + 0.5) * h, g);
    return 2.0 * kPiRef * sum * h;
}

// Probability mass of HG on [a, b] in mu: closed-form CDF.
double hg_cdf(double mu, double g) {
    if (g == 0.0) return 0.5 * (mu + 1.0);
    const double k = (1.0 - g * g) / (2.0 * g);
    return k * (1.0 / std::sqrt(1.0 + g * g - 2.0 * g * mu) - 1.0 / (1.0 + g));
}

} // namespace

TEST(HgPhase, IsotropicValue) { EXPECT_NEAR(hg_phase(0.5, 0.0), 1.0 / (4.0 * kPiRef), 1e-15); }

TEST(HgPhase, ForwardPeakMatchesHighPrecisionReference) {
    // 40-digit reference for (1/4pi)(1-g^2)/(1-g)^3 at g = 0.87.
    EXPECT_NEAR(hg_phase(1.0, 0.87), 8.805317857451014138692681583, 1e-12);
    EXPECT_NEAR(hg_phase(-0.3, 0.5), 0.03092814352785183121132163, 1e-15);
}

TEST(HgPhase, ForwardScatteringForPositiveG) {
    EXPECT_GT(hg_phase(1.0, 0.87), hg_phase(-1.0, 0.87));
    EXPECT_LT(hg_phase(1.0, -0.5), hg_phase(-1.0, -0.5));
}

TEST(HgPhase, NormalizedOnMillionNodeQuadrature) {
    for (double g : {-0.9, -0.5, 0.0, 0.5, 0.87}) EXPECT_NEAR(phase_integral(g, 1'000'000), 1.0, 1e-6) << "g=" << g;
}

TEST(HgPhase, RejectsOutOfDomain) {
    EXPECT_THROW(hg_phase(0.0, 1.0), DomainError);
    EXPECT_THROW(hg_phase(0.0, -1.2), DomainError);
    EXPECT_THROW(hg_phase(1.5, 0.3), DomainError);
}

TEST(HgSampling, IsotropicMidpoint) { EXPECT_NEAR(sample_hg_cos_theta(0.0, 0.5), 0.0, 1e-15); }

TEST(HgSampling, MeanCosineEqualsG) {
    for (double g : {-0.5, 0.0, 0.5, 0.87}) {
        CounterRng rng{std::uint64_t{7}, std::uint64_t{1}};
        const int n = 1'000'000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double c = sample_hg_cos_theta(g, rng.uniform());
            sum += c;
            sum2 += c * c;
        }
        const double mean = sum / n;
        const double sigma = std::sqrt((sum2 / n - mean * mean) / n);
        EXPECT_NEAR(mean, g, 3.0 * sigma) << "g=" << g;
        if (g == 0.87) EXPECT_NEAR(mean, 0.87, 0.003);
    }
}

TEST(HgSampling, ChiSquareAgainstDensity) {
    const double g = 0.87;
    const int bins = 64, n = 1'000'000;
    std::vector<double> observed(bins, 0.0);
    CounterRng rng{std::uint64_t{11}, std::uint64_t{2}};
    for (int i = 0; i < n; ++i) {
        const double c = sample_hg_cos_theta(g, rng.uniform());
        observed[std::min(bins - 1, static_cast<int>((c + 1.0) * 0.5 * bins))] += 1.0;
    }
    double chi2 = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double lo = -1.0 + 2.0 * b / bins, hi = -1.0 + 2.0 * (b + 1) / bins;
        const double expected = n * (hg_cdf(hi, g) - hg_cdf(lo, g));
        chi2 += (observed[b] - expected) * (observed[b] - expected) / expected;
    }
    const double p = boost::math::gamma_q((bins - 1) / 2.0, chi2 / 2.0);
    EXPECT_GT(p, 0.01) << "chi2=" << chi2;
}

TEST(HgSampling, DirectionAndPdfAgree) {
    const Vec3 incident = normalize(Vec3{1, 2, -3});
    CounterRng rng{std::uint64_t{3}};
    for (int i = 0; i < 1000; ++i) {
        const PhaseSample s = sample_hg(0.6, rng.uniform(), rng.uniform(), incident);
        EXPECT_NEAR(length(s.direction), 1.0, 1e-12);
        EXPECT_NEAR(dot(s.direction, incident), s.cos_theta, 1e-9);
        EXPECT_NEAR(s.pdf, hg_phase(s.cos_theta, 0.6), 1e-12);
    }
}

TEST(Transmittance, Values) {
    EXPECT_NEAR(transmittance(0.02, 150.0), 0.049787068367863944, 1e-15);
    EXPECT_EQ(transmittance(0.7, 0.0), 1.0);
    EXPECT_EQ(transmittance(0.0, 1e6), 1.0);
}

TEST(Transmittance, Multiplicative) {
    for (double s : {1e-4, 0.01, 0.3, 2.0})
        for (double a : {0.0, 1.0, 17.5})
            for (double b : {0.5, 3.0, 42.0})
                EXPECT_NEAR(transmittance(s, a) * transmittance(s, b), transmittance(s, a + b), 1e-12);
}

TEST(SampleDistance, Vacuum) {
    const auto e = sample_distance(0.0, 0.999, 10.0);
    ASSERT_TRUE(std::holds_alternative<PassThrough>(e));
    EXPECT_EQ(std::get<PassThrough>(e).prob, 1.0);
}

TEST(SampleDistance, InverseCdf) {
    const auto e = sample_distance(0.01, 0.5, 1e9);
    ASSERT_TRUE(std::holds_alternative<ScatterEvent>(e));
    EXPECT_NEAR(std::get<ScatterEvent>(e).t, 69.31471805599453, 1e-9);
    EXPECT_NEAR(std::get<ScatterEvent>(e).pdf, 0.005, 1e-15);
}

TEST(SampleDistance, ScatterFractionMatchesTransmittance) {
    const int n = 1'000'000;
    CounterRng rng{std::uint64_t{5}};
    int scatters = 0;
    for (int i = 0; i < n; ++i)
        if (std::holds_alternative<ScatterEvent>(sample_distance(0.02, rng.uniform(), 150.0))) ++scatters;
    const double p = 1.0 - transmittance(0.02, 150.0);
    const double frac = static_cast<double>(scatters) / n;
    EXPECT_NEAR(frac, 0.9502, 0.001);
    EXPECT_NEAR(frac, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Mor, TierValues) {
    EXPECT_NEAR(mor_from_sigma(0.005), 599.2, 1e-9);
    EXPECT_NEAR(mor_from_sigma(0.01), 299.6, 1e-9);
    EXPECT_NEAR(mor_from_sigma(0.02), 149.8, 1e-9);
}

TEST(Mor, RoundTrip) {
    EXPECT_NEAR(mor_from_sigma(sigma_from_mor(300.0)), 300.0, 1e-9);
    for (double x : {1.0, 37.5, 300.0, 12345.0}) EXPECT_NEAR(mor_from_sigma(sigma_from_mor(x)) / x, 1.0, 1e-12);
    EXPECT_THROW(mor_from_sigma(0.0), DomainError);
    EXPECT_THROW(sigma_from_mor(-1.0), DomainError);
}

TEST(SigmaFromPower, Values) {
    EXPECT_EQ(sigma_from_power(1.0, 1.0, 1.5), 0.0);
    EXPECT_NEAR(sigma_from_power(1.0, std::exp(-0.03), 1.5), 0.02, 1e-12);
    EXPECT_NEAR(sigma_from_power(2.0, 1.0, 1.0), 0.6931471805599453, 1e-12);
    EXPECT_THROW(sigma_from_power(1.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(sigma_from_power(1.0, 2.0, 1.0), DomainError);
    EXPECT_THROW(sigma_from_power(1.0, 0.5, 0.0), DomainError);
}

TEST(SigmaFromPower, ClosedLoop) {
    for (double s = 1e-4; s <= 1.0; s *= 1.37)
        for (double u : {0.5, 1.5, 30.0})
            EXPECT_NEAR(sigma_from_power(3.0, 3.0 * transmittance(s, u), u), s, 1e-9);
}

TEST(FogTier, StandardTiers) {
    const auto tiers = FogTier::standard();
    ASSERT_EQ(tiers.size(), 3u);
    EXPECT_EQ(tiers[0].label(), "heavy");
    EXPECT_EQ(tiers[1].label(), "thick");
    EXPECT_EQ(tiers[2].label(), "dense");
    EXPECT_NEAR(tiers[2].visibility_m, 149.8, 1e-9);
    EXPECT_EQ(FogTier::from_sigma(0.2).label(), "s0.2");
    EXPECT_THROW(FogTier::from_sigma(-0.1), ValidationError);
}

TEST(MediumValidate, RejectsBadCoefficients) {
    Medium m;
    m.sigma_s = -0.1;
    EXPECT_THROW(m.validate(), ValidationError);
    m.sigma_s = 0.1;
    m.g = 1.0;
    EXPECT_THROW(m.validate(), ValidationError);
}
