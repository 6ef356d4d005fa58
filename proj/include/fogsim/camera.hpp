#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "image.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "spectrum.hpp"

namespace fogsim {

// -- Optics ----------------------------------------------------------------------

struct OpticsSpec {
    double f_number = 2.0;
    /// Negative ratio of image to object distance; 0 for distant scenes.
    double magnification = 0.0;
    /// Vertical field of view, degrees. 0 takes the value recorded in the radiance image.
    double vertical_fov = 0.0;
    /// Optional Gaussian blur, pixels. 0 disables it.
    double psf_sigma_px = 0.0;

    void validate() const {
        if (!(f_number > 0.0)) throw ValidationError("optics.f_number", "must be > 0");
        if (magnification > 0.0) throw ValidationError("optics.magnification", "must be <= 0 for a real image");
        if (vertical_fov < 0.0 || vertical_fov >= 180.0) throw ValidationError("optics.vertical_fov", "must be in [0, 180)");
        if (psf_sigma_px < 0.0) throw ValidationError("optics.psf_sigma_px", "must be >= 0");
    }
};

/// Off-axis angle of the chief ray through the center of pixel (x, y), radians.
inline double field_angle(int x, int y, int width, int height, double vertical_fov_deg) {
    const double tan_half = std::tan(0.5 * vertical_fov_deg * kPi / 180.0);
    const double aspect = static_cast<double>(width) / height;
    const double sx = (2.0 * (x + 0.5) / width - 1.0) * tan_half * aspect;
    const double sy = (1.0 - 2.0 * (y + 0.5) / height) * tan_half;
    return std::atan(std::sqrt(sx * sx + sy * sy));
}

/// Image-plane irradiance per unit scene radiance: pi / (1 + 4 (N (1 - m))^2) cos^4(phi).
inline double irradiance_factor(double f_number, double magnification, double phi) {
    const double n_eff = f_number * (1.0 - magnification);
    const double c = std::cos(phi);
    return kPi / (1.0 + 4.0 * n_eff * n_eff) * c * c * c * c;
}

namespace detail {

inline Image gaussian_blur(const Image &in, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i) ksum += k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double &v : k) v /= ksum;
    const int w = in.width(), h = in.height(), ch = in.channels();
    Image tmp(w, h, ch), out(w, h, ch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                double s = 0.0;
                for (int i = -radius; i <= radius; ++i) s += k[i + radius] * in.at(std::clamp(x + i, 0, w - 1), y, c);
                tmp.at(x, y, c) = s;
            }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                double s = 0.0;
                for (int i = -radius; i <= radius; ++i) s += k[i + radius] * tmp.at(x, std::clamp(y + i, 0, h - 1), c);
                out.at(x, y, c) = s;
            }
    return out;
}

} // namespace detail

/// Spectral radiance to spectral image-plane irradiance (W m^-2 nm^-1).
inline Image optics_irradiance(const RadianceImage &radiance, const OpticsSpec &spec) {
    spec.validate();
    const double fov = spec.vertical_fov > 0.0 ? spec.vertical_fov : radiance.vertical_fov;
    if (!(fov > 0.0)) throw ConfigError("optics_irradiance: no field of view in spec or radiance image");
    const int w = radiance.width(), h = radiance.height();
    Image out(w, h, kNumBands);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double f = irradiance_factor(spec.f_number, spec.magnification, field_angle(x, y, w, h, fov));
            auto src = radiance.pixels.pixel(x, y);
            auto dst = out.pixel(x, y);
            for (int b = 0; b < kNumBands; ++b) dst[b] = src[b] * f;
        }
    if (spec.psf_sigma_px > 0.0) return detail::gaussian_blur(out, spec.psf_sigma_px);
    return out;
}

// -- Sensor ------------------------------------------------------------------------

enum class CfaChannel : std::uint8_t { R = 0, G = 1, B = 2 };

/// 2x2 colour filter tile; sites are (0,0), (1,0), (0,1), (1,1).
struct CfaPattern {
    std::array<CfaChannel, 4> sites{CfaChannel::R, CfaChannel::G, CfaChannel::G, CfaChannel::B};

    CfaChannel at(int x, int y) const { return sites[(y & 1) * 2 + (x & 1)]; }

    static CfaPattern parse(const std::string &name) {
        if (name.size() != 4) throw ValidationError("cfa", "expected four letters such as RGGB");
        CfaPattern p;
        bool seen[3] = {false, false, false};
        for (int i = 0; i < 4; ++i) {
            switch (name[i]) {
            case 'R': p.sites[i] = CfaChannel::R; break;
            case 'G': p.sites[i] = CfaChannel::G; break;
            case 'B': p.sites[i] = CfaChannel::B; break;
            default: throw ValidationError("cfa", "unknown CFA letter in '" + name + "'");
            }
            seen[static_cast<int>(p.sites[i])] = true;
        }
        if (!seen[0] || !seen[1] || !seen[2]) throw ValidationError("cfa", "pattern must contain R, G and B");
        return p;
    }

    std::string name() const {
        std::string s;
        for (CfaChannel c : sites) s += "RGB"[static_cast<int>(c)];
        return s;
    }

    friend bool operator==(const CfaPattern &, const CfaPattern &) = default;
};

struct SensorSpec {
    int width = 256;
    int height = 256;
    CfaPattern cfa;
    std::array<Spectrum, 3> qe; ///< electrons per photon, indexed by CfaChannel
    double pixel_area = 2.56e-12;  ///< m^2
    double exposure_time = 0.01;   ///< s
    double full_well = 6000.0;     ///< e-
    double conversion_gain = 959.0 / 6000.0; ///< DN per e- before analog gain
    double analog_gain = 1.0;
    double read_noise_std = 2.0;   ///< e- rms
    double dark_current = 5.0;     ///< e-/s
    double prnu_std = 0.005;       ///< fractional
    double dsnu_std = 1.0;         ///< e-
    int bit_depth = 10;
    int black_level = 64;          ///< DN
    bool shot_noise = true;        ///< off: collected charge equals its mean (for linearity checks)

    int white_level() const { return (1 << bit_depth) - 1; }
    double total_gain() const { return conversion_gain * analog_gain; }

    void validate() const {
        if (width < 1 || height < 1) throw ValidationError("sensor.resolution", "must be at least 1x1");
        for (int c = 0; c < 3; ++c)
            if (!qe[c].is_valid() || qe[c].max_value() > 1.0) throw ValidationError("sensor.qe", "values must be in [0, 1]");
        if (!(pixel_area > 0.0)) throw ValidationError("sensor.pixel_area", "must be > 0");
        if (!(exposure_time > 0.0)) throw ValidationError("sensor.exposure_time", "must be > 0");
        if (!(full_well > 0.0)) throw ValidationError("sensor.full_well", "must be > 0");
        if (!(conversion_gain > 0.0)) throw ValidationError("sensor.conversion_gain", "must be > 0");
        if (!(analog_gain > 0.0)) throw ValidationError("sensor.analog_gain", "must be > 0");
        if (read_noise_std < 0.0) throw ValidationError("sensor.read_noise_std", "must be >= 0");
        if (dark_current < 0.0) throw ValidationError("sensor.dark_current", "must be >= 0");
        if (prnu_std < 0.0) throw ValidationError("sensor.prnu_std", "must be >= 0");
        if (dsnu_std < 0.0) throw ValidationError("sensor.dsnu_std", "must be >= 0");
        if (bit_depth < 8 || bit_depth > 16) throw ValidationError("sensor.bit_depth", "must be in [8, 16]");
        if (black_level < 0 || black_level >= (1 << bit_depth))
            throw ValidationError("sensor.black_level", "must be in [0, 2^bit_depth)");
    }

    /// White-balance gains that map a flat (equal-energy) spectrum to equal channel responses.
    std::array<double, 3> neutral_wb_gains() const {
        std::array<double, 3> response{};
        for (int c = 0; c < 3; ++c)
            for (int b = 0; b < kNumBands; ++b) response[c] += qe[c][b] * WavelengthGrid::wavelength_nm(b);
        return {response[1] / response[0], 1.0, response[1] / response[2]};
    }
};

/// Gaussian QE curve sampled on the band grid.
inline Spectrum gaussian_qe(double peak, double center_nm, double sigma_nm) {
    Spectrum s;
    for (int b = 0; b < kNumBands; ++b) {
        const double d = (WavelengthGrid::wavelength_nm(b) - center_nm) / sigma_nm;
        s[b] = peak * std::exp(-0.5 * d * d);
    }
    return s;
}

/// Generic smartphone-class sensor: RGGB, 1.6 um pixels, QE peak 0.6,
/// 2 e- read noise, 6000 e- full well, 10-bit, black level 64. Not a model
/// of any particular device; the IR cut filter is folded into the QE curves.
inline SensorSpec generic_smartphone_sensor(int width = 256, int height = 256) {
    SensorSpec s;
    s.width = width;
    s.height = height;
    s.qe[0] = gaussian_qe(0.6, 600.0, 30.0);
    s.qe[1] = gaussian_qe(0.6, 540.0, 35.0);
    s.qe[2] = gaussian_qe(0.6, 460.0, 30.0);
    return s;
}

inline SensorSpec sensor_preset(const std::string &name, int width, int height) {
    if (name == "generic_smartphone") return generic_smartphone_sensor(width, height);
    throw ConfigError("unknown sensor preset '" + name + "'");
}

inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kLightSpeed = 2.99792458e8;   // m/s

/// Mean photo-electrons collected from a spectral irradiance sample during
/// one exposure, for a site under colour filter `channel`.
inline double mean_photoelectrons(std::span<const double> irradiance, const SensorSpec &spec, CfaChannel channel) {
    const Spectrum &qe = spec.qe[static_cast<int>(channel)];
    double electrons = 0.0;
    for (int b = 0; b < kNumBands; ++b) {
        const double lambda_m = WavelengthGrid::wavelength_nm(b) * 1e-9;
        const double energy = irradiance[b] * WavelengthGrid::kSpacingNm * spec.pixel_area * spec.exposure_time;
        electrons += energy * lambda_m / (kPlanck * kLightSpeed) * qe[b];
    }
    return electrons;
}

struct RawImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> dn; ///< row-major
    CfaPattern cfa;
    SensorSpec spec;               ///< snapshot of the exposing sensor
    std::uint64_t seed = 0;
    std::uint64_t frame = 0;

    std::uint16_t at(int x, int y) const { return dn[static_cast<std::size_t>(y) * width + x]; }
    std::uint16_t &at(int x, int y) { return dn[static_cast<std::size_t>(y) * width + x]; }
};

/// Per-pixel PRNU gain and DSNU offset; a function of (seed, x, y) only.
struct FixedPattern {
    Image gain;   ///< ~ Normal(1, prnu_std)
    Image offset; ///< e-, ~ Normal(0, dsnu_std)
};

namespace detail {

inline constexpr std::uint64_t kFixedPatternTag = 0xF1CEDull;
inline constexpr std::uint64_t kTemporalTag = 0x7E3B0ull;

inline double normal_draw(CounterRng &rng, double mean, double stddev) {
    if (stddev == 0.0) return mean;
    std::normal_distribution<double> dist(mean, stddev);
    return dist(rng);
}

inline std::pair<double, double> fixed_pattern_at(const SensorSpec &spec, std::uint64_t seed, int x, int y) {
    CounterRng rng{seed, kFixedPatternTag, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y)};
    const double gain = normal_draw(rng, 1.0, spec.prnu_std);
    const double offset = normal_draw(rng, 0.0, spec.dsnu_std);
    return {gain, offset};
}

} // namespace detail

inline FixedPattern fixed_pattern(const SensorSpec &spec, std::uint64_t seed) {
    FixedPattern fp{Image(spec.width, spec.height, 1), Image(spec.width, spec.height, 1)};
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            const auto [g, o] = detail::fixed_pattern_at(spec, seed, x, y);
            fp.gain.at(x, y) = g;
            fp.offset.at(x, y) = o;
        }
    return fp;
}

/// Converts collected electrons to digital numbers: noise chain
/// shot -> PRNU -> DSNU -> read -> clip -> gain -> quantize.
/// `frame` selects the temporal noise sub-stream; the fixed pattern depends on `seed` only.
inline double sensor_electrons(double mean_signal, const SensorSpec &spec, std::uint64_t seed, std::uint64_t frame,
                               int x, int y) {
    CounterRng rng{seed, detail::kTemporalTag, frame, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y)};
    const double mean = mean_signal + spec.dark_current * spec.exposure_time;
    double e = 0.0;
    if (!spec.shot_noise) {
        e = mean;
    } else if (mean > 0.0) {
        std::poisson_distribution<long long> shot(mean);
        e = static_cast<double>(shot(rng));
    }
    const auto [gain, offset] = detail::fixed_pattern_at(spec, seed, x, y);
    e *= gain;
    e += offset;
    e += detail::normal_draw(rng, 0.0, spec.read_noise_std);
    return std::clamp(e, 0.0, spec.full_well);
}

inline std::uint16_t electrons_to_dn(double electrons, const SensorSpec &spec) {
    const double dn = std::round(spec.black_level + electrons * spec.total_gain());
    return static_cast<std::uint16_t>(std::clamp(dn, 0.0, static_cast<double>(spec.white_level())));
}

/// Image-plane irradiance to a mosaicked raw frame.
inline RawImage expose(const Image &irradiance, const SensorSpec &spec, std::uint64_t seed, std::uint64_t frame = 0,
                       int threads = 0) {
    spec.validate();
    if (irradiance.width() != spec.width || irradiance.height() != spec.height)
        throw DomainError("expose: irradiance is " + std::to_string(irradiance.width()) + "x" +
                          std::to_string(irradiance.height()) + " but sensor is " + std::to_string(spec.width) + "x" +
                          std::to_string(spec.height));
    if (irradiance.channels() != kNumBands) throw DomainError("expose: irradiance must have one channel per band");
    RawImage raw;
    raw.width = spec.width;
    raw.height = spec.height;
    raw.dn.assign(static_cast<std::size_t>(spec.width) * spec.height, 0);
    raw.cfa = spec.cfa;
    raw.spec = spec;
    raw.seed = seed;
    raw.frame = frame;
    parallel_for(static_cast<std::size_t>(spec.height), threads, [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < spec.width; ++x) {
            const auto px = irradiance.pixel(x, y);
            for (double v : px)
                if (!std::isfinite(v)) throw DomainError("expose: non-finite irradiance");
            const double mean = mean_photoelectrons(px, spec, spec.cfa.at(x, y));
            raw.at(x, y) = electrons_to_dn(sensor_electrons(mean, spec, seed, frame, x, y), spec);
        }
    });
    return raw;
}

/// Total temporal + fixed-pattern noise variance at mean signal mu (e-), excluding quantization.
inline double noise_variance(const SensorSpec &spec, double mu) {
    const double dark = spec.dark_current * spec.exposure_time;
    const double prnu = spec.prnu_std * (mu + dark);
    const double shot = spec.shot_noise ? mu + dark : 0.0;
    return shot + prnu * prnu + spec.dsnu_std * spec.dsnu_std + spec.read_noise_std * spec.read_noise_std;
}

/// Analytic SNR curve: (mean e-, 20 log10(mu / sigma)).
inline std::vector<std::pair<double, double>> snr_curve(const SensorSpec &spec, const std::vector<double> &mean_electrons) {
    std::vector<std::pair<double, double>> out;
    for (double mu : mean_electrons) {
        if (!(mu > 0.0)) throw DomainError("snr_curve: mean electrons must be > 0");
        out.emplace_back(mu, 20.0 * std::log10(mu / std::sqrt(noise_variance(spec, mu))));
    }
    return out;
}

} // namespace fogsim
