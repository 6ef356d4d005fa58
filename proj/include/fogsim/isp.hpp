#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "camera.hpp"
#include "errors.hpp"
#include "image.hpp"
#include "parallel.hpp"

namespace fogsim {

using Matrix3 = std::array<double, 9>; // row-major

inline constexpr Matrix3 kIdentity3{1, 0, 0, 0, 1, 0, 0, 0, 1};

struct IspConfig {
    /// Per-channel (R, G, B) white-balance multipliers; empty selects gray-world.
    std::optional<std::array<double, 3>> wb_gains = std::array<double, 3>{1.0, 1.0, 1.0};
    Matrix3 ccm = kIdentity3;
    double gamma = 1.0 / 2.2; ///< encode exponent
    int output_bits = 8;

    void validate() const {
        if (wb_gains)
            for (double g : *wb_gains)
                if (!(g > 0.0) || !std::isfinite(g)) throw ValidationError("isp.wb_gains", "gains must be finite and > 0");
        for (int r = 0; r < 3; ++r) {
            const double sum = ccm[3 * r] + ccm[3 * r + 1] + ccm[3 * r + 2];
            if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("isp.ccm", "each row must sum to 1");
        }
        if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("isp.gamma", "must be in (0, 1]");
        if (output_bits != 8) throw ValidationError("isp.output_bits", "only 8-bit output is supported");
    }
};

/// Black-level subtraction and normalization to [0, 1] by (white - black).
inline Image normalize_raw(const RawImage &raw) {
    const double black = raw.spec.black_level;
    const double range = raw.spec.white_level() - black;
    if (!(range > 0.0)) throw ConfigError("raw metadata: white level must exceed black level");
    Image out(raw.width, raw.height, 1);
    for (std::size_t i = 0; i < raw.dn.size(); ++i) out.data()[i] = std::max(0.0, raw.dn[i] - black) / range;
    return out;
}

/// Gray-world gains: mean(G sites) / mean(C sites), computed on black-subtracted data.
inline std::array<double, 3> gray_world_gains(const RawImage &raw) {
    if (raw.dn.empty()) throw DomainError("gray_world_gains: empty raw image");
    const Image norm = normalize_raw(raw);
    std::array<double, 3> sum{}, count{};
    for (int y = 0; y < raw.height; ++y)
        for (int x = 0; x < raw.width; ++x) {
            const int c = static_cast<int>(raw.cfa.at(x, y));
            sum[c] += norm.at(x, y);
            count[c] += 1.0;
        }
    std::array<double, 3> mean{};
    for (int c = 0; c < 3; ++c) {
        mean[c] = count[c] > 0 ? sum[c] / count[c] : 0.0;
        if (!(mean[c] > 0.0)) throw DomainError(std::string("gray_world_gains: channel ") + "RGB"[c] + " is all zero");
    }
    return {mean[1] / mean[0], 1.0, mean[1] / mean[2]};
}

/// Bilinear demosaic: each missing channel is the mean of the nearest
/// same-channel sites (orthogonal first, then diagonal) inside the image.
inline Image demosaic_bilinear(const Image &mosaic, const CfaPattern &cfa, int threads = 1) {
    if (mosaic.channels() != 1) throw DomainError("demosaic_bilinear: expected a single-channel mosaic");
    const int w = mosaic.width(), h = mosaic.height();
    if (w < 2 || h < 2) throw DomainError("demosaic_bilinear: mosaic must be at least 2x2");
    static constexpr int kRings[3][8][2] = {
        {{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
        {{-1, -1}, {1, -1}, {-1, 1}, {1, 1}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
        {{-2, 0}, {2, 0}, {0, -2}, {0, 2}, {-2, -2}, {2, -2}, {-2, 2}, {2, 2}},
    };
    static constexpr int kRingSize[3] = {4, 4, 8};
    Image out(w, h, 3);
    parallel_for(static_cast<std::size_t>(h), threads, [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            const int own = static_cast<int>(cfa.at(x, y));
            for (int c = 0; c < 3; ++c) {
                if (c == own) {
                    out.at(x, y, c) = mosaic.at(x, y);
                    continue;
                }
                double sum = 0.0;
                int n = 0;
                for (int ring = 0; ring < 3 && n == 0; ++ring)
                    for (int k = 0; k < kRingSize[ring]; ++k) {
                        const int nx = x + kRings[ring][k][0], ny = y + kRings[ring][k][1];
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        if (static_cast<int>(cfa.at(nx, ny)) != c) continue;
                        sum += mosaic.at(nx, ny);
                        ++n;
                    }
                out.at(x, y, c) = n ? sum / n : 0.0;
            }
        }
    });
    return out;
}

inline std::array<double, 3> apply_ccm(const Matrix3 &m, const std::array<double, 3> &v) {
    return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2], m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
            m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

/// Stages 1-5: black level, white balance, demosaic, colour correction, clamp.
/// Returns linear RGB in [0, 1].
inline Image process_linear(const RawImage &raw, const IspConfig &cfg, int threads = 1) {
    cfg.validate();
    if (raw.dn.size() != static_cast<std::size_t>(raw.width) * raw.height) throw ConfigError("raw image: missing samples");
    Image mosaic = normalize_raw(raw);
    const std::array<double, 3> gains = cfg.wb_gains ? *cfg.wb_gains : gray_world_gains(raw);
    for (int y = 0; y < raw.height; ++y)
        for (int x = 0; x < raw.width; ++x) mosaic.at(x, y) *= gains[static_cast<int>(raw.cfa.at(x, y))];
    Image rgb = demosaic_bilinear(mosaic, raw.cfa, threads);
    for (int y = 0; y < rgb.height(); ++y)
        for (int x = 0; x < rgb.width(); ++x) {
            const auto v = apply_ccm(cfg.ccm, {rgb.at(x, y, 0), rgb.at(x, y, 1), rgb.at(x, y, 2)});
            for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = std::clamp(v[c], 0.0, 1.0);
        }
    return rgb;
}

/// Full raw-to-display chain; stages 6-7 are gamma encoding and 8-bit
/// quantization with round-half-away-from-zero.
inline Rgb8Image process(const RawImage &raw, const IspConfig &cfg, int threads = 1) {
    return to_rgb8(process_linear(raw, cfg, threads), cfg.gamma);
}

} // namespace fogsim
