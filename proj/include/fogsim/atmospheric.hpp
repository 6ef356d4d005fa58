#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "image.hpp"

namespace fogsim {

/// Parameters of the closed-form fog model
///   out = clear * exp(-beta d) + airlight * (1 - exp(-beta d)).
struct AsmParams {
    double beta = 0.0;             ///< 1/m
    std::vector<double> airlight;  ///< one value per image channel, linear units

    void validate(int channels) const {
        if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("asm.beta", "must be finite and >= 0");
        if (static_cast<int>(airlight.size()) != channels)
            throw ValidationError("asm.airlight", "needs one value per image channel");
        for (double a : airlight)
            if (!(a >= 0.0) || !std::isfinite(a)) throw ValidationError("asm.airlight", "values must be finite and >= 0");
    }
};

/// Transmission exp(-beta d); 0 for the sky sentinel when beta > 0.
inline double asm_transmission(double beta, double depth) {
    if (beta == 0.0) return 1.0;
    if (std::isinf(depth)) return 0.0;
    return std::exp(-beta * depth);
}

/// Applies the model per pixel and channel. `clear` must be linear.
inline Image synthesize_asm(const Image &clear, const DepthMap &depth, const AsmParams &params) {
    if (clear.width() != depth.width() || clear.height() != depth.height())
        throw DomainError("synthesize_asm: image and depth dimensions differ");
    params.validate(clear.channels());
    Image out(clear.width(), clear.height(), clear.channels());
    for (int y = 0; y < clear.height(); ++y)
        for (int x = 0; x < clear.width(); ++x) {
            const double d = depth.at(x, y);
            if (d < 0.0 || std::isnan(d)) throw DomainError("synthesize_asm: negative depth");
            const double t = asm_transmission(params.beta, d);
            for (int c = 0; c < clear.channels(); ++c)
                out.at(x, y, c) = clear.at(x, y, c) * t + params.airlight[c] * (1.0 - t);
        }
    return out;
}

namespace detail {

/// Separable min filter over a (2r+1)^2 window with edge clamping.
inline Image min_filter(const Image &in, int radius) {
    const int w = in.width(), h = in.height();
    Image tmp(w, h, 1), out(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double m = in.at(x, y);
            for (int dx = -radius; dx <= radius; ++dx) m = std::min(m, in.at(std::clamp(x + dx, 0, w - 1), y));
            tmp.at(x, y) = m;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double m = tmp.at(x, y);
            for (int dy = -radius; dy <= radius; ++dy) m = std::min(m, tmp.at(x, std::clamp(y + dy, 0, h - 1)));
            out.at(x, y) = m;
        }
    return out;
}

} // namespace detail

/// Per-pixel channel minimum followed by a spatial minimum over the patch.
inline Image dark_channel(const Image &image, int patch_radius) {
    if (patch_radius < 0) throw DomainError("dark_channel: patch_radius must be >= 0");
    Image channel_min(image.width(), image.height(), 1);
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            const auto px = image.pixel(x, y);
            channel_min.at(x, y) = *std::min_element(px.begin(), px.end());
        }
    return detail::min_filter(channel_min, patch_radius);
}

/// Airlight as the per-channel (lower) median over the ceil(top_fraction * N)
/// pixels with the largest dark-channel values. Ties are broken by
/// row-major pixel index, lowest first.
inline std::vector<double> estimate_airlight(const Image &image, int patch_radius = 7, double top_fraction = 0.001) {
    if (image.empty()) throw DomainError("estimate_airlight: empty image");
    if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw DomainError("estimate_airlight: top_fraction must be in (0, 1]");
    const Image dark = dark_channel(image, patch_radius);
    const std::size_t n = image.pixel_count();
    const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(n) - 1e-9)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dark.data()[a] > dark.data()[b]; });
    std::vector<double> airlight(image.channels());
    std::vector<double> values(k);
    for (int c = 0; c < image.channels(); ++c) {
        for (std::size_t i = 0; i < k; ++i) values[i] = image.data()[order[i] * image.channels() + c];
        std::sort(values.begin(), values.end());
        airlight[c] = values[(k - 1) / 2];
    }
    return airlight;
}

/// Collapses a per-channel airlight to its channel mean.
inline std::vector<double> scalar_airlight(const std::vector<double> &airlight) {
    const double mean = std::accumulate(airlight.begin(), airlight.end(), 0.0) / static_cast<double>(airlight.size());
    return std::vector<double>(airlight.size(), mean);
}

} // namespace fogsim
