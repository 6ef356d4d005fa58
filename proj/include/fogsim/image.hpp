#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "errors.hpp"
#include "spectrum.hpp"
#include "vec3.hpp"

namespace fogsim {

/// Multi-channel double image, row-major, channels interleaved.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, double fill = 0.0)
        : width_(width), height_(height), channels_(channels),
          data_(static_cast<std::size_t>(width) * height * channels, fill) {
        if (width < 0 || height < 0 || channels < 1) throw DomainError("Image: invalid dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const { return data_.empty(); }

    std::size_t index(int x, int y, int c = 0) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }
    double &at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
    double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

    std::span<double> pixel(int x, int y) { return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)}; }
    std::span<const double> pixel(int x, int y) const {
        return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
    }

    std::vector<double> &data() { return data_; }
    const std::vector<double> &data() const { return data_; }

    bool same_size(const Image &o) const { return width_ == o.width_ && height_ == o.height_; }

    friend bool operator==(const Image &, const Image &) = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<double> data_;
};

/// Spectral radiance per pixel, W sr^-1 m^-2 nm^-1, one channel per band.
struct RadianceImage {
    Image pixels;
    std::vector<std::uint32_t> sample_count;
    /// Variance of each pixel's band-averaged estimate (sample variance / n).
    std::vector<double> estimate_variance;
    double vertical_fov = 0.0; ///< degrees, carried for the optics stage

    RadianceImage() = default;
    RadianceImage(int width, int height)
        : pixels(width, height, kNumBands), sample_count(pixels.pixel_count(), 0),
          estimate_variance(pixels.pixel_count(), 0.0) {}

    int width() const { return pixels.width(); }
    int height() const { return pixels.height(); }

    Spectrum spectrum_at(int x, int y) const { return Spectrum(pixels.pixel(x, y)); }
    void set(int x, int y, const Spectrum &s) {
        auto px = pixels.pixel(x, y);
        for (int b = 0; b < kNumBands; ++b) px[b] = s[b];
    }

    friend bool operator==(const RadianceImage &a, const RadianceImage &b) { return a.pixels == b.pixels; }
};

/// Metric range along the primary ray to the first surface; +inf marks sky.
struct DepthMap {
    Image depth;

    DepthMap() = default;
    DepthMap(int width, int height) : depth(width, height, 1, kInfinity) {}

    int width() const { return depth.width(); }
    int height() const { return depth.height(); }
    double at(int x, int y) const { return depth.at(x, y); }
    double &at(int x, int y) { return depth.at(x, y); }

    friend bool operator==(const DepthMap &, const DepthMap &) = default;
};

enum class ColorEncoding { linear, gamma };

/// Display image: 3 channels, 8-bit, interleaved.
struct Rgb8Image {
    int width = 0;
    int height = 0;
    ColorEncoding encoding = ColorEncoding::gamma;
    std::vector<std::uint8_t> data;

    Rgb8Image() = default;
    Rgb8Image(int w, int h, ColorEncoding enc = ColorEncoding::gamma)
        : width(w), height(h), encoding(enc), data(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t &at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    std::uint8_t at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

    friend bool operator==(const Rgb8Image &, const Rgb8Image &) = default;
};

/// Power-law transfer: encode v^gamma, decode v^(1/gamma).
inline double gamma_encode(double v, double gamma) { return v <= 0.0 ? 0.0 : std::pow(v, gamma); }
inline double gamma_decode(double v, double gamma) { return v <= 0.0 ? 0.0 : std::pow(v, 1.0 / gamma); }

/// Round-half-away-from-zero quantization of [0, 1] to 8 bits.
inline std::uint8_t quantize8(double v) {
    return static_cast<std::uint8_t>(std::round(std::clamp(v, 0.0, 1.0) * 255.0));
}

/// 8-bit RGB to linear double RGB using the inverse power-law gamma.
inline Image to_linear(const Rgb8Image &img, double gamma) {
    Image out(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const double v = img.at(x, y, c) / 255.0;
                out.at(x, y, c) = img.encoding == ColorEncoding::gamma ? gamma_decode(v, gamma) : v;
            }
    return out;
}

/// Linear [0,1] RGB to gamma-encoded 8-bit.
inline Rgb8Image to_rgb8(const Image &linear, double gamma) {
    if (linear.channels() != 3) throw DomainError("to_rgb8: expected 3 channels");
    Rgb8Image out(linear.width(), linear.height(), ColorEncoding::gamma);
    for (int y = 0; y < linear.height(); ++y)
        for (int x = 0; x < linear.width(); ++x)
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = quantize8(gamma_encode(std::clamp(linear.at(x, y, c), 0.0, 1.0), gamma));
    return out;
}

/// Channel values scaled to [0,1] doubles without changing encoding.
inline Image to_unit(const Rgb8Image &img) {
    Image out(img.width, img.height, 3);
    for (std::size_t i = 0; i < img.data.size(); ++i) out.data()[i] = img.data[i] / 255.0;
    return out;
}

} // namespace fogsim
