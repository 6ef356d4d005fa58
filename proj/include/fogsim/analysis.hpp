#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "image.hpp"

namespace fogsim {

struct Rect {
    int x = 0, y = 0, width = 0, height = 0;

    bool inside(const Image &img) const {
        return x >= 0 && y >= 0 && width > 0 && height > 0 && x + width <= img.width() && y + height <= img.height();
    }
};

namespace detail {

/// Edge-clamped sliding min and max of one channel over a square window.
inline std::pair<Image, Image> local_extrema(const Image &in, int c, int radius) {
    const int w = in.width(), h = in.height();
    Image rmin(w, h, 1), rmax(w, h, 1), omin(w, h, 1), omax(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double lo = in.at(x, y, c), hi = lo;
            for (int d = -radius; d <= radius; ++d) {
                const double v = in.at(std::clamp(x + d, 0, w - 1), y, c);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            rmin.at(x, y) = lo;
            rmax.at(x, y) = hi;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double lo = rmin.at(x, y), hi = rmax.at(x, y);
            for (int d = -radius; d <= radius; ++d) {
                const int yy = std::clamp(y + d, 0, h - 1);
                lo = std::min(lo, rmin.at(x, yy));
                hi = std::max(hi, rmax.at(x, yy));
            }
            omin.at(x, y) = lo;
            omax.at(x, y) = hi;
        }
    return {std::move(omin), std::move(omax)};
}

} // namespace detail

/// Per channel: (v - local_min) / (local_max - local_min) over a window x window
/// neighbourhood; 0.5 where the window is flat.
inline Image regional_contrast_stretch(const Image &image, int window) {
    if (window < 3 || window % 2 == 0) throw DomainError("regional_contrast_stretch: window must be odd and >= 3");
    const int radius = window / 2;
    Image out(image.width(), image.height(), image.channels());
    for (int c = 0; c < image.channels(); ++c) {
        const auto [lo, hi] = detail::local_extrema(image, c, radius);
        for (int y = 0; y < image.height(); ++y)
            for (int x = 0; x < image.width(); ++x) {
                const double range = hi.at(x, y) - lo.at(x, y);
                out.at(x, y, c) = range > 0.0 ? (image.at(x, y, c) - lo.at(x, y)) / range : 0.5;
            }
    }
    return out;
}

/// Standard deviation per channel of the residual after a least-squares plane
/// fit a + b x + c y over the region (removes illumination gradients).
inline std::vector<double> noise_std_estimate(const Image &image, const Rect &region) {
    if (!region.inside(image)) throw DomainError("noise_std_estimate: region out of bounds");
    if (region.width < 8 || region.height < 8) throw DomainError("noise_std_estimate: region must be at least 8x8");
    const double cx = (region.width - 1) / 2.0, cy = (region.height - 1) / 2.0;
    // On a full rectangular grid the centred x and y regressors are orthogonal.
    double sxx = 0.0, syy = 0.0;
    for (int i = 0; i < region.width; ++i) sxx += (i - cx) * (i - cx);
    sxx *= region.height;
    for (int j = 0; j < region.height; ++j) syy += (j - cy) * (j - cy);
    syy *= region.width;
    const double n = static_cast<double>(region.width) * region.height;

    std::vector<double> out(image.channels());
    for (int c = 0; c < image.channels(); ++c) {
        double sum = 0.0, sx = 0.0, sy = 0.0;
        for (int j = 0; j < region.height; ++j)
            for (int i = 0; i < region.width; ++i) {
                const double v = image.at(region.x + i, region.y + j, c);
                sum += v;
                sx += (i - cx) * v;
                sy += (j - cy) * v;
            }
        const double a = sum / n, b = sx / sxx, cc = sy / syy;
        double ss = 0.0;
        for (int j = 0; j < region.height; ++j)
            for (int i = 0; i < region.width; ++i) {
                const double r = image.at(region.x + i, region.y + j, c) - (a + b * (i - cx) + cc * (j - cy));
                ss += r * r;
            }
        out[c] = std::sqrt(ss / (n - 3.0));
    }
    return out;
}

enum class TrendVerdict { insufficient, increasing, decreasing, non_monotone };

inline const char *to_string(TrendVerdict v) {
    switch (v) {
    case TrendVerdict::insufficient: return "insufficient";
    case TrendVerdict::increasing: return "increasing";
    case TrendVerdict::decreasing: return "decreasing";
    case TrendVerdict::non_monotone: return "non_monotone";
    }
    return "non_monotone";
}

struct TrendRow {
    std::size_t patch_id = 0;
    double sigma_s = 0.0;
    std::vector<double> mean; ///< per channel
    double luminance = 0.0;   ///< channel mean
};

struct PatchTrend {
    std::vector<TrendRow> rows; ///< grouped by patch, sigma_s ascending
    std::vector<TrendVerdict> verdicts; ///< per patch, from luminance

    /// True when the patch luminance moves monotonically (toward the
    /// asymptote if one was supplied).
    bool passes(std::size_t patch, std::optional<double> asymptote = std::nullopt) const;

    std::string to_csv() const {
        std::ostringstream out;
        out.precision(9);
        out << "patch_id,sigma_s,mean_R,mean_G,mean_B\n";
        for (const auto &r : rows) {
            out << r.patch_id << ',' << r.sigma_s;
            for (std::size_t c = 0; c < 3; ++c) out << ',' << (c < r.mean.size() ? r.mean[c] : 0.0);
            out << '\n';
        }
        return out.str();
    }
};

inline std::vector<double> region_mean(const Image &image, const Rect &r) {
    if (!r.inside(image)) throw DomainError("region out of bounds");
    std::vector<double> mean(image.channels(), 0.0);
    for (int y = r.y; y < r.y + r.height; ++y)
        for (int x = r.x; x < r.x + r.width; ++x)
            for (int c = 0; c < image.channels(); ++c) mean[c] += image.at(x, y, c);
    for (double &m : mean) m /= static_cast<double>(r.width) * r.height;
    return mean;
}

/// Per-patch mean channel values against fog density, with a monotonicity
/// verdict on patch luminance. Non-strict: equal consecutive values are monotone.
inline PatchTrend patch_trend(std::vector<std::pair<double, Image>> series, const std::vector<Rect> &patches) {
    std::stable_sort(series.begin(), series.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    PatchTrend out;
    for (std::size_t p = 0; p < patches.size(); ++p) {
        std::vector<double> lum;
        for (const auto &[sigma, img] : series) {
            TrendRow row;
            row.patch_id = p;
            row.sigma_s = sigma;
            row.mean = region_mean(img, patches[p]);
            for (double m : row.mean) row.luminance += m;
            row.luminance /= static_cast<double>(row.mean.size());
            lum.push_back(row.luminance);
            out.rows.push_back(std::move(row));
        }
        if (lum.size() < 2) {
            out.verdicts.push_back(TrendVerdict::insufficient);
            continue;
        }
        bool up = true, down = true;
        for (std::size_t i = 1; i < lum.size(); ++i) {
            up = up && lum[i] >= lum[i - 1];
            down = down && lum[i] <= lum[i - 1];
        }
        if (up && !down) out.verdicts.push_back(TrendVerdict::increasing);
        else if (down && !up) out.verdicts.push_back(TrendVerdict::decreasing);
        else if (up && down) out.verdicts.push_back(TrendVerdict::increasing); // constant series
        else out.verdicts.push_back(TrendVerdict::non_monotone);
    }
    return out;
}

inline bool PatchTrend::passes(std::size_t patch, std::optional<double> asymptote) const {
    const TrendVerdict v = verdicts.at(patch);
    if (v == TrendVerdict::insufficient || v == TrendVerdict::non_monotone) return false;
    if (!asymptote) return true;
    double first = 0.0;
    for (const auto &r : rows)
        if (r.patch_id == patch) {
            first = r.luminance;
            break;
        }
    return (*asymptote >= first) ? v == TrendVerdict::increasing : v == TrendVerdict::decreasing;
}

/// RMS contrast of a set of values: standard deviation over mean.
inline double rms_contrast(const std::vector<double> &values) {
    if (values.empty()) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return mean > 0.0 ? std::sqrt(var) / mean : 0.0;
}

} // namespace fogsim
