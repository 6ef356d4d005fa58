#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "errors.hpp"

namespace fogsim {

/// Fixed wavelength grid shared by every Spectrum in the build:
/// 31 bands, centers 400..700 nm, 10 nm spacing.
struct WavelengthGrid {
    static constexpr int kBands = 31;
    static constexpr double kFirstNm = 400.0;
    static constexpr double kSpacingNm = 10.0;

    static constexpr double wavelength_nm(int band) { return kFirstNm + kSpacingNm * band; }
};

inline constexpr int kNumBands = WavelengthGrid::kBands;

/// Radiometric quantity sampled on the WavelengthGrid. Element-wise
/// arithmetic; the grid is part of the type so spectra on different grids
/// cannot be combined.
class Spectrum {
public:
    constexpr Spectrum() { values_.fill(0.0); }
    constexpr explicit Spectrum(double v) { values_.fill(v); }
    explicit Spectrum(std::span<const double> values) {
        if (values.size() != kNumBands)
            throw DomainError("spectrum needs " + std::to_string(kNumBands) + " samples, got " +
                              std::to_string(values.size()));
        std::copy(values.begin(), values.end(), values_.begin());
    }

    static constexpr Spectrum flat(double v) { return Spectrum(v); }

    constexpr double operator[](int i) const { return values_[i]; }
    constexpr double &operator[](int i) { return values_[i]; }
    constexpr const std::array<double, kNumBands> &values() const { return values_; }

    constexpr Spectrum &operator+=(const Spectrum &o) {
        for (int i = 0; i < kNumBands; ++i) values_[i] += o.values_[i];
        return *this;
    }
    constexpr Spectrum &operator*=(const Spectrum &o) {
        for (int i = 0; i < kNumBands; ++i) values_[i] *= o.values_[i];
        return *this;
    }
    constexpr Spectrum &operator*=(double s) {
        for (double &v : values_) v *= s;
        return *this;
    }

    friend constexpr Spectrum operator+(Spectrum a, const Spectrum &b) { return a += b; }
    friend constexpr Spectrum operator*(Spectrum a, const Spectrum &b) { return a *= b; }
    friend constexpr Spectrum operator*(Spectrum a, double s) { return a *= s; }
    friend constexpr Spectrum operator*(double s, Spectrum a) { return a *= s; }
    friend constexpr bool operator==(const Spectrum &, const Spectrum &) = default;

    constexpr double max_value() const { return *std::max_element(values_.begin(), values_.end()); }
    constexpr double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
    constexpr double average() const {
        double s = 0;
        for (double v : values_) s += v;
        return s / kNumBands;
    }
    constexpr bool is_black() const { return max_value() == 0.0 && min_value() == 0.0; }

    bool is_valid() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v) && v >= 0.0; });
    }

private:
    std::array<double, kNumBands> values_;
};

} // namespace fogsim
