#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "image.hpp"

namespace fogsim {

namespace detail {

inline void put_le32(std::string &out, float f) {
    std::uint32_t u = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

inline float get_le32(const unsigned char *p) {
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return std::bit_cast<float>(u);
}

} // namespace detail

/// Writes `bytes` to `path` through a temporary sibling file and a rename, so
/// readers never observe a partially written file.
inline void write_file_atomic(const std::string &path, const std::string &bytes) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(path + ": cannot open for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error(path + ": write failed");
    }
    std::filesystem::rename(tmp, target);
}

inline std::string read_binary_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// -- Float container -----------------------------------------------------------
//
// Text header, one "key value..." per line, terminated by "end\n":
//
//   FOGSIM-FLOAT 1
//   kind <radiance|depth|image>
//   width <W>
//   height <H>
//   bands <N>
//   wavelengths <N centers in nm> | none
//   vertical_fov <degrees>            (optional)
//   end
//
// followed by W*H*N little-endian IEEE-754 float32 values, band-planar
// (all of band 0, then band 1, ...), each band row-major from the top row.

struct FloatContainer {
    std::string kind = "image";
    Image image;
    std::vector<double> wavelengths; ///< empty when not spectral
    double vertical_fov = 0.0;       ///< 0 when absent
};

inline std::string encode_float_container(const FloatContainer &fc) {
    const Image &img = fc.image;
    std::ostringstream h;
    h << "FOGSIM-FLOAT 1\n";
    h << "kind " << fc.kind << "\n";
    h << "width " << img.width() << "\n";
    h << "height " << img.height() << "\n";
    h << "bands " << img.channels() << "\n";
    h << "wavelengths";
    if (fc.wavelengths.empty()) h << " none";
    for (double w : fc.wavelengths) h << ' ' << w;
    h << "\n";
    if (fc.vertical_fov > 0.0) h << "vertical_fov " << fc.vertical_fov << "\n";
    h << "end\n";
    std::string out = h.str();
    out.reserve(out.size() + img.data().size() * 4);
    for (int c = 0; c < img.channels(); ++c)
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x) detail::put_le32(out, static_cast<float>(img.at(x, y, c)));
    return out;
}

inline FloatContainer decode_float_container(const std::string &bytes, const std::string &source) {
    FloatContainer fc;
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        const std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string::npos) throw ParseError(source + ": truncated header");
        std::string line = bytes.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    };
    if (next_line() != "FOGSIM-FLOAT 1") throw ParseError(source + ": not a FOGSIM-FLOAT 1 file");
    int width = -1, height = -1, bands = -1;
    for (int line_no = 2;; ++line_no) {
        const std::string line = next_line();
        if (line == "end") break;
        std::istringstream in(line);
        std::string key;
        in >> key;
        auto fail = [&](const std::string &why) {
            throw ParseError(source + ":" + std::to_string(line_no) + ": " + key + ": " + why);
        };
        if (key == "kind") {
            in >> fc.kind;
        } else if (key == "width") {
            if (!(in >> width) || width < 1) fail("invalid width");
        } else if (key == "height") {
            if (!(in >> height) || height < 1) fail("invalid height");
        } else if (key == "bands") {
            if (!(in >> bands) || bands < 1) fail("invalid band count");
        } else if (key == "wavelengths") {
            std::string tok;
            while (in >> tok) {
                if (tok == "none") break;
                try {
                    fc.wavelengths.push_back(std::stod(tok));
                } catch (const std::exception &) {
                    fail("invalid wavelength '" + tok + "'");
                }
            }
        } else if (key == "vertical_fov") {
            if (!(in >> fc.vertical_fov)) fail("invalid value");
        } else {
            fail("unknown header key");
        }
    }
    if (width < 1 || height < 1 || bands < 1) throw ParseError(source + ": header lacks width/height/bands");
    if (!fc.wavelengths.empty() && static_cast<int>(fc.wavelengths.size()) != bands)
        throw ParseError(source + ": wavelength count does not match band count");
    const std::size_t count = static_cast<std::size_t>(width) * height * bands;
    if (bytes.size() - pos != count * 4) throw ParseError(source + ": payload size mismatch");
    fc.image = Image(width, height, bands);
    const auto *p = reinterpret_cast<const unsigned char *>(bytes.data() + pos);
    for (int c = 0; c < bands; ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x, p += 4) fc.image.at(x, y, c) = detail::get_le32(p);
    return fc;
}

inline void write_float_container(const std::string &path, const FloatContainer &fc) {
    write_file_atomic(path, encode_float_container(fc));
}

inline FloatContainer read_float_container(const std::string &path) {
    return decode_float_container(read_binary_file(path), path);
}

inline FloatContainer to_container(const RadianceImage &img) {
    FloatContainer fc;
    fc.kind = "radiance";
    fc.image = img.pixels;
    for (int b = 0; b < kNumBands; ++b) fc.wavelengths.push_back(WavelengthGrid::wavelength_nm(b));
    fc.vertical_fov = img.vertical_fov;
    return fc;
}

inline FloatContainer to_container(const DepthMap &depth) {
    FloatContainer fc;
    fc.kind = "depth";
    fc.image = depth.depth;
    return fc;
}

inline RadianceImage radiance_from_container(const FloatContainer &fc, const std::string &source) {
    if (fc.kind != "radiance" || fc.image.channels() != kNumBands)
        throw ParseError(source + ": expected a " + std::to_string(kNumBands) + "-band radiance container");
    for (int b = 0; b < kNumBands; ++b)
        if (fc.wavelengths.size() != static_cast<std::size_t>(kNumBands) ||
            std::abs(fc.wavelengths[b] - WavelengthGrid::wavelength_nm(b)) > 1e-6)
            throw ParseError(source + ": wavelength grid differs from the build's grid");
    RadianceImage img(fc.image.width(), fc.image.height());
    img.pixels = fc.image;
    img.vertical_fov = fc.vertical_fov;
    return img;
}

inline DepthMap depth_from_container(const FloatContainer &fc, const std::string &source) {
    if (fc.kind != "depth" || fc.image.channels() != 1) throw ParseError(source + ": expected a depth container");
    DepthMap d;
    d.depth = fc.image;
    return d;
}

// -- 8-bit PPM -------------------------------------------------------------------

inline std::string encode_ppm(const Rgb8Image &img) {
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char *>(img.data.data()), img.data.size());
    return out;
}

namespace detail {

/// Reads the whitespace-separated netpbm header fields (comments allowed).
inline std::vector<long> read_pnm_header(const std::string &bytes, std::size_t &pos, int fields,
                                         const std::string &source) {
    std::vector<long> out;
    while (static_cast<int>(out.size()) < fields) {
        while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (pos < bytes.size() && bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            continue;
        }
        std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (start == pos) throw ParseError(source + ": malformed PNM header");
        out.push_back(std::stol(bytes.substr(start, pos - start)));
    }
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw ParseError(source + ": malformed PNM header");
    ++pos; // single whitespace before the raster
    return out;
}

} // namespace detail

inline Rgb8Image decode_ppm(const std::string &bytes, const std::string &source) {
    if (bytes.size() < 2 || bytes.compare(0, 2, "P6") != 0) throw ParseError(source + ": not a binary PPM (P6)");
    std::size_t pos = 2;
    const auto h = detail::read_pnm_header(bytes, pos, 3, source);
    if (h[0] < 1 || h[1] < 1 || h[2] != 255) throw ParseError(source + ": only 8-bit PPM is supported");
    Rgb8Image img(static_cast<int>(h[0]), static_cast<int>(h[1]));
    if (bytes.size() - pos != img.data.size()) throw ParseError(source + ": raster size mismatch");
    std::memcpy(img.data.data(), bytes.data() + pos, img.data.size());
    return img;
}

inline void write_ppm(const std::string &path, const Rgb8Image &img) { write_file_atomic(path, encode_ppm(img)); }
inline Rgb8Image read_ppm(const std::string &path) { return decode_ppm(read_binary_file(path), path); }

/// Loads an RGB image from a PPM (gamma-decoded to linear) or a 3-band float container.
inline Image read_linear_rgb(const std::string &path, double gamma) {
    const std::string bytes = read_binary_file(path);
    if (bytes.rfind("P6", 0) == 0) return to_linear(decode_ppm(bytes, path), gamma);
    FloatContainer fc = decode_float_container(bytes, path);
    if (fc.image.channels() != 3) throw ParseError(path + ": expected 3 channels");
    return fc.image;
}

} // namespace fogsim
