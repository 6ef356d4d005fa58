#pragma once

#include <cstdio>
#include <map>
#include <sstream>
#include <string>

#include "camera.hpp"
#include "image_io.hpp"

namespace fogsim {

// Raw frames are stored as a netpbm-style P5 header ("P5\n<W> <H>\n<maxval>\n",
// maxval = 2^bit_depth - 1) followed by W*H 16-bit samples in LITTLE-endian
// byte order, row-major. Every sample uses two bytes regardless of maxval.
// The sidecar "<file>.meta" holds "key value..." lines with the sensor snapshot.

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline std::string encode_raw_pnm(const RawImage &raw) {
    std::string out = "P5\n" + std::to_string(raw.width) + " " + std::to_string(raw.height) + "\n" +
                      std::to_string(raw.spec.white_level()) + "\n";
    out.reserve(out.size() + raw.dn.size() * 2);
    for (std::uint16_t v : raw.dn) {
        out.push_back(static_cast<char>(v & 0xff));
        out.push_back(static_cast<char>(v >> 8));
    }
    return out;
}

inline std::string encode_raw_meta(const RawImage &raw) {
    const SensorSpec &s = raw.spec;
    std::ostringstream m;
    m << "fogsim-raw 1\n";
    m << "width " << raw.width << "\n";
    m << "height " << raw.height << "\n";
    m << "cfa " << raw.cfa.name() << "\n";
    m << "bit_depth " << s.bit_depth << "\n";
    m << "black_level " << s.black_level << "\n";
    m << "seed " << raw.seed << "\n";
    m << "frame " << raw.frame << "\n";
    m << "pixel_area " << detail::fmt_double(s.pixel_area) << "\n";
    m << "exposure_time " << detail::fmt_double(s.exposure_time) << "\n";
    m << "full_well " << detail::fmt_double(s.full_well) << "\n";
    m << "conversion_gain " << detail::fmt_double(s.conversion_gain) << "\n";
    m << "analog_gain " << detail::fmt_double(s.analog_gain) << "\n";
    m << "read_noise_std " << detail::fmt_double(s.read_noise_std) << "\n";
    m << "dark_current " << detail::fmt_double(s.dark_current) << "\n";
    m << "prnu_std " << detail::fmt_double(s.prnu_std) << "\n";
    m << "dsnu_std " << detail::fmt_double(s.dsnu_std) << "\n";
    m << "shot_noise " << (s.shot_noise ? 1 : 0) << "\n";
    const char *names[3] = {"qe_r", "qe_g", "qe_b"};
    for (int c = 0; c < 3; ++c) {
        m << names[c];
        for (int b = 0; b < kNumBands; ++b) m << ' ' << detail::fmt_double(s.qe[c][b]);
        m << "\n";
    }
    return m.str();
}

inline RawImage decode_raw(const std::string &pnm, const std::string &meta, const std::string &source) {
    std::map<std::string, std::vector<std::string>> kv;
    {
        std::istringstream in(meta);
        std::string line;
        if (!std::getline(in, line) || line != "fogsim-raw 1") throw ParseError(source + ".meta: missing 'fogsim-raw 1' header");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string key, tok;
            ls >> key;
            while (ls >> tok) kv[key].push_back(tok);
        }
    }
    auto one = [&](const std::string &key) -> const std::string & {
        const auto it = kv.find(key);
        if (it == kv.end() || it->second.size() != 1) throw ParseError(source + ".meta: missing or malformed '" + key + "'");
        return it->second[0];
    };
    auto num = [&](const std::string &key) {
        try {
            return std::stod(one(key));
        } catch (const std::invalid_argument &) {
            throw ParseError(source + ".meta: '" + key + "' is not a number");
        }
    };

    RawImage raw;
    SensorSpec &s = raw.spec;
    raw.width = s.width = static_cast<int>(num("width"));
    raw.height = s.height = static_cast<int>(num("height"));
    raw.cfa = s.cfa = CfaPattern::parse(one("cfa"));
    s.bit_depth = static_cast<int>(num("bit_depth"));
    s.black_level = static_cast<int>(num("black_level"));
    raw.seed = std::stoull(one("seed"));
    raw.frame = std::stoull(one("frame"));
    s.pixel_area = num("pixel_area");
    s.exposure_time = num("exposure_time");
    s.full_well = num("full_well");
    s.conversion_gain = num("conversion_gain");
    s.analog_gain = num("analog_gain");
    s.read_noise_std = num("read_noise_std");
    s.dark_current = num("dark_current");
    s.prnu_std = num("prnu_std");
    s.dsnu_std = num("dsnu_std");
    s.shot_noise = kv.count("shot_noise") ? num("shot_noise") != 0.0 : true;
    const char *names[3] = {"qe_r", "qe_g", "qe_b"};
    for (int c = 0; c < 3; ++c) {
        const auto it = kv.find(names[c]);
        if (it == kv.end() || it->second.size() != kNumBands) throw ParseError(source + ".meta: malformed '" + names[c] + "'");
        for (int b = 0; b < kNumBands; ++b) s.qe[c][b] = std::stod(it->second[b]);
    }
    s.validate();

    if (pnm.size() < 2 || pnm.compare(0, 2, "P5") != 0) throw ParseError(source + ": not a P5 raw file");
    std::size_t pos = 2;
    const auto h = detail::read_pnm_header(pnm, pos, 3, source);
    if (h[0] != raw.width || h[1] != raw.height) throw ParseError(source + ": dimensions disagree with sidecar");
    if (h[2] != s.white_level()) throw ParseError(source + ": maxval disagrees with sidecar bit depth");
    const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height;
    if (pnm.size() - pos != n * 2) throw ParseError(source + ": raster size mismatch");
    raw.dn.resize(n);
    const auto *p = reinterpret_cast<const unsigned char *>(pnm.data() + pos);
    for (std::size_t i = 0; i < n; ++i) {
        raw.dn[i] = static_cast<std::uint16_t>(p[2 * i] | (p[2 * i + 1] << 8));
        if (raw.dn[i] > s.white_level()) throw ParseError(source + ": sample exceeds maxval");
    }
    return raw;
}

inline void write_raw(const std::string &path, const RawImage &raw) {
    write_file_atomic(path, encode_raw_pnm(raw));
    write_file_atomic(path + ".meta", encode_raw_meta(raw));
}

inline RawImage read_raw(const std::string &path) {
    return decode_raw(read_binary_file(path), read_binary_file(path + ".meta"), path);
}

} // namespace fogsim
