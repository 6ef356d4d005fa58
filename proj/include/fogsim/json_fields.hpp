#pragma once

#include <cctype>
#include <cstddef>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "spectrum.hpp"
#include "vec3.hpp"

namespace fogsim {

using Json = nlohmann::ordered_json;

/// Parses structured text, converting parser failures into ParseError with
/// line/column diagnostics.
inline Json parse_json_text(const std::string &text, const std::string &source) {
    try {
        return Json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const Json::parse_error &e) {
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') { ++line; col = 1; }
            else ++col;
        }
        std::string msg = e.what();
        if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
    }
}

inline std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Typed access to one JSON object with a dotted path for diagnostics.
/// Every key that is read is recorded; finish() rejects the rest.
class FieldReader {
public:
    FieldReader(const Json &obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    const std::string &path() const { return path_; }
    std::string field(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string &key) {
        seen_.insert(key);
        return obj_.contains(key);
    }

    const Json &raw(const std::string &key) {
        seen_.insert(key);
        if (!obj_.contains(key)) throw ValidationError(field(key), "missing required field");
        return obj_.at(key);
    }

    FieldReader object(const std::string &key) { return FieldReader(raw(key), field(key)); }

    double number(const std::string &key) {
        const Json &v = raw(key);
        if (!v.is_number()) throw ValidationError(field(key), "expected a number");
        return v.get<double>();
    }
    double number(const std::string &key, double fallback) { return has(key) ? number(key) : fallback; }

    long long integer(const std::string &key) {
        const Json &v = raw(key);
        if (!v.is_number_integer()) throw ValidationError(field(key), "expected an integer");
        return v.get<long long>();
    }
    long long integer(const std::string &key, long long fallback) { return has(key) ? integer(key) : fallback; }

    std::uint64_t unsigned_integer(const std::string &key) {
        const Json &v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ValidationError(field(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string &key, bool fallback) {
        if (!has(key)) return fallback;
        const Json &v = raw(key);
        if (!v.is_boolean()) throw ValidationError(field(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string &key) {
        const Json &v = raw(key);
        if (!v.is_string()) throw ValidationError(field(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string &key, const std::string &fallback) { return has(key) ? string(key) : fallback; }

    std::vector<double> numbers(const std::string &key) {
        const Json &v = raw(key);
        if (!v.is_array()) throw ValidationError(field(key), "expected an array of numbers");
        std::vector<double> out;
        for (const auto &e : v) {
            if (!e.is_number()) throw ValidationError(field(key), "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    Vec3 vec3(const std::string &key) {
        const auto v = numbers(key);
        if (v.size() != 3) throw ValidationError(field(key), "expected [x, y, z]");
        return {v[0], v[1], v[2]};
    }
    Vec3 vec3(const std::string &key, const Vec3 &fallback) { return has(key) ? vec3(key) : fallback; }

    /// "flat <value>" or an explicit list with one value per band.
    Spectrum spectrum(const std::string &key) {
        const Json &v = raw(key);
        return parse_spectrum(v, field(key));
    }

    static Spectrum parse_spectrum(const Json &v, const std::string &field_name) {
        Spectrum s;
        if (v.is_string()) {
            std::istringstream in(v.get<std::string>());
            std::string word;
            double value = 0.0;
            std::string trailing;
            if (!(in >> word) || word != "flat" || !(in >> value) || (in >> trailing))
                throw ValidationError(field_name, "spectrum string must be 'flat <value>'");
            s = Spectrum::flat(value);
        } else if (v.is_array()) {
            std::vector<double> values;
            for (const auto &e : v) {
                if (!e.is_number()) throw ValidationError(field_name, "spectrum list must contain numbers");
                values.push_back(e.get<double>());
            }
            if (values.size() != kNumBands)
                throw ValidationError(field_name, "spectrum list needs " + std::to_string(kNumBands) + " values");
            s = Spectrum(values);
        } else {
            throw ValidationError(field_name, "expected 'flat <value>' or a list of " + std::to_string(kNumBands) + " values");
        }
        if (!s.is_valid()) throw ValidationError(field_name, "spectrum samples must be finite and >= 0");
        return s;
    }

    /// Rejects keys that were never read.
    void finish() const {
        for (const auto &[key, value] : obj_.items()) {
            (void)value;
            if (!seen_.count(key)) throw ValidationError(field(key), "unknown key");
        }
    }

private:
    const Json &obj_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace fogsim
