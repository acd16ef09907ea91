#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "annsim/timeline.hpp"

namespace annsim::io {

// Times are written as decimal seconds with 6 fractional digits.
inline std::string format_seconds(double t) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", t);
    return buf;
}

inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Shortest decimal form that parses back to the identical double; used for
// results files so downstream analysis sees exactly the computed numbers.
inline std::string format_exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return in;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (;;) {
        const auto tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(pos));
            return fields;
        }
        fields.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
}

inline double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("malformed number in ") + what + ": '" + s + "'");
    }
}

inline void put_u32_le(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

inline std::uint32_t get_u32_le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f32_le(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32_le(out, bits);
}

inline float get_f32_le(std::istream& in) {
    const std::uint32_t bits = get_u32_le(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline void put_f64_le(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u32_le(out, static_cast<std::uint32_t>(bits & 0xffffffffULL));
    put_u32_le(out, static_cast<std::uint32_t>(bits >> 32));
}

inline double get_f64_le(std::istream& in) {
    const std::uint64_t lo = get_u32_le(in);
    const std::uint64_t hi = get_u32_le(in);
    const std::uint64_t bits = lo | (hi << 32);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace detail

// --- timeline text format: start<TAB>end<TAB>label, one row per interval ---

inline void write_events(std::ostream& out, const EventList& ev) {
    for (const auto& e : ev.events)
        out << format_seconds(e.start) << '\t' << format_seconds(e.end) << "\t1\n";
}

inline void write_events(const std::filesystem::path& path, const EventList& ev) {
    auto out = detail::open_out(path);
    write_events(out, ev);
}

inline EventList read_events(std::istream& in, double duration) {
    std::vector<Interval> events;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_tabs(line);
        if (f.size() != 3) throw std::runtime_error("event row must have 3 tab-separated fields");
        events.emplace_back(detail::parse_double(f[0], "event start"),
                            detail::parse_double(f[1], "event end"));
    }
    return EventList(std::move(events), duration);
}

inline EventList read_events(const std::filesystem::path& path, double duration) {
    auto in = detail::open_in(path);
    return read_events(in, duration);
}

inline void write_annotations(std::ostream& out, const AnnotationList& ann) {
    for (const auto& a : ann.annotations)
        out << format_seconds(a.segment.start) << '\t' << format_seconds(a.segment.end) << '\t'
            << a.label << '\n';
}

inline void write_annotations(const std::filesystem::path& path, const AnnotationList& ann) {
    auto out = detail::open_out(path);
    write_annotations(out, ann);
}

inline AnnotationList read_annotations(std::istream& in, double duration) {
    std::vector<Annotation> anns;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_tabs(line);
        if (f.size() != 3) throw std::runtime_error("annotation row must have 3 fields");
        const int label = static_cast<int>(detail::parse_double(f[2], "label"));
        anns.emplace_back(Interval(detail::parse_double(f[0], "segment start"),
                                   detail::parse_double(f[1], "segment end")),
                          label);
    }
    return AnnotationList(std::move(anns), duration);
}

inline AnnotationList read_annotations(const std::filesystem::path& path, double duration) {
    auto in = detail::open_in(path);
    return read_annotations(in, duration);
}

// Query sets use the same format with the label column omitted.
inline void write_intervals(std::ostream& out, const std::vector<Interval>& intervals) {
    for (const auto& q : intervals)
        out << format_seconds(q.start) << '\t' << format_seconds(q.end) << '\n';
}

inline std::vector<Interval> read_intervals(std::istream& in) {
    std::vector<Interval> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_tabs(line);
        if (f.size() != 2) throw std::runtime_error("interval row must have 2 fields");
        out.emplace_back(detail::parse_double(f[0], "start"), detail::parse_double(f[1], "end"));
    }
    return out;
}

// --- key=value metadata files ---

inline void write_keyvalue(const std::filesystem::path& path,
                           const std::map<std::string, std::string>& kv) {
    auto out = detail::open_out(path);
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

inline std::map<std::string, std::string> read_keyvalue(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("malformed key=value line: " + line);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace annsim::io
