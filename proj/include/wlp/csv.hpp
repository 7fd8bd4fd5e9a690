#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace wlp {

/// Shortest round-trip decimal representation ('.' separator, locale free).
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
    return std::string(buf, res.ptr);
}

inline std::string format_number(long long v) { return std::to_string(v); }
inline std::string format_number(std::size_t v) { return std::to_string(v); }
inline std::string format_number(int v) { return std::to_string(v); }

/// RFC-4180 writer with LF line endings.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(std::initializer_list<std::string_view> cols) {
        bool first = true;
        for (auto c : cols) {
            if (!first) os_ << ',';
            field(c);
            first = false;
        }
        os_ << '\n';
    }

    CsvWriter& cell(double v) { return raw(format_number(v)); }
    CsvWriter& cell(long long v) { return raw(format_number(v)); }
    CsvWriter& cell(std::size_t v) { return raw(format_number(v)); }
    CsvWriter& cell(int v) { return raw(format_number(v)); }
    CsvWriter& cell(std::string_view s) {
        sep();
        field(s);
        return *this;
    }
    void end_row() {
        os_ << '\n';
        fresh_ = true;
    }

private:
    CsvWriter& raw(const std::string& s) {
        sep();
        os_ << s;
        return *this;
    }
    void sep() {
        if (!fresh_) os_ << ',';
        fresh_ = false;
    }
    void field(std::string_view s) {
        if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
            os_ << s;
            return;
        }
        os_ << '"';
        for (char ch : s) {
            if (ch == '"') os_ << '"';
            os_ << ch;
        }
        os_ << '"';
    }

    std::ostream& os_;
    bool fresh_ = true;
};

inline std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    return f;
}

}  // namespace wlp
