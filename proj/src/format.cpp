#include "trendpu/format.hpp"

#include <array>
#include <charconv>

#include "trendpu/error.hpp"

namespace trendpu {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void parse_failure(std::string_view what, std::string_view text, std::size_t line_no) {
    fail(ErrorKind::Parse,
         "line " + std::to_string(line_no) + ": expected " + std::string(what) + ", got '" + std::string(text) + "'");
}

}  // namespace

std::string format_real(double value) {
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) fail(ErrorKind::Io, "format_real: conversion failed");
    return std::string(buf.data(), end);
}

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_real(std::string_view text, std::size_t line_no) {
    const auto t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) parse_failure("a number", text, line_no);
    return value;
}

std::int64_t parse_int(std::string_view text, std::size_t line_no) {
    const auto t = trim(text);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) parse_failure("an integer", text, line_no);
    return value;
}

std::size_t parse_size(std::string_view text, std::size_t line_no) {
    const auto v = parse_int(text, line_no);
    if (v < 0) parse_failure("a non-negative integer", text, line_no);
    return static_cast<std::size_t>(v);
}

}  // namespace trendpu
