#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "paw/errors.hpp"

namespace paw {

/// Shortest round-trip decimal representation; stable across runs.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

/// CSV file with a provenance comment line followed by a header row.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& config_hash, std::uint64_t seed,
              const std::string& header) {
        out_.open(path);
        if (!out_) throw ConfigError("cannot open output file: " + path);
        out_ << "# config_hash=" << config_hash << " seed=" << seed << "\n";
        out_ << header << "\n";
    }

    template <typename... Cols>
    void row(const Cols&... cols) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, write_col(cols)), ...);
        out_ << "\n";
    }

private:
    void write_col(double v) { out_ << format_number(v); }
    void write_col(float v) { out_ << format_number(v); }
    void write_col(const std::string& s) { out_ << s; }
    void write_col(const char* s) { out_ << s; }
    template <typename T>
    void write_col(T v) {
        out_ << v;  // integral types
    }

    std::ofstream out_;
};

}  // namespace paw
