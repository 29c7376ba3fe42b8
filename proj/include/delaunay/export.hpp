#pragma once

// =============================================================================
// CSV/JSON emission helpers shared by the CLI: deterministic number
// formatting, a canonical config hash embedded in every artifact, atomic-ish
// whole-file writes.
// =============================================================================

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "delaunay/numerics.hpp"

namespace delaunay {

/// Shortest round-trip representation; deterministic for a fixed binary.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// FNV-1a over the canonical config serialization.
[[nodiscard]] inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct CsvTable {
    std::vector<std::string> comments;  ///< emitted as leading "# ..." lines
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ostringstream out;
    for (const auto& c : table.comments) out << "# " << c << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << table.columns[i] << (i + 1 < table.columns.size() ? "," : "\n");
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << format_double(row[i]) << (i + 1 < row.size() ? "," : "\n");
    }
    std::ofstream f(path);
    if (!f) throw error("write_csv: cannot open " + path.string());
    f << out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw error("write_text: cannot open " + path.string());
    f << content;
}

}  // namespace delaunay
