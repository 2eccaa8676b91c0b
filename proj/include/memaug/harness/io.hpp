#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "memaug/errors.hpp"
#include "memaug/harness/stats.hpp"

namespace memaug::harness {

/// Shortest text that parses back to the same double.
inline std::string format_number(double x) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers see either the old file or the complete new one.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    static std::atomic<unsigned long> counter{0};
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const auto tmp = path.string() + ".tmp" + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline std::string run_csv(const RunRecord& record) {
    std::string s = "step,metric\n";
    for (const auto& m : record.samples) s += std::to_string(m.step) + "," + format_number(m.value) + "\n";
    return s;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string s = "step,median,half_std,n_seeds\n";
    for (const auto& r : rows)
        s += std::to_string(r.step) + "," + format_number(r.median) + "," + format_number(r.half_std) + "," +
             std::to_string(r.n_seeds) + "\n";
    return s;
}

/// Parses a CSV with a header row into its header and numeric cells. Empty
/// cells read as NaN.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return cells;
    };
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& cell : split(line)) row.push_back(cell.empty() ? std::nan("") : std::stod(cell));
        if (row.size() != t.header.size()) throw std::runtime_error(path.string() + ": ragged row");
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace memaug::harness
