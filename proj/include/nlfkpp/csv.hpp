#pragma once
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlfkpp {

// CSV with a header row, comma separator, '.' decimal point and 17
// significant digits, so payloads are byte-reproducible and round-trip
// doubles exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline void write_csv(const std::string& path, const CsvTable& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    for (size_t c = 0; c < t.header.size(); ++c) os << (c ? "," : "") << t.header[c];
    os << "\n";
    for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
        os << "\n";
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty csv: " + path);
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// Run manifest: flat key=value lines, '#' comments. The timestamp is the
// only non-deterministic entry.
inline void write_manifest(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& entries,
                           bool with_timestamp = true) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    if (with_timestamp) {
        std::time_t now = std::time(nullptr);
        char buf[64];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        os << "# generated " << buf << "\n";
    }
    for (const auto& [k, v] : entries) os << k << "=" << v << "\n";
}

}  // namespace nlfkpp
