#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iscreen/core.hpp"
#include "iscreen/errors.hpp"

namespace iscreen {

struct CsvOptions {
    std::optional<std::string> response_column; // by name; default: last column
    bool has_header = true;
    char delimiter = ',';
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_cell(const std::string& raw, long line, long col) {
    const std::string cell = trim(raw);
    if (cell.empty()) throw NonNumericCell(line, col, raw);
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + cell.size()) throw NonNumericCell(line, col, cell);
    if (!std::isfinite(v)) throw NonNumericCell(line, col, cell);
    return v;
}

} // namespace detail

/// Parse a numeric CSV into a Dataset, extracting the response column by name
/// (or the last column) and keeping the rest as predictors. CR/LF and LF line
/// endings are treated identically.
inline Dataset load_csv(const std::string& path, const CsvOptions& options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        lines.push_back(line);
    }
    if (lines.empty()) throw EmptyFile();

    std::size_t row0 = 0;
    std::vector<std::string> header;
    if (options.has_header) {
        header = detail::split_line(lines[0], options.delimiter);
        for (auto& h : header) h = detail::trim(h);
        row0 = 1;
        if (lines.size() == row0) throw EmptyFile();
    }

    const std::size_t width = detail::split_line(lines[row0], options.delimiter).size();
    if (width < 2)
        throw ParseError(static_cast<long>(row0 + 1), 1,
                         "need at least two columns (predictors and response)");
    if (options.has_header && header.size() != width)
        throw ParseError(1, 1, "header width does not match data width");

    std::size_t response_idx = width - 1;
    if (options.response_column) {
        if (!options.has_header) throw ResponseColumnMissing(*options.response_column);
        bool found = false;
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == *options.response_column) {
                response_idx = j;
                found = true;
                break;
            }
        }
        if (!found) throw ResponseColumnMissing(*options.response_column);
    }

    const std::size_t n = lines.size() - row0;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width - 1));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const long file_line = static_cast<long>(row0 + r + 1);
        const auto cells = detail::split_line(lines[row0 + r], options.delimiter);
        if (cells.size() != width)
            throw ParseError(file_line, static_cast<long>(cells.size()),
                             "row has " + std::to_string(cells.size()) +
                                 " cells, expected " + std::to_string(width));
        Eigen::Index xc = 0;
        for (std::size_t c = 0; c < width; ++c) {
            const double v = detail::parse_cell(cells[c], file_line, static_cast<long>(c + 1));
            if (c == response_idx)
                y[static_cast<Eigen::Index>(r)] = v;
            else
                x(static_cast<Eigen::Index>(r), xc++) = v;
        }
    }

    std::vector<std::string> names;
    if (options.has_header) {
        for (std::size_t j = 0; j < width; ++j)
            if (j != response_idx) names.push_back(header[j]);
    }
    return Dataset(std::move(x), std::move(y), std::move(names));
}

/// Write a Dataset back to CSV (predictors then response), 17 significant
/// digits so a reload reproduces the numbers bit-exactly.
inline void save_csv(const Dataset& data, const std::string& path,
                     const std::string& response_name = "y") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    out.precision(17);
    for (int j = 0; j < data.p(); ++j) {
        const std::string name = data.column_names.empty()
                                     ? "x" + std::to_string(j)
                                     : data.column_names[static_cast<std::size_t>(j)];
        out << name << ",";
    }
    out << response_name << "\n";
    for (int i = 0; i < data.n(); ++i) {
        for (int j = 0; j < data.p(); ++j) out << data.x(i, j) << ",";
        out << data.y[i] << "\n";
    }
}

} // namespace iscreen
