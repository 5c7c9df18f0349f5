#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace riskkit {

// Column-major numeric table with a header row.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  // data[j] is column j

    size_t rows() const { return data.empty() ? 0 : data[0].size(); }

    int column_index(const std::string& name) const {
        for (size_t j = 0; j < columns.size(); ++j)
            if (columns[j] == name) return static_cast<int>(j);
        return -1;
    }

    const std::vector<double>& column(const std::string& name) const {
        int j = column_index(name);
        if (j < 0) throw std::invalid_argument("no such column: " + name);
        return data[static_cast<size_t>(j)];
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace and a trailing CR
        size_t b = cell.find_first_not_of(" \t\r");
        size_t e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace detail

// Reads a CSV with a header row, '.' decimal separator. Errors cite the
// 1-based data row and the column name.
inline Table load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    Table t;
    t.columns = detail::split_csv_line(line);
    t.data.resize(t.columns.size());
    size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != t.columns.size())
            throw std::runtime_error(path + ": row " + std::to_string(row) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(t.columns.size()));
        for (size_t j = 0; j < cells.size(); ++j) {
            double v;
            auto [p, ec] = std::from_chars(cells[j].data(), cells[j].data() + cells[j].size(), v);
            if (ec != std::errc{} || p != cells[j].data() + cells[j].size())
                throw std::runtime_error(path + ": non-numeric cell \"" + cells[j] +
                                         "\" at row " + std::to_string(row) + ", column " +
                                         t.columns[j]);
            t.data[j].push_back(v);
        }
    }
    return t;
}

// Same, but validates the header against the expected column set.
inline Table load_csv(const std::string& path, const std::vector<std::string>& expected) {
    Table t = load_csv(path);
    for (const auto& name : expected)
        if (t.column_index(name) < 0)
            throw std::runtime_error(path + ": missing column " + name);
    for (const auto& name : t.columns)
        if (std::find(expected.begin(), expected.end(), name) == expected.end())
            throw std::runtime_error(path + ": unexpected column " + name);
    return t;
}

inline void save_csv(const Table& t, std::ostream& out) {
    for (size_t j = 0; j < t.columns.size(); ++j)
        out << (j ? "," : "") << t.columns[j];
    out << "\n";
    out.precision(17);
    for (size_t i = 0; i < t.rows(); ++i) {
        for (size_t j = 0; j < t.columns.size(); ++j)
            out << (j ? "," : "") << t.data[j][i];
        out << "\n";
    }
}

inline void save_csv(const Table& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    save_csv(t, out);
}

}  // namespace riskkit
