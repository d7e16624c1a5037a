#include "qobs/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/core.h>

namespace qobs {
namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

double parse_double(const std::string& text, std::size_t line_no) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw std::runtime_error(fmt::format("csv line {}: '{}' is not a number", line_no, text));
    }
    return value;
}

int parse_int(const std::string& text, std::size_t line_no) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
        throw std::runtime_error(fmt::format("csv line {}: '{}' is not a dimension", line_no, text));
    }
    return value;
}

void write_row(std::ostream& out, const auto& values) {
    bool first = true;
    for (double v : values) {
        if (!first) {
            out << ',';
        }
        out << format_double(v);
        first = false;
    }
    out << '\n';
}

}  // namespace

std::string format_double(double value) {
    return fmt::format("{:.17g}", value);
}

void write_matrix_bundle(std::ostream& out, const std::vector<NamedMatrix>& matrices) {
    for (const auto& [name, m] : matrices) {
        out << "matrix," << name << ',' << m.rows() << ',' << m.cols() << '\n';
        for (Eigen::Index i = 0; i < m.rows() && m.cols() > 0; ++i) {
            std::vector<double> row(static_cast<std::size_t>(m.cols()));
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                row[static_cast<std::size_t>(j)] = m(i, j);
            }
            write_row(out, row);
        }
    }
}

std::vector<NamedMatrix> read_matrix_bundle(std::istream& in) {
    std::vector<NamedMatrix> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) {
            continue;
        }
        const auto head = split(line);
        if (head.size() != 4 || head[0] != "matrix") {
            throw std::runtime_error(fmt::format("csv line {}: expected 'matrix,<name>,<rows>,<cols>'", line_no));
        }
        NamedMatrix nm{head[1], Matrix(parse_int(head[2], line_no), parse_int(head[3], line_no))};
        for (Eigen::Index i = 0; i < nm.value.rows() && nm.value.cols() > 0; ++i) {
            if (!std::getline(in, line)) {
                throw std::runtime_error(fmt::format("csv: matrix '{}' is truncated", nm.name));
            }
            ++line_no;
            const auto cells = split(strip_cr(line));
            if (static_cast<Eigen::Index>(cells.size()) != nm.value.cols()) {
                throw std::runtime_error(
                    fmt::format("csv line {}: expected {} values, got {}", line_no, nm.value.cols(), cells.size()));
            }
            for (Eigen::Index j = 0; j < nm.value.cols(); ++j) {
                nm.value(i, j) = parse_double(cells[static_cast<std::size_t>(j)], line_no);
            }
        }
        out.push_back(std::move(nm));
    }
    return out;
}

std::vector<std::string> coefficient_header(char stream, Eigen::Index outputs, Eigen::Index vars) {
    std::vector<std::string> header{"t"};
    for (Eigen::Index i = 0; i < outputs; ++i) {
        for (Eigen::Index j = 0; j < vars; ++j) {
            header.push_back(fmt::format("z{}_{}_x{}", stream, i + 1, j + 1));
        }
    }
    return header;
}

void write_coefficient_csv(std::ostream& out, char stream, const std::vector<double>& times,
                           const std::vector<Matrix>& coeffs) {
    if (times.size() != coeffs.size()) {
        throw std::invalid_argument("times and coefficients differ in length");
    }
    const Eigen::Index rows = coeffs.empty() ? 0 : coeffs.front().rows();
    const Eigen::Index cols = coeffs.empty() ? 0 : coeffs.front().cols();
    const auto header = coefficient_header(stream, rows, cols);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << '\n';
    std::vector<double> row;
    for (std::size_t k = 0; k < times.size(); ++k) {
        row.clear();
        row.push_back(times[k]);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                row.push_back(coeffs[k](i, j));
            }
        }
        write_row(out, row);
    }
}

void write_coefficient_csv(const std::filesystem::path& path, char stream, const std::vector<double>& times,
                           const std::vector<Matrix>& coeffs) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    }
    write_coefficient_csv(out, stream, times, coeffs);
}

CoefficientTable read_coefficient_csv(std::istream& in) {
    CoefficientTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("csv: missing header");
    }
    table.header = split(strip_cr(line));
    if (table.header.empty() || table.header.front() != "t") {
        throw std::runtime_error("csv: first column must be 't'");
    }
    // Last column name z?_<rows>_x<cols> fixes the coefficient shape.
    int rows = 0;
    int cols = 0;
    if (table.header.size() > 1) {
        const std::string& last = table.header.back();
        const auto us = last.find('_');
        const auto ux = last.find("_x", us + 1);
        if (last.size() < 2 || last[0] != 'z' || us == std::string::npos || ux == std::string::npos) {
            throw std::runtime_error(fmt::format("csv: unexpected column name '{}'", last));
        }
        rows = parse_int(last.substr(us + 1, ux - us - 1), 1);
        cols = parse_int(last.substr(ux + 2), 1);
    }
    if (static_cast<std::size_t>(rows * cols) + 1 != table.header.size()) {
        throw std::runtime_error("csv: header does not describe a full coefficient matrix");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != table.header.size()) {
            throw std::runtime_error(
                fmt::format("csv line {}: expected {} values, got {}", line_no, table.header.size(), cells.size()));
        }
        table.times.push_back(parse_double(cells[0], line_no));
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                m(i, j) = parse_double(cells[1 + static_cast<std::size_t>(i * cols + j)], line_no);
            }
        }
        table.coeffs.push_back(std::move(m));
    }
    return table;
}

}  // namespace qobs
