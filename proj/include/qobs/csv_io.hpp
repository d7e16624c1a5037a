#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qobs/core_model.hpp"

namespace qobs {

// Shortest text that reads back to the same double (17 significant digits).
[[nodiscard]] std::string format_double(double value);

struct NamedMatrix {
    std::string name;
    Matrix value;
};

// Several matrices in one CSV file. Each block is a header line
// "matrix,<name>,<rows>,<cols>" followed by <rows> comma-separated lines
// (none when <cols> is 0).
void write_matrix_bundle(std::ostream& out, const std::vector<NamedMatrix>& matrices);
[[nodiscard]] std::vector<NamedMatrix> read_matrix_bundle(std::istream& in);

// Coefficient trajectories: column "t" then one column per coefficient
// z<stream>_<output>_x<initial variable>, indices starting at 1.
[[nodiscard]] std::vector<std::string> coefficient_header(char stream, Eigen::Index outputs, Eigen::Index vars);

void write_coefficient_csv(std::ostream& out, char stream, const std::vector<double>& times,
                           const std::vector<Matrix>& coeffs);
void write_coefficient_csv(const std::filesystem::path& path, char stream, const std::vector<double>& times,
                           const std::vector<Matrix>& coeffs);

struct CoefficientTable {
    std::vector<std::string> header;
    std::vector<double> times;
    std::vector<Matrix> coeffs;
};

// Reads a file produced by write_coefficient_csv; shapes come from the header.
[[nodiscard]] CoefficientTable read_coefficient_csv(std::istream& in);

}  // namespace qobs
