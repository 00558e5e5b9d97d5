#pragma once

#include "entrywise/linalg.hpp"

#include <complex>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

namespace entrywise {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Matrix CSV layout: a `rows,cols` header line, then one matrix row per line.
// Real entries are decimal scalars; complex entries are `re+imj` tokens.
// Parse errors name the source and the 1-based line number.

std::string format_double(double v);                  // 15 significant digits
std::string format_complex(std::complex<double> z);   // "re+imj"
double round_to_15_digits(double v);

double parse_double(std::string_view token, std::string_view source, int line);
std::complex<double> parse_complex(std::string_view token, std::string_view source, int line);

Matrix parse_matrix_csv(std::istream& in, std::string_view source);
ComplexMatrix parse_complex_matrix_csv(std::istream& in, std::string_view source);

Matrix read_matrix_csv(const std::filesystem::path& path);
Vector read_vector_csv(const std::filesystem::path& path);
ComplexMatrix read_complex_matrix_csv(const std::filesystem::path& path);

std::string matrix_to_csv(const Matrix& a);
std::string complex_matrix_to_csv(const ComplexMatrix& a);

void write_text_file(const std::filesystem::path& path, std::string_view contents);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& a);
void write_complex_matrix_csv(const std::filesystem::path& path, const ComplexMatrix& a);

}  // namespace entrywise
