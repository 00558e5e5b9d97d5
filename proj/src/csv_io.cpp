#include "entrywise/csv_io.hpp"

#include "entrywise/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace entrywise {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_error(std::string_view source, int line, const std::string& msg) {
  throw Error(ErrorCode::InvalidInput, fmt::format("{}:{}: {}", source, line, msg));
}

Index parse_count(std::string_view token, std::string_view source, int line) {
  long long value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end || value < 1) {
    parse_error(source, line, fmt::format("bad dimension '{}'", token));
  }
  return static_cast<Index>(value);
}

template <typename Scalar, typename ParseFn>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> parse_csv(std::istream& in,
                                                                std::string_view source,
                                                                ParseFn parse) {
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  if (!next_line()) parse_error(source, line_no + 1, "missing 'rows,cols' header");
  const auto header = split_commas(line);
  if (header.size() != 2) parse_error(source, line_no, "header must be 'rows,cols'");
  const Index rows = parse_count(header[0], source, line_no);
  const Index cols = parse_count(header[1], source, line_no);

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (!next_line()) {
      parse_error(source, line_no + 1, fmt::format("expected {} data rows, found {}", rows, i));
    }
    const auto fields = split_commas(line);
    if (static_cast<Index>(fields.size()) != cols) {
      parse_error(source, line_no,
                  fmt::format("expected {} columns, found {}", cols, fields.size()));
    }
    for (Index j = 0; j < cols; ++j) out(i, j) = parse(fields[j], source, line_no);
  }
  if (next_line()) parse_error(source, line_no, "trailing data after last row");
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
  return in;
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{:.15g}", v);
}

std::string format_complex(std::complex<double> z) {
  const std::string im = format_double(z.imag());
  const bool has_sign = im.front() == '-';
  return fmt::format("{}{}{}j", format_double(z.real()), has_sign ? "" : "+", im);
}

double round_to_15_digits(double v) {
  if (!std::isfinite(v)) return v;
  const std::string s = format_double(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

double parse_double(std::string_view token, std::string_view source, int line) {
  token = trim(token);
  double value = 0.0;
  const auto* begin = token.data();
  const auto* end = begin + token.size();
  if (begin != end && *begin == '+') {
    ++begin;
    if (begin != end && (*begin == '+' || *begin == '-')) parse_error(source, line, fmt::format("bad number '{}'", token));
  }
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || token.empty()) {
    parse_error(source, line, fmt::format("bad number '{}'", token));
  }
  if (!std::isfinite(value)) parse_error(source, line, fmt::format("non-finite value '{}'", token));
  return value;
}

std::complex<double> parse_complex(std::string_view token, std::string_view source, int line) {
  token = trim(token);
  if (token.empty() || (token.back() != 'j' && token.back() != 'i')) {
    // A bare real is accepted as a complex number with zero imaginary part.
    return {parse_double(token, source, line), 0.0};
  }
  const std::string_view body = token.substr(0, token.size() - 1);
  // The imaginary part starts at the last sign that is not an exponent sign.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string_view::npos) {
    return {0.0, parse_double(body, source, line)};
  }
  return {parse_double(body.substr(0, split), source, line),
          parse_double(body.substr(split), source, line)};
}

Matrix parse_matrix_csv(std::istream& in, std::string_view source) {
  return parse_csv<double>(in, source, parse_double);
}

ComplexMatrix parse_complex_matrix_csv(std::istream& in, std::string_view source) {
  return parse_csv<std::complex<double>>(in, source, parse_complex);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_matrix_csv(in, path.string());
}

Vector read_vector_csv(const std::filesystem::path& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() != 1) {
    throw Error(ErrorCode::InvalidInput,
                fmt::format("{}:1: expected a single-column vector, found {} columns",
                            path.string(), m.cols()));
  }
  return m.col(0);
}

ComplexMatrix read_complex_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_complex_matrix_csv(in, path.string());
}

std::string matrix_to_csv(const Matrix& a) {
  std::string out = fmt::format("{},{}\n", a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(a(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string complex_matrix_to_csv(const ComplexMatrix& a) {
  std::string out = fmt::format("{},{}\n", a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_complex(a(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::IoError, fmt::format("write failed for '{}'", path.string()));
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& a) {
  write_text_file(path, matrix_to_csv(a));
}

void write_complex_matrix_csv(const std::filesystem::path& path, const ComplexMatrix& a) {
  write_text_file(path, complex_matrix_to_csv(a));
}

}  // namespace entrywise
