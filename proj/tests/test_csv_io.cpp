#include "entrywise/csv_io.hpp"
#include "entrywise/errors.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <clocale>
#include <filesystem>
#include <sstream>

using namespace entrywise;
using namespace entrywise::testing;

namespace {

std::string error_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("format_double uses 15 significant digits") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0) == "0.333333333333333");
  CHECK(format_double(-2.5e-20) == "-2.5e-20");
  CHECK(format_double(123456789012345678.0) == "1.23456789012346e+17");
  CHECK(round_to_15_digits(1.0 / 3.0) == 0.333333333333333);
}

TEST_CASE("formatting ignores the C locale") {
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") != nullptr) {
    CHECK(format_double(1.5) == "1.5");
    CHECK(parse_double("1.5", "t", 1) == 1.5);
  }
  std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST_CASE("parse_double accepts decimal scalars only") {
  CHECK(parse_double("1.5", "t", 1) == 1.5);
  CHECK(parse_double("+2", "t", 1) == 2.0);
  CHECK(parse_double(" -3e-2 ", "t", 1) == -0.03);
  for (const char* bad : {"", "abc", "1.5x", "nan", "inf", "+-1", "1,5"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_double(bad, "t", 1), Error);
  }
}

TEST_CASE("parse_complex handles signs and exponents") {
  using cd = std::complex<double>;
  CHECK(parse_complex("1+2j", "t", 1) == cd(1, 2));
  CHECK(parse_complex("1-2j", "t", 1) == cd(1, -2));
  CHECK(parse_complex("-1.5e-3+2e+4j", "t", 1) == cd(-1.5e-3, 2e4));
  CHECK(parse_complex("3", "t", 1) == cd(3, 0));
  CHECK(parse_complex("-2j", "t", 1) == cd(0, -2));
  CHECK_THROWS_AS(parse_complex("1+j", "t", 1), Error);
  const cd z(0.1, -1.0 / 3.0);
  CHECK(format_complex(z) == "0.1-0.333333333333333j");
  CHECK(parse_complex(format_complex(z), "t", 1) == cd(0.1, round_to_15_digits(-1.0 / 3.0)));
}

TEST_CASE("matrix CSV round trip") {
  Rng rng(3);
  const Matrix a = gaussian_matrix(4, 3, rng);
  std::istringstream in(matrix_to_csv(a));
  const Matrix back = parse_matrix_csv(in, "mem");
  CHECK((back - a).cwiseAbs().maxCoeff() <= 1e-14 * a.cwiseAbs().maxCoeff());
  // Already-rounded values round-trip bit for bit.
  std::istringstream again(matrix_to_csv(back));
  CHECK(parse_matrix_csv(again, "mem") == back);

  ComplexMatrix c(2, 2);
  c << std::complex<double>(1, -1), 2, std::complex<double>(0, 0.5), -3;
  std::istringstream cin(complex_matrix_to_csv(c));
  CHECK(parse_complex_matrix_csv(cin, "mem") == c);
}

TEST_CASE("parse errors name the source and line") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_matrix_csv(in, "A.csv");
  };
  CHECK(error_message([&] { parse("2,2\n1,2\n3,x\n"); }) == "InvalidInput: A.csv:3: bad number 'x'");
  CHECK(error_message([&] { parse("2,2\n1,2\n3\n"); }).find("A.csv:3: expected 2 columns") != std::string::npos);
  CHECK(error_message([&] { parse("2,2\n1,2\n"); }).find("A.csv:3: expected 2 data rows") != std::string::npos);
  CHECK(error_message([&] { parse("2\n"); }).find("A.csv:1: header") != std::string::npos);
  CHECK(error_message([&] { parse("1,1\n1\n2\n"); }).find("trailing data") != std::string::npos);
  CHECK(error_message([&] { parse(""); }).find("missing") != std::string::npos);
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "entrywise_csv_test";
  std::filesystem::create_directories(dir);
  const Vector v = Vector::LinSpaced(3, 0.0, 1.0);
  write_matrix_csv(dir / "v.csv", v);
  CHECK(read_vector_csv(dir / "v.csv") == v);
  write_matrix_csv(dir / "m.csv", Matrix::Ones(2, 2));
  CHECK_THROWS_AS(read_vector_csv(dir / "m.csv"), Error);
  CHECK_THROWS_AS(read_matrix_csv(dir / "missing.csv"), Error);
  std::filesystem::remove_all(dir);
}
