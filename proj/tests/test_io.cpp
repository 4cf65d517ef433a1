#include <doctest.h>

#include <random>

#include "mdual/errors.hpp"
#include "mdual/io.hpp"
#include "mdual/lattices.hpp"
#include "mdual/poset.hpp"

using namespace mdual;

namespace {

RationalMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_int_distribution<long> num(-1000000, 1000000), den(1, 97);
  RationalMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = Rational(num(rng), den(rng));
      m(r, c).canonicalize();
    }
  return m;
}

}  // namespace

TEST_CASE("JSON layout") {
  RationalMatrix m(1, 2);
  m(0, 0) = Rational(1, 4);
  m(0, 1) = -3;
  const auto text = to_json(with_index_labels(m));
  CHECK(text.find("\"1/4\"") != std::string::npos);
  CHECK(text.find("\"-3/1\"") != std::string::npos);
  CHECK(text.find("\"row_labels\"") != std::string::npos);
}

TEST_CASE("JSON and CSV round trips are lossless") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const auto m = random_matrix(rng, 1 + trial % 5, 1 + trial % 4);
    LabeledMatrix lm = with_index_labels(m);
    lm.row_labels[0] = "{1 2}, \"quoted\"";
    const auto j = matrix_from_json(to_json(lm));
    CHECK(j.matrix == m);
    CHECK(j.row_labels == lm.row_labels);
    CHECK(j.col_labels == lm.col_labels);
    const auto c = matrix_from_csv(to_csv(lm));
    CHECK(c.matrix == m);
    CHECK(c.row_labels == lm.row_labels);
    CHECK(c.col_labels == lm.col_labels);
  }
  const auto lat = partition_lattice(3);
  const auto zp = moebius_matrix(lat.poset());
  const auto labelled = with_labels(zp.moebius, lat.poset().labels());
  CHECK(matrix_from_json(to_json(labelled)).matrix == zp.moebius);
  CHECK(matrix_from_csv(to_csv(labelled)).row_labels == lat.poset().labels());
}

TEST_CASE("JSON input rules") {
  const auto ints = matrix_from_json(R"({"entries": [[1, 0], ["1/2", "1/2"]]})");
  CHECK(ints.matrix(0, 0) == 1);
  CHECK(ints.matrix(1, 1) == Rational(1, 2));
  CHECK(ints.row_labels == std::vector<std::string>{"0", "1"});

  CHECK_THROWS_AS(matrix_from_json(R"({"entries": [[0.5, 0.5]]})"), ParseError);
  CHECK_THROWS_AS(matrix_from_json(R"({"entries": [["0.5", "1/2"]]})"), ParseError);
  CHECK_THROWS_AS(matrix_from_json(R"({"entries": [["1/2"], ["1/2", "0"]]})"), ParseError);
  CHECK_THROWS_AS(matrix_from_json(R"({"rows": 3, "entries": [["1"]]})"), ParseError);
  CHECK_THROWS_AS(matrix_from_json(R"([1, 2])"), ParseError);
  CHECK_THROWS_AS(matrix_from_json("{not json"), ParseError);
}

TEST_CASE("CSV input rules") {
  const auto m = matrix_from_csv(",a,b\na,1/3,2/3\nb,0,1\n");
  CHECK(m.matrix(0, 1) == Rational(2, 3));
  CHECK(m.col_labels == std::vector<std::string>{"a", "b"});
  CHECK_THROWS_AS(matrix_from_csv(",a,b\na,0.3,0.7\nb,0,1\n"), ParseError);
  CHECK_THROWS_AS(matrix_from_csv(",a,b\na,1/3\n"), ParseError);
}

TEST_CASE("pretty printing drops unit denominators") {
  RationalMatrix m(2, 2);
  m(0, 0) = 1;
  m(0, 1) = Rational(-1, 2);
  m(1, 1) = 12;
  const auto text = to_pretty(with_labels(m, {"x", "y"}));
  CHECK(text.find("-1/2") != std::string::npos);
  CHECK(text.find("12") != std::string::npos);
  CHECK(text.find("/1 ") == std::string::npos);
  CHECK(text.find("/1\n") == std::string::npos);
}

TEST_CASE("label count must match") {
  CHECK_THROWS_AS(with_labels(RationalMatrix::identity(2), {"a"}), DimensionMismatch);
  CHECK_THROWS_AS(read_file("/nonexistent/kernel.json"), ParseError);
}
