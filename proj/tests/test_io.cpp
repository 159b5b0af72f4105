#include "lowrank/io.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace lowrank;

TEST_SUITE_BEGIN("io");

TEST_CASE("matrix round trip is exact") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  Matrix m(3, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) m(i, j) = dist(rng);
  m(0, 0) = 1.0 / 3.0;
  m(1, 2) = 1e-17;
  m(2, 4) = 0.0;
  std::stringstream ss;
  write_matrix(ss, m);
  const Matrix back = read_matrix(ss);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 5);
  CHECK((back.array() == m.array()).all());
}

TEST_CASE("matrix parse errors carry line and column") {
  {
    std::stringstream ss("2\n1 2\n3 4\n");
    CHECK_THROWS_AS(read_matrix(ss), ParseError);
  }
  {
    std::stringstream ss("2 2\n1 2\n3\n");
    try {
      read_matrix(ss);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 3);
    }
  }
  {
    std::stringstream ss("2 2\n1 x\n3 4\n");
    try {
      read_matrix(ss);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 2);
      CHECK(e.column == 2);
    }
  }
  {
    std::stringstream ss("2 2\n1 2\n");
    CHECK_THROWS_AS(read_matrix(ss), ParseError);
  }
  {
    std::stringstream ss("0 2\n");
    CHECK_THROWS_AS(read_matrix(ss), ParseError);
  }
}

TEST_CASE("sample round trip") {
  Sample2D pts = {{0.1, 0.9}, {1.0 / 7.0, 0.0}, {1.0, 1.0}};
  std::stringstream ss;
  write_sample(ss, pts);
  const Sample2D back = read_sample(ss);
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(back[i].first == pts[i].first);
    CHECK(back[i].second == pts[i].second);
  }
}

TEST_CASE("sample parse rejects bad lines") {
  std::stringstream ss("0.1 0.2\n0.3\n");
  CHECK_THROWS_AS(read_sample(ss), ParseError);
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int k = 0; k < 200; ++k) {
    const double x = dist(rng);
    CHECK(std::stod(format_double(x)) == x);
  }
  for (double x : {0.0, 1.0 / 3.0, 1e-300, 6.02e23, -0.0}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_SUITE_END();
