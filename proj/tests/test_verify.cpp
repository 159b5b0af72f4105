#include "lowrank/verify.hpp"

#include "lowrank/common.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace lowrank;

namespace {

std::vector<int> range_vec(int n) {
  std::vector<int> v((std::size_t)n);
  for (int i = 0; i < n; ++i) v[(std::size_t)i] = i;
  return v;
}

} // namespace

TEST_SUITE_BEGIN("verify");

TEST_CASE("noise bound on the uniform 10x10 block") {
  const Matrix p = Matrix::Constant(10, 10, 0.01);
  const auto rep = verify_noise_bound(p, range_vec(10), range_vec(10), 2.0, 10.0, 10000, 500, 1);
  CHECK(rep.trials == 500);
  CHECK(rep.lemma_probability == doctest::Approx(0.2));
  CHECK(rep.violation_fraction() <= rep.lemma_probability + rep.slack);
  CHECK_FALSE(rep.flagged);
}

TEST_CASE("noise bound: a block inside the zero region never violates") {
  Matrix p = Matrix::Zero(10, 10);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 10; ++j) p(i, j) = 1.0 / 50.0;
  std::vector<int> rows = {5, 6, 7, 8, 9}, cols = {0, 1, 2, 3};
  const auto rep = verify_noise_bound(p, rows, cols, 2.0, 10.0, 1000, 100, 2);
  CHECK(rep.violations == 0);
  for (double obs : rep.observed) CHECK(obs == 0.0);
}

TEST_CASE("noise bound: observed norm shrinks like 1/sqrt(n)") {
  const Matrix p = Matrix::Constant(10, 10, 0.01);
  const auto small = verify_noise_bound(p, range_vec(10), range_vec(10), 2.0, 10.0, 1000, 200, 3);
  const auto large =
      verify_noise_bound(p, range_vec(10), range_vec(10), 2.0, 10.0, 10000, 200, 3);
  double mean_small = 0.0, mean_large = 0.0;
  for (double o : small.observed) mean_small += std::sqrt(o);
  for (double o : large.observed) mean_large += std::sqrt(o);
  const double ratio = mean_small / mean_large;
  CHECK(ratio >= 2.2);
  CHECK(ratio <= 4.5);
}

TEST_CASE("noise bound input validation") {
  const Matrix p = Matrix::Constant(2, 2, 0.25);
  CHECK_THROWS_AS(verify_noise_bound(p, {}, {0}, 2.0, 10.0, 100, 10, 1), InvalidInput);
  CHECK_THROWS_AS(verify_noise_bound(p, {0}, {0}, 0.5, 10.0, 100, 10, 1), InvalidInput);
}

TEST_CASE("row concentration: full-mass row is always retained") {
  Matrix p(1, 4);
  p << 0.25, 0.25, 0.25, 0.25;
  const auto rep = verify_row_concentration(p, 2.0, 10.0, 1000, 50, 4);
  CHECK(rep.violations == 0);
  for (double o : rep.observed) CHECK(o == 4.0);  // Z/n = 1 against lambda/4 = 1/4
}

TEST_CASE("row concentration: rows at the threshold stay within the lemma slack") {
  // rows of mass exactly 1/rows with rows = floor(1 / (14 alpha log(N) / n))
  const double alpha = 2.0, N = 10.0;
  const long long n = 10000;
  const double threshold = 14.0 * alpha * std::log(N) / (double)n;
  const int rows = (int)std::floor(1.0 / threshold);
  const Matrix p = Matrix::Constant(rows, 4, 1.0 / (double)(rows * 4));
  const auto rep = verify_row_concentration(p, alpha, N, n, 500, 5);
  CHECK(rep.trials == 500);
  CHECK_FALSE(rep.flagged);
}

TEST_CASE("row concentration: sub-threshold rows are excluded from the event") {
  Matrix p(3, 2);
  // row masses: 0.998, 0.001, 0.001 with threshold ~ 0.0064 at n = 10^4
  p << 0.499, 0.499, 0.0005, 0.0005, 0.0005, 0.0005;
  const auto rep = verify_row_concentration(p, 2.0, 10.0, 10000, 20, 6);
  CHECK(rep.lemma_probability == doctest::Approx(2.0 / 100.0));  // one qualifying row
  CHECK(rep.violations == 0);
}

TEST_CASE("poisson tails at lambda = 100") {
  const auto rep = verify_poisson_tails(100.0, {1.0, 25.0, 50.0, 75.0}, 100000, 7);
  CHECK(rep.trials == 8);  // two tails per grid point
  CHECK(rep.violations == 0);
  CHECK_FALSE(rep.flagged);
  // x -> 0+ makes the bound approach 1, trivially satisfied
  CHECK(rep.bounds[0] >= 0.99);
  CHECK(rep.observed[0] <= rep.bounds[0]);
  // the x = 50 lower-tail bound is exp(-50 - 50 log(1/2)) ~ 2.2e-7 plus slack
  const double bound_50 = std::exp(-50.0 - 50.0 * std::log(0.5));
  const double slack_50 = 3.0 * std::sqrt(bound_50 * (1.0 - bound_50) / 100000.0);
  CHECK(rep.bounds[4] == doctest::Approx(bound_50 + slack_50).epsilon(1e-12));
  CHECK(rep.observed[4] <= rep.bounds[4]);
  CHECK_THROWS_AS(verify_poisson_tails(100.0, {150.0}, 100, 7), InvalidInput);
}

TEST_CASE("histogram deviation: single bin never deviates") {
  const auto rep = verify_histogram_deviation(1, 1000, 0.05, 50, 8);
  CHECK(rep.violations == 0);
  for (double o : rep.observed) CHECK(o == 0.0);
}

TEST_CASE("histogram deviation at the reference parameters") {
  const auto rep = verify_histogram_deviation(20, 10000, 0.05, 1000, 9);
  CHECK(rep.trials == 1000);
  CHECK(rep.violation_fraction() <= 0.05 + rep.slack);
  CHECK_FALSE(rep.flagged);
}

TEST_CASE("histogram deviation: doubling m shrinks the mean deviation by sqrt(2)") {
  const auto a = verify_histogram_deviation(20, 5000, 0.05, 400, 10);
  const auto b = verify_histogram_deviation(20, 10000, 0.05, 400, 10);
  double mean_a = 0.0, mean_b = 0.0;
  for (double o : a.observed) mean_a += o;
  for (double o : b.observed) mean_b += o;
  const double ratio = mean_a / mean_b;
  CHECK(ratio >= 1.25);
  CHECK(ratio <= 1.60);
}

TEST_CASE("verifier reports are deterministic per seed and export CSV") {
  const Matrix p = Matrix::Constant(4, 4, 1.0 / 16.0);
  const auto a = verify_noise_bound(p, range_vec(4), range_vec(4), 2.0, 10.0, 500, 50, 11);
  const auto b = verify_noise_bound(p, range_vec(4), range_vec(4), 2.0, 10.0, 500, 50, 11);
  CHECK(a.observed == b.observed);

  std::stringstream ss;
  write_report_csv(ss, a);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "trial,observed,bound,violated");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 50);
}

TEST_SUITE_END();
