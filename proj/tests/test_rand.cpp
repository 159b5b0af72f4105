#include "lowrank/rand.hpp"

#include "lowrank/linalg.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace lowrank;

TEST_SUITE_BEGIN("rand");

TEST_CASE("multinomial: degenerate mass goes to one cell") {
  Matrix p = Matrix::Zero(2, 2);
  p(0, 0) = 1.0;
  Rng rng = make_rng(3);
  const Matrix c = sample_multinomial(p, 7, rng);
  CHECK(c(0, 0) == 7.0);
  CHECK(c.sum() == 7.0);
}

TEST_CASE("multinomial: totals always match n") {
  Rng outer = make_rng(10);
  for (int rep = 0; rep < 20; ++rep) {
    Rng rng = make_rng(outer());
    const Matrix p = low_rank_dirichlet_matrix(5, 2, 1.0, rng);
    const Matrix c = sample_multinomial(p, 137, rng);
    CHECK(c.sum() == 137.0);
    CHECK((c.array() >= 0.0).all());
  }
}

TEST_CASE("multinomial: cells concentrate at n/4 on the uniform 2x2") {
  const Matrix p = Matrix::Constant(2, 2, 0.25);
  const long long n = 1000000;
  const double radius = 4.0 * std::sqrt((double)n * 0.25 * 0.75);
  int ok = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng = make_rng((std::uint64_t)seed);
    const Matrix c = sample_multinomial(p, n, rng);
    bool inside = true;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        if (std::abs(c(i, j) - 250000.0) > radius) inside = false;
    ok += inside ? 1 : 0;
  }
  CHECK(ok >= 99);
}

TEST_CASE("multinomial: seed determinism and n=0 rejection") {
  const Matrix p = Matrix::Constant(2, 2, 0.25);
  Rng a = make_rng(5), b = make_rng(5);
  CHECK((sample_multinomial(p, 100, a).array() == sample_multinomial(p, 100, b).array()).all());
  Rng c = make_rng(5);
  CHECK_THROWS_AS(sample_multinomial(p, 0, c), InvalidInput);
}

TEST_CASE("poissonized: zero cells stay zero and means match") {
  Matrix p(2, 2);
  p << 0.5, 0.5, 0.0, 0.0;
  Rng rng = make_rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix c = sample_poissonized(p, 100.0, rng);
    CHECK(c(1, 0) == 0.0);
    CHECK(c(1, 1) == 0.0);
  }

  const Matrix uniform = Matrix::Constant(2, 2, 0.25);
  const double lambda = 10000.0;
  Matrix mean = Matrix::Zero(2, 2);
  double total_mean = 0.0;
  const int trials = 1000;
  Rng rng2 = make_rng(12);
  for (int t = 0; t < trials; ++t) {
    const Matrix c = sample_poissonized(uniform, lambda, rng2);
    mean += c;
    total_mean += c.sum();
  }
  mean /= (double)trials;
  total_mean /= (double)trials;
  const double sigma = std::sqrt(2500.0 / (double)trials);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(mean(i, j) - 2500.0) <= 3.0 * sigma);
  CHECK(std::abs(total_mean - lambda) <= 3.0 * std::sqrt(lambda / (double)trials));
}

TEST_CASE("poissonization consistency: conditioned cells look multinomial") {
  // two-sample chi-square homogeneity between a poissonized draw (cells
  // independent Poisson, hence multinomial given the total) and a direct
  // multinomial draw with the same p
  Matrix p(2, 3);
  p << 0.25, 0.15, 0.10, 0.20, 0.18, 0.12;
  const long long n = 500;
  const double chi2_99_df5 = 15.086;
  int exceed = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(1000 + (std::uint64_t)t);
    const Matrix a = sample_poissonized(p, (double)n, rng);
    const Matrix b = sample_multinomial(p, n, rng);
    const double ta = a.sum(), tb = b.sum();
    double stat = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) {
        const double pooled = (a(i, j) + b(i, j)) / (ta + tb);
        const double ea = pooled * ta, eb = pooled * tb;
        if (ea > 0.0) stat += (a(i, j) - ea) * (a(i, j) - ea) / ea;
        if (eb > 0.0) stat += (b(i, j) - eb) * (b(i, j) - eb) / eb;
      }
    if (stat > chi2_99_df5) ++exceed;
  }
  const double allowed = 0.01 * trials + 3.0 * std::sqrt(trials * 0.01 * 0.99);
  CHECK((double)exceed <= allowed);
}

TEST_CASE("assouad matrix: instantiated 2x2 entries") {
  AssouadMatrixSpec spec;
  spec.d1 = 2;
  spec.d2 = 2;
  spec.K = 1;
  spec.n = 1000000;
  spec.signs = {1};
  const Matrix p = assouad_matrix(spec);
  const double gamma = std::min(1.0 / (4.0 * std::sqrt(2.0e6)), 0.25);
  CHECK(p(0, 0) == doctest::Approx(0.5 + gamma).epsilon(1e-15));
  CHECK(p(0, 1) == doctest::Approx(0.5 - gamma).epsilon(1e-15));
  CHECK(p(1, 0) == 0.0);
  CHECK(p(1, 1) == 0.0);
}

TEST_CASE("assouad matrix: simplex membership and rank bound") {
  Rng rng = make_rng(77);
  for (int rep = 0; rep < 10; ++rep) {
    const auto spec = AssouadMatrixSpec::random(4, 6, 2, 5000, rng);
    const Matrix p = assouad_matrix(spec);
    CHECK(is_prob_matrix(p, 1e-12));
    CHECK(numerical_rank(p) <= 2);
  }
  AssouadMatrixSpec bad;
  bad.d1 = 1;
  bad.d2 = 4;
  bad.K = 2;
  bad.n = 100;
  bad.signs = {1, 1, 1, 1};
  CHECK_THROWS_AS(assouad_matrix(bad), InvalidInput);
}

TEST_CASE("assouad density: all-zero bits give the uniform density") {
  AssouadDensitySpec spec;
  spec.K = 2;
  spec.n = 4000;
  spec.beta = 1.0;
  spec.L = 1.0;
  spec.bits.assign((std::size_t)spec.k_prime() * (std::size_t)spec.bumps_y(), 0);
  const AssouadDensity f(spec);
  for (double x : {0.0, 0.2, 0.5, 0.77, 1.0})
    for (double y : {0.0, 0.31, 0.5, 0.99, 1.0}) CHECK(f(x, y) == 1.0);
}

TEST_CASE("assouad density: bounded below by 1/2 and integrates to 1") {
  Rng rng = make_rng(123);
  const auto spec = AssouadDensitySpec::random(3, 2000, 0.7, 1.5, rng);
  const AssouadDensity f(spec);

  const int probe = 1000;  // 10^6 probe points
  double min_val = 1e300;
  for (int i = 0; i <= probe; ++i)
    for (int j = 0; j <= probe; ++j)
      min_val = std::min(min_val, f((double)i / probe, (double)j / probe));
  CHECK(min_val >= 0.5 - 1e-9);

  const int q = 2048;
  long double integral = 0.0L;
  for (int i = 0; i < q; ++i) {
    const double x = ((double)i + 0.5) / q;
    for (int j = 0; j < q; ++j) integral += f(x, ((double)j + 0.5) / q);
  }
  integral /= (long double)q * q;
  CHECK(std::abs((double)integral - 1.0) <= 1e-4);
}

TEST_CASE("rejection sampler: unit density accepts everything, uniform marginals") {
  Rng rng = make_rng(2024);
  long long proposals = 0;
  const long long n = 100000;
  const auto pts = sample_from_density([](double, double) { return 1.0; }, 1.0, n, rng,
                                       &proposals);
  CHECK(proposals == n);
  std::vector<double> xs, ys;
  for (const auto& [a, b] : pts) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
    xs.push_back(a);
    ys.push_back(b);
  }
  const double crit = 1.628 / std::sqrt((double)n);  // KS, level 0.01
  CHECK(oracles::ks_uniform(xs) <= crit);
  CHECK(oracles::ks_uniform(ys) <= crit);
}

TEST_CASE("rejection sampler: acceptance rate near 1/B for a density") {
  AssouadDensitySpec spec;
  spec.K = 1;
  spec.n = 1000;
  spec.beta = 1.0;
  spec.L = 1.0;
  spec.bits.assign((std::size_t)spec.k_prime() * (std::size_t)spec.bumps_y(), 0);
  const AssouadDensity f(spec);  // identically 1
  Rng rng = make_rng(5);
  long long proposals = 0;
  const long long n = 50000;
  sample_from_density([&f](double x, double y) { return f(x, y); }, 2.0, n, rng, &proposals);
  const double rate = (double)n / (double)proposals;
  CHECK(rate == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("rejection sampler: input validation and degenerate envelope") {
  Rng rng = make_rng(6);
  CHECK_THROWS_AS(sample_from_density([](double, double) { return 1.0; }, 0.0, 10, rng),
                  InvalidInput);
  CHECK_THROWS_AS(sample_from_density([](double, double) { return 0.0; }, 1.0, 10, rng),
                  std::runtime_error);
}

TEST_CASE("dirichlet low-rank generator") {
  Rng rng = make_rng(9);
  const Matrix r1 = low_rank_dirichlet_matrix(8, 1, 1.0, rng);
  CHECK(is_prob_matrix(r1, 1e-10));
  const auto s = svd(r1);
  CHECK(s.singular_values(1) < 1e-12);

  const Matrix r3 = low_rank_dirichlet_matrix(10, 3, 1.0, rng);
  CHECK(is_prob_matrix(r3, 1e-10));
  CHECK(numerical_rank(r3) <= 3);

  Rng a = make_rng(4), b = make_rng(4);
  CHECK((low_rank_dirichlet_matrix(6, 2, 1.0, a).array() ==
         low_rank_dirichlet_matrix(6, 2, 1.0, b).array())
            .all());
}

TEST_CASE("generator outputs satisfy their type invariants across 1000 seeds") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng = make_rng(seed);
    CHECK(is_prob_matrix(low_rank_dirichlet_matrix(6, 2, 1.0, rng), 1e-10));
    const auto spec = AssouadMatrixSpec::random(3, 5, 2, 1000, rng);
    CHECK(is_prob_matrix(assouad_matrix(spec), 1e-12));
  }
}

TEST_CASE("holder mixture: evaluation, integral, exact supremum") {
  HolderMixtureSpec mix;
  Piecewise1D u{Piecewise1D::Kind::Linear, {0.0, 1.0}, {0.8, 1.2}};
  Piecewise1D v{Piecewise1D::Kind::Linear, {0.0, 1.0}, {1.2, 0.8}};
  mix.components.push_back({u, v});
  mix.weights = {1.0};
  mix.validate();
  CHECK(mix.integral() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mix(0.0, 0.0) == doctest::Approx(0.8 * 1.2));
  CHECK(mix.upper_bound() == doctest::Approx(1.2 * 1.2));

  // probe maximum never exceeds the corner maximum
  double probe_max = 0.0;
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j)
      probe_max = std::max(probe_max, mix((double)i / 100, (double)j / 100));
  CHECK(probe_max <= mix.upper_bound() + 1e-12);

  Piecewise1D flat{Piecewise1D::Kind::Constant, {0.0, 0.5, 1.0}, {1.5, 0.5}};
  CHECK(flat.integral() == doctest::Approx(1.0));
  CHECK(flat(0.25) == 1.5);
  CHECK(flat(0.75) == 0.5);
  CHECK(flat(1.0) == 0.5);
}

TEST_SUITE_END();
