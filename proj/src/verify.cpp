#include "lowrank/verify.hpp"

#include "lowrank/io.hpp"
#include "lowrank/linalg.hpp"
#include "lowrank/rand.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace lowrank {

namespace {

void finalize(VerifierReport& r) {
  r.trials = (long long)r.violated.size();
  r.violations = 0;
  for (int v : r.violated) r.violations += v;
  const double p = std::min(1.0, r.lemma_probability);
  r.slack = r.trials > 0 ? 3.0 * std::sqrt(p * (1.0 - p) / (double)r.trials) : 0.0;
  r.flagged = r.violation_fraction() > r.lemma_probability + r.slack;
}

} // namespace

VerifierReport verify_noise_bound(const Matrix& p, const std::vector<int>& row_block,
                                  const std::vector<int>& col_block, double alpha, double N,
                                  long long n, int trials, std::uint64_t seed) {
  validate_prob_matrix(p);
  require(alpha > 1.0 && N > 1.0, "verify_noise_bound: need alpha > 1 and N > 1");
  require(!row_block.empty() && !col_block.empty(), "verify_noise_bound: empty block");
  require(n >= 1 && trials >= 1, "verify_noise_bound: need n >= 1 and trials >= 1");

  Matrix q((int)row_block.size(), (int)col_block.size());
  for (std::size_t a = 0; a < row_block.size(); ++a)
    for (std::size_t b = 0; b < col_block.size(); ++b)
      q((int)a, (int)b) = p(row_block[a], col_block[b]);
  const double log_term = alpha * std::log(N) / (double)n;
  const double bound = 9.0 * std::max(bracket_norm(q) * log_term, log_term * log_term);

  VerifierReport rep;
  rep.lemma = "noise";
  rep.lemma_probability = (double)(row_block.size() + col_block.size()) / std::pow(N, alpha);
  std::ostringstream ps;
  ps << "alpha=" << alpha << " N=" << N << " n=" << n << " block=" << row_block.size() << "x"
     << col_block.size();
  rep.params = ps.str();

  Rng rng = make_rng(seed);
  for (int t = 0; t < trials; ++t) {
    const Matrix y = sample_multinomial(p, n, rng);
    Matrix w((int)row_block.size(), (int)col_block.size());
    for (std::size_t a = 0; a < row_block.size(); ++a)
      for (std::size_t b = 0; b < col_block.size(); ++b)
        w((int)a, (int)b) = y(row_block[a], col_block[b]) / (double)n - q((int)a, (int)b);
    const double norm_sq = [&] {
      const double s = operator_norm(w);
      return s * s;
    }();
    rep.observed.push_back(norm_sq);
    rep.bounds.push_back(bound);
    rep.violated.push_back(norm_sq > bound ? 1 : 0);
  }
  finalize(rep);
  return rep;
}

VerifierReport verify_row_concentration(const Matrix& p, double alpha, double N, long long n,
                                        int trials, std::uint64_t seed) {
  validate_prob_matrix(p);
  require(alpha > 0.0 && N > 1.0, "verify_row_concentration: need alpha > 0 and N > 1");
  require(n >= 1 && trials >= 1, "verify_row_concentration: need n >= 1 and trials >= 1");

  const double threshold = 14.0 * alpha * std::log(N) / (double)n;
  std::vector<int> qualifying;
  const Vector row_mass = p.rowwise().sum();
  for (int i = 0; i < p.rows(); ++i)
    if (row_mass(i) >= threshold) qualifying.push_back(i);

  VerifierReport rep;
  rep.lemma = "rows";
  rep.lemma_probability =
      qualifying.empty() ? 0.0 : (double)(qualifying.size() + 1) / std::pow(N, alpha);
  std::ostringstream ps;
  ps << "alpha=" << alpha << " N=" << N << " n=" << n << " qualifying=" << qualifying.size();
  rep.params = ps.str();

  Rng rng = make_rng(seed);
  for (int t = 0; t < trials; ++t) {
    const Matrix y = sample_multinomial(p, n, rng);
    // observed: worst retention ratio over qualifying rows, target >= 1
    double worst = qualifying.empty() ? 1.0 : std::numeric_limits<double>::infinity();
    for (int i : qualifying) {
      const double retained = y.row(i).sum() / (double)n;
      worst = std::min(worst, retained / (row_mass(i) / 4.0));
    }
    rep.observed.push_back(worst);
    rep.bounds.push_back(1.0);
    rep.violated.push_back(worst < 1.0 ? 1 : 0);
  }
  finalize(rep);
  return rep;
}

VerifierReport verify_poisson_tails(double lambda, const std::vector<double>& x_grid,
                                    long long trials, std::uint64_t seed) {
  require(lambda > 0.0, "verify_poisson_tails: lambda must be positive");
  require(trials >= 1, "verify_poisson_tails: trials must be >= 1");
  for (double x : x_grid)
    require(x > 0.0 && x < lambda, "verify_poisson_tails: grid values must lie in (0, lambda)");

  Rng rng = make_rng(seed);
  std::poisson_distribution<long long> poi(lambda);
  std::vector<long long> draws((std::size_t)trials);
  for (auto& d : draws) d = poi(rng);

  VerifierReport rep;
  rep.lemma = "poisson";
  std::ostringstream ps;
  ps << "lambda=" << lambda << " trials=" << trials;
  rep.params = ps.str();

  // one row per (grid point, tail side); the per-row bound already includes
  // the 3 sigma sampling slack on the empirical frequency
  double max_probability = 0.0;
  for (double x : x_grid) {
    const double lower =
        std::exp(-x - (lambda - x) * std::log((lambda - x) / lambda));
    const double upper =
        std::exp(x - (lambda + x) * std::log((lambda + x) / lambda));
    long long below = 0, above = 0;
    for (long long d : draws) {
      if ((double)d <= lambda - x) ++below;
      if ((double)d >= lambda + x) ++above;
    }
    const double freq_below = (double)below / (double)trials;
    const double freq_above = (double)above / (double)trials;
    const auto slack = [&](double b) {
      const double q = std::min(1.0, b);
      return 3.0 * std::sqrt(q * (1.0 - q) / (double)trials);
    };
    rep.observed.push_back(freq_below);
    rep.bounds.push_back(lower + slack(lower));
    rep.violated.push_back(freq_below > lower + slack(lower) ? 1 : 0);
    rep.observed.push_back(freq_above);
    rep.bounds.push_back(upper + slack(upper));
    rep.violated.push_back(freq_above > upper + slack(upper) ? 1 : 0);
    max_probability = std::max({max_probability, lower, upper});
  }
  rep.lemma_probability = std::min(1.0, max_probability);
  rep.trials = (long long)rep.violated.size();
  rep.violations = 0;
  for (int v : rep.violated) rep.violations += v;
  rep.slack = 0.0;  // already folded into the per-row bounds
  rep.flagged = rep.violations > 0;
  return rep;
}

VerifierReport verify_histogram_deviation(int ell, long long m, double delta, int trials,
                                          std::uint64_t seed) {
  require(ell >= 1, "verify_histogram_deviation: ell must be >= 1");
  require(m >= 1, "verify_histogram_deviation: m must be >= 1");
  require(delta > 0.0 && delta < 1.0, "verify_histogram_deviation: delta must be in (0,1)");
  require(trials >= 1, "verify_histogram_deviation: trials must be >= 1");

  const double bound =
      std::sqrt((double)ell / (double)m) + std::sqrt(2.0 * std::log(1.0 / delta) / (double)m);

  VerifierReport rep;
  rep.lemma = "histogram";
  rep.lemma_probability = delta;
  std::ostringstream ps;
  ps << "ell=" << ell << " m=" << m << " delta=" << delta;
  rep.params = ps.str();

  Rng rng = make_rng(seed);
  std::uniform_int_distribution<int> bin(0, ell - 1);
  for (int t = 0; t < trials; ++t) {
    std::vector<long long> counts((std::size_t)ell, 0);
    for (long long i = 0; i < m; ++i) ++counts[(std::size_t)bin(rng)];
    double dev = 0.0;
    for (int j = 0; j < ell; ++j)
      dev += std::abs((double)counts[(std::size_t)j] / (double)m - 1.0 / (double)ell);
    rep.observed.push_back(dev);
    rep.bounds.push_back(bound);
    rep.violated.push_back(dev > bound ? 1 : 0);
  }
  finalize(rep);
  return rep;
}

void write_report_csv(std::ostream& out, const VerifierReport& report) {
  out << "trial,observed,bound,violated\n";
  for (std::size_t t = 0; t < report.observed.size(); ++t)
    out << t << ',' << format_double(report.observed[t]) << ','
        << format_double(report.bounds[t]) << ',' << report.violated[t] << '\n';
}

} // namespace lowrank
