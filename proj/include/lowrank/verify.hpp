#pragma once

#include "lowrank/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lowrank {

/// Outcome of one empirical concentration check. Each row is one trial (or
/// one grid point for the tail verifier): the observed statistic, the bound
/// it is compared against, and the violation flag. The verifier is
/// one-sided: it certifies that the violation frequency stays within the
/// lemma's probability plus 3 binomial standard errors, never tightness.
struct VerifierReport {
  std::string lemma;
  std::string params;
  long long trials = 0;
  long long violations = 0;
  std::vector<double> observed;
  std::vector<double> bounds;
  std::vector<int> violated;
  double lemma_probability = 0.0;  // allowed violation probability
  double slack = 0.0;              // 3 binomial standard errors
  bool flagged = false;            // violation frequency above probability + slack

  double violation_fraction() const {
    return trials > 0 ? (double)violations / (double)trials : 0.0;
  }
};

/// Operator-norm bound on restricted multinomial noise: draws Y ~ M(p, n),
/// forms W = (Y/n - p) on I x J and checks
/// ||W||^2 <= 9 max{alpha |||Q||| log(N)/n, (alpha log(N)/n)^2}, which fails
/// with probability at most (|I|+|J|)/N^alpha.
VerifierReport verify_noise_bound(const Matrix& p, const std::vector<int>& row_block,
                                  const std::vector<int>& col_block, double alpha, double N,
                                  long long n, int trials, std::uint64_t seed);

/// Row-mass retention: rows whose mass lambda_i is at least
/// 14 alpha log(N)/n keep at least a quarter of it empirically,
/// simultaneously, except with probability (count+1)/N^alpha.
VerifierReport verify_row_concentration(const Matrix& p, double alpha, double N, long long n,
                                        int trials, std::uint64_t seed);

/// Poisson tail bounds at each x in the grid:
/// P(Z <= lambda-x) <= exp(-x - (lambda-x) log((lambda-x)/lambda)) and the
/// analogous upper-tail bound. Two rows per grid point (lower, upper).
VerifierReport verify_poisson_tails(double lambda, const std::vector<double>& x_grid,
                                    long long trials, std::uint64_t seed);

/// l1 deviation of an empirical histogram over ell bins from m iid uniform
/// bin assignments: exceeds sqrt(ell/m) + sqrt(2 log(1/delta)/m) with
/// probability at most delta.
VerifierReport verify_histogram_deviation(int ell, long long m, double delta, int trials,
                                          std::uint64_t seed);

/// CSV with columns trial, observed, bound, violated.
void write_report_csv(std::ostream& out, const VerifierReport& report);

} // namespace lowrank
