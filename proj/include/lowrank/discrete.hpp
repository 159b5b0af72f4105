#pragma once

#include "lowrank/common.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace lowrank {

/// Empirical-frequency matrix: entries are multiples of 1/n summing to 1.
struct FrequencyMatrix {
  Matrix values;
  long long n = 0;

  static FrequencyMatrix from_counts(const Matrix& counts, long long n);
  void validate() const;
};

/// Partition of rows and columns by dyadic marginal mass. Index t ranges
/// over {0,...,T+1}: a row belongs to set t <= T when its l1 mass lies in
/// (2^-(t+1), 2^-t], and to the leftover set T+1 when it is <= 2^-(T+1).
struct DyadicBlocks {
  int T = 0;
  std::vector<std::vector<int>> row_sets;  // T+2 disjoint index lists
  std::vector<std::vector<int>> col_sets;
};

/// Inputs of the localized SVD estimator.
struct Alg1Params {
  double alpha = 2.0;  // > 1
  int d = 2;           // partition dimension parameter, >= 2
  double N = 2.0;      // log factor base, > 1
  long long n = 1;     // sample size per half
  /// Multiplier on the soft-threshold tau_k; 1.0 reproduces the written
  /// threshold 12*sqrt(alpha*log(N)/n * 2^-(t^t')). Exposed for
  /// sensitivity runs.
  double tau_scale = 1.0;

  void validate() const;
};

enum class Alg1Branch {
  SmallSample,   // n < 14*alpha*d*log(N): returned (h1+h2)/2
  ZeroFallback,  // positive part identically zero: returned (h1+h2)/2
  Normalized,    // returned positive part / its l1 norm
};

struct BlockTrace {
  int t = 0, tp = 0;
  int rows = 0, cols = 0;
  double tau = 0.0;
  double nuclear_before = 0.0;
  double nuclear_after = 0.0;
};

struct Alg1Result {
  Matrix estimate;            // always a valid probability matrix
  Alg1Branch branch = Alg1Branch::SmallSample;
  Matrix pre_normalization;   // the block sum before positive part; empty
                              // when the small-sample branch was taken
  std::vector<BlockTrace> blocks;
};

/// Splits a sequence of flat cell indices (row-major, from 2n draws) into
/// two disjoint halves and histograms each. Throws on odd totals; the
/// caller drops an observation first (the CLI does this and says so).
std::pair<FrequencyMatrix, FrequencyMatrix>
split_and_histogram(const std::vector<std::int64_t>& draws, int d1, int d2);

/// Same, starting from an aggregated count matrix: the split is a uniformly
/// random partition of the 2n observations (sampling without replacement),
/// so the halves are independent M(p, n) draws.
std::pair<FrequencyMatrix, FrequencyMatrix> split_and_histogram(const Matrix& counts,
                                                                Rng& rng);

DyadicBlocks build_dyadic_blocks(const FrequencyMatrix& h1, int d);

/// Same membership rule evaluated on the exact marginals of p.
/// Debug/ablation mode only.
DyadicBlocks oracle_blocks(const Matrix& p, int d);

/// Algorithm: if n < 14*alpha*d*log(N) return (h1+h2)/2; otherwise build
/// dyadic blocks from h1, soft-threshold each block of h2 at
/// tau_k = 12*sqrt(alpha*log(N)/n * 2^-(t^t')), sum the blocks, take the
/// positive part and normalize (falling back to (h1+h2)/2 when the
/// positive part vanishes).
Alg1Result localized_svd_estimate(const Alg1Params& params, const FrequencyMatrix& h1,
                                  const FrequencyMatrix& h2);

/// Same, with the blocks supplied by the caller (used by the oracle-blocks
/// ablation mode).
Alg1Result localized_svd_estimate_with_blocks(const Alg1Params& params,
                                              const DyadicBlocks& blocks,
                                              const FrequencyMatrix& h1,
                                              const FrequencyMatrix& h2);

/// Plain histogram baseline (h1+h2)/2.
Matrix histogram_estimate(const FrequencyMatrix& h1, const FrequencyMatrix& h2);

} // namespace lowrank
