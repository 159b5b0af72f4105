#pragma once

#include "lowrank/common.hpp"
#include "lowrank/density.hpp"

#include <string>
#include <vector>

namespace lowrank {

/// Candidate grid of the adaptive estimator: smoothness values
/// beta_j = (1 + 1/ln n)^(-j+1) for j = 1..ceil(ln(n) ln ln(n)) and a set
/// of K values bounded by K_max = ceil(sqrt(n)).
struct CandidateGrid {
  std::vector<int> Ks;
  std::vector<double> betas;

  std::size_t size() const { return Ks.size() * betas.size(); }

  /// Dyadic K grid {1, 2, 4, ..., K_max} (the default; the full grid makes
  /// the tournament cubic in a grid of size ~sqrt(n) * log n).
  static CandidateGrid dyadic(long long n);
  /// Full K grid {1, ..., K_max}.
  static CandidateGrid full(long long n);

  static std::vector<double> beta_grid(long long n);
  static int k_max(long long n);
};

struct CandidateInfo {
  int K = 0;
  int j = 0;  // index into the beta grid, 1-based
  double beta = 0.0;
  int distinct_id = -1;  // candidates sharing (K', beta_j) share the estimate
};

struct CandidateSet {
  std::vector<CandidateInfo> info;
  std::vector<PiecewiseDensity2D> densities;  // one per candidate, may repeat
  std::vector<std::string> warnings;          // dropped candidates, never silent
};

/// One Algorithm-2 run per (K, beta_j) on the full sample; configurations
/// that collapse to the same (K', beta_j) share the computation.
CandidateSet build_candidates(const Sample2D& x, double alpha, const CandidateGrid& grid,
                              const DensityParams& base_params);

/// The region B = {f_b > f_a} of an ordered candidate pair.
struct ScheffeSet {
  const PiecewiseDensity2D* a = nullptr;
  const PiecewiseDensity2D* b = nullptr;
};

/// Exact integral of f over {fb > fa}; all three functions are piecewise
/// constant on product grids, so the overlay evaluation has no quadrature
/// error.
double integrate_over_scheffe(const PiecewiseDensity2D& f, const PiecewiseDensity2D& fa,
                              const PiecewiseDensity2D& fb);

/// Fraction of sample points with fb(point) > fa(point), strict inequality.
double empirical_measure_scheffe(const Sample2D& x, const PiecewiseDensity2D& fa,
                                 const PiecewiseDensity2D& fb);

struct SelectionRow {
  int K = 0;
  double beta = 0.0;
  double max_discrepancy = 0.0;
  bool selected = false;
};

struct SelectionTrace {
  int selected_index = -1;
  std::vector<SelectionRow> rows;  // one per candidate, input order
  /// Discrepancy table over the distinct candidate functions:
  /// entry (c, pair_index) = |int_B f_c - P_n(B)| for the ordered pair.
  Matrix distinct_table;
  std::vector<std::pair<int, int>> distinct_pairs;
  std::vector<int> distinct_of;  // candidate index -> distinct function index
};

/// Minimum-distance choice: the candidate minimizing the maximum Scheffe
/// discrepancy over all ordered pairs. Ties break to the lowest candidate
/// index.
std::pair<PiecewiseDensity2D, SelectionTrace>
min_distance_select(const std::vector<PiecewiseDensity2D>& candidates, const Sample2D& x);

/// Convenience wrapper used with a CandidateSet; trace rows carry (K, beta).
std::pair<PiecewiseDensity2D, SelectionTrace> min_distance_select(const CandidateSet& set,
                                                                  const Sample2D& x);

void write_selection_trace_csv(std::ostream& out, const SelectionTrace& trace);

} // namespace lowrank
