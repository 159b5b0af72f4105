#include "lowrank/adaptive.hpp"

#include "lowrank/metrics.hpp"
#include "lowrank/rand.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace lowrank;

namespace {

double product_truth(double x, double y) {
  if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) return 0.0;
  return (0.8 + 0.4 * x) * (1.2 - 0.4 * y);
}

// near-truth candidate: cell midpoints of the product truth on a fine grid,
// renormalized
PiecewiseDensity2D near_truth_candidate(int cells) {
  PiecewiseDensity2D f;
  f.branch = Alg2Branch::GridHistogram;
  f.r1 = 0.0;
  f.R1 = 1.0;
  f.r2 = 0.0;
  f.R2 = 1.0;
  f.h1 = 1.0 / cells;
  f.h2 = 1.0 / cells;
  f.e1_min = 0;
  f.e1_max = cells - 1;
  f.e2_min = 0;
  f.e2_max = cells - 1;
  f.cell_values.resize(cells, cells);
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < cells; ++j)
      f.cell_values(i, j) =
          product_truth(((double)i + 0.5) / cells, ((double)j + 0.5) / cells);
  f.cell_values /= f.cell_values.sum() * f.h1 * f.h2;
  return f;
}

PiecewiseDensity2D wrong_candidate() {
  // all mass on [0, 1/2] x [0, 1]
  PiecewiseDensity2D f;
  f.branch = Alg2Branch::GridHistogram;
  f.r1 = 0.0;
  f.R1 = 1.0;
  f.r2 = 0.0;
  f.R2 = 1.0;
  f.h1 = 0.5;
  f.h2 = 1.0;
  f.e1_min = 0;
  f.e1_max = 1;
  f.e2_min = 0;
  f.e2_max = 0;
  f.cell_values = Matrix::Zero(2, 1);
  f.cell_values(0, 0) = 2.0;
  return f;
}

Sample2D draw_from_truth(long long n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return sample_from_density(product_truth, 1.44, n, rng);
}

} // namespace

TEST_SUITE_BEGIN("adaptive");

TEST_CASE("candidate grid shapes") {
  const long long n = 10000;
  const auto betas = CandidateGrid::beta_grid(n);
  const double ln_n = std::log((double)n);
  CHECK((int)betas.size() == (int)std::ceil(ln_n * std::log(ln_n)));
  CHECK(betas.front() == 1.0);
  for (std::size_t j = 0; j + 1 < betas.size(); ++j) {
    CHECK(betas[j] > betas[j + 1]);
    CHECK(betas[j + 1] > 0.0);
  }
  const auto dyadic = CandidateGrid::dyadic(n);
  CHECK(dyadic.Ks.front() == 1);
  CHECK(dyadic.Ks.back() == CandidateGrid::k_max(n));
  for (std::size_t i = 0; i + 1 < dyadic.Ks.size(); ++i)
    CHECK(dyadic.Ks[i] < dyadic.Ks[i + 1]);
  const auto full = CandidateGrid::full(100);
  CHECK((int)full.Ks.size() == CandidateGrid::k_max(100));
}

TEST_CASE("build_candidates: singleton grid equals a direct run") {
  const auto sample = draw_from_truth(2000, 71);
  CandidateGrid grid;
  grid.Ks = {1};
  grid.betas = {1.0};
  DensityParams base;
  const auto set = build_candidates(sample, base.alpha, grid, base);
  REQUIRE(set.densities.size() == 1);
  CHECK(set.warnings.empty());
  DensityParams direct = base;
  direct.K = 1;
  direct.beta = 1.0;
  const auto res = alg2_density_2d(sample, direct);
  CHECK(set.densities[0] == res.density);
}

TEST_CASE("build_candidates: dedup never exceeds the grid size and is deterministic") {
  const auto sample = draw_from_truth(2000, 72);
  const auto grid = CandidateGrid::dyadic(2000);
  DensityParams base;
  const auto a = build_candidates(sample, base.alpha, grid, base);
  const auto b = build_candidates(sample, base.alpha, grid, base);
  CHECK(a.info.size() == grid.size());
  std::set<int> distinct;
  for (const auto& c : a.info) distinct.insert(c.distinct_id);
  CHECK(distinct.size() <= grid.size());
  CHECK(distinct.size() < a.info.size());  // collapsing actually happens here
  REQUIRE(a.densities.size() == b.densities.size());
  for (std::size_t i = 0; i < a.densities.size(); ++i) CHECK(a.densities[i] == b.densities[i]);
}

TEST_CASE("build_candidates: the full K grid collapses to few distinct runs") {
  const auto sample = draw_from_truth(500, 78);
  const auto grid = CandidateGrid::full(500);
  DensityParams base;
  const auto set = build_candidates(sample, base.alpha, grid, base);
  CHECK(set.info.size() == grid.size());
  std::set<int> distinct;
  for (const auto& c : set.info) distinct.insert(c.distinct_id);
  CHECK(distinct.size() <= grid.betas.size() * 2);  // guard failures depend on beta only
}

TEST_CASE("scheffe integral: equal candidates give the empty set") {
  const auto f = near_truth_candidate(8);
  CHECK(integrate_over_scheffe(f, f, f) == 0.0);
}

TEST_CASE("scheffe integral: hand rectangle example") {
  const auto fa = PiecewiseDensity2D::uniform_unit_square();
  const auto fb = wrong_candidate();
  // B = {fb > fa} = [0, 1/2) x [0, 1]
  CHECK(integrate_over_scheffe(fb, fa, fb) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate_over_scheffe(fa, fa, fb) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("scheffe integral: B, its reverse and the tie region partition the mass") {
  const auto f = near_truth_candidate(16);
  const auto fa = near_truth_candidate(4);
  const auto fb = wrong_candidate();
  const double on_b = integrate_over_scheffe(f, fa, fb);
  const double on_reverse = integrate_over_scheffe(f, fb, fa);
  // tie region, integrated on the shared overlay
  auto xb = f.x_breaks();
  auto yb = f.y_breaks();
  for (const auto* g : {&fa, &fb}) {
    const auto gx = g->x_breaks(), gy = g->y_breaks();
    xb.insert(xb.end(), gx.begin(), gx.end());
    yb.insert(yb.end(), gy.begin(), gy.end());
  }
  std::sort(xb.begin(), xb.end());
  xb.erase(std::unique(xb.begin(), xb.end()), xb.end());
  std::sort(yb.begin(), yb.end());
  yb.erase(std::unique(yb.begin(), yb.end()), yb.end());
  double ties = 0.0;
  for (std::size_t i = 0; i + 1 < xb.size(); ++i)
    for (std::size_t j = 0; j + 1 < yb.size(); ++j) {
      const double mx = 0.5 * (xb[i] + xb[i + 1]), my = 0.5 * (yb[j] + yb[j + 1]);
      if (fa.eval(mx, my) == fb.eval(mx, my))
        ties += f.eval(mx, my) * (xb[i + 1] - xb[i]) * (yb[j + 1] - yb[j]);
    }
  CHECK(on_b + on_reverse + ties == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("scheffe integral agrees with Monte-Carlo integration") {
  const auto f = near_truth_candidate(8);
  const auto fa = PiecewiseDensity2D::uniform_unit_square();
  const auto fb = wrong_candidate();
  const double exact = integrate_over_scheffe(f, fa, fb);
  Rng rng = make_rng(99);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const long long m = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (long long i = 0; i < m; ++i) {
    const double x = u01(rng), y = u01(rng);
    const double v = fb.eval(x, y) > fa.eval(x, y) ? f.eval(x, y) : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double mc = sum / (double)m;
  const double se = std::sqrt((sum_sq / (double)m - mc * mc) / (double)m);
  CHECK(std::abs(exact - mc) <= 3.0 * se);
}

TEST_CASE("empirical scheffe measure") {
  const auto fa = PiecewiseDensity2D::uniform_unit_square();
  const auto fb = wrong_candidate();
  CHECK(empirical_measure_scheffe({{0.1, 0.1}}, fa, fa) == 0.0);
  CHECK(empirical_measure_scheffe({{0.1, 0.1}, {0.4, 0.9}}, fa, fb) == 1.0);

  const auto sample = draw_from_truth(5000, 73);
  double brute = 0.0;
  for (const auto& [x, y] : sample)
    if (fb.eval(x, y) > fa.eval(x, y)) brute += 1.0;
  brute /= (double)sample.size();
  CHECK(empirical_measure_scheffe(sample, fa, fb) == brute);
}

TEST_CASE("min distance select: single and duplicated candidate lists") {
  const auto sample = draw_from_truth(1000, 74);
  const auto f = near_truth_candidate(8);
  const auto [single, trace1] = min_distance_select({f}, sample);
  CHECK(single == f);
  CHECK(trace1.selected_index == 0);
  const auto [dup, trace2] = min_distance_select({f, f, f}, sample);
  CHECK(dup == f);
  CHECK(trace2.selected_index == 0);  // ties break to the lowest index
  CHECK(trace2.rows[0].max_discrepancy == trace2.rows[2].max_discrepancy);
}

TEST_CASE("min distance select: planted instance finds the near-truth candidate") {
  std::vector<PiecewiseDensity2D> candidates = {wrong_candidate(), near_truth_candidate(16)};
  int picked = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    const auto sample = draw_from_truth(10000, 7500 + (std::uint64_t)s);
    const auto [sel, trace] = min_distance_select(candidates, sample);
    if (trace.selected_index == 1) ++picked;
  }
  CHECK(picked >= 95);
}

TEST_CASE("min distance select: argmin set is permutation invariant") {
  const auto sample = draw_from_truth(4000, 76);
  std::vector<PiecewiseDensity2D> candidates = {wrong_candidate(), near_truth_candidate(16),
                                                near_truth_candidate(4),
                                                PiecewiseDensity2D::uniform_unit_square()};
  const auto [sel_a, trace_a] = min_distance_select(candidates, sample);
  std::vector<PiecewiseDensity2D> permuted = {candidates[2], candidates[0], candidates[3],
                                              candidates[1]};
  const auto [sel_b, trace_b] = min_distance_select(permuted, sample);
  CHECK(sel_a == sel_b);
  const double min_a = trace_a.rows[(std::size_t)trace_a.selected_index].max_discrepancy;
  const double min_b = trace_b.rows[(std::size_t)trace_b.selected_index].max_discrepancy;
  CHECK(min_a == doctest::Approx(min_b).epsilon(1e-12));
}

TEST_CASE("selection trace CSV") {
  const auto sample = draw_from_truth(1000, 77);
  CandidateGrid grid;
  grid.Ks = {1, 2};
  grid.betas = {1.0};
  DensityParams base;
  const auto set = build_candidates(sample, base.alpha, grid, base);
  const auto [sel, trace] = min_distance_select(set, sample);
  std::stringstream ss;
  write_selection_trace_csv(ss, trace);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "candidate_K,candidate_beta,max_discrepancy,selected_flag");
  int rows = 0, selected = 0;
  while (std::getline(ss, line)) {
    ++rows;
    if (line.size() >= 2 && line.compare(line.size() - 2, 2, ",1") == 0) ++selected;
  }
  CHECK(rows == (int)set.info.size());
  CHECK(selected == 1);
}

TEST_CASE("oracle inequality on a planted family (reduced-seed check)") {
  std::vector<PiecewiseDensity2D> candidates = {
      near_truth_candidate(16), wrong_candidate(), near_truth_candidate(2),
      PiecewiseDensity2D::uniform_unit_square()};
  TruthFunction truth;
  truth.f = product_truth;
  std::vector<double> cand_errors;
  for (const auto& c : candidates)
    cand_errors.push_back(density_l1_error(c, truth, 512).first);
  const double best = *std::min_element(cand_errors.begin(), cand_errors.end());
  const double m = (double)candidates.size();
  const long long n = 10000;
  const double delta = 0.1;
  const double margin = 2.0 * std::sqrt(2.0 * std::log(2.0 * m * m / delta) / (double)n);
  int hold = 0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    const auto sample = draw_from_truth(n, 9000 + (std::uint64_t)s);
    const auto [sel, trace] = min_distance_select(candidates, sample);
    const double sel_err = cand_errors[(std::size_t)trace.selected_index];
    if (sel_err <= 3.0 * best + margin) ++hold;
  }
  CHECK((double)hold / seeds >= 0.8);
}

TEST_SUITE_END();
