#include "lowrank/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace lowrank {

int CandidateGrid::k_max(long long n) {
  return (int)std::ceil(std::sqrt((double)n));
}

std::vector<double> CandidateGrid::beta_grid(long long n) {
  require(n >= 3, "beta_grid: n must be >= 3");
  const double ln_n = std::log((double)n);
  const int count = (int)std::ceil(ln_n * std::log(ln_n));
  std::vector<double> betas((std::size_t)std::max(1, count));
  const double q = 1.0 + 1.0 / ln_n;
  for (int j = 1; j <= (int)betas.size(); ++j)
    betas[(std::size_t)j - 1] = std::pow(q, (double)(-j + 1));
  return betas;
}

CandidateGrid CandidateGrid::dyadic(long long n) {
  CandidateGrid g;
  g.betas = beta_grid(n);
  const int kmax = k_max(n);
  for (int k = 1; k <= kmax; k *= 2) g.Ks.push_back(k);
  if (g.Ks.back() != kmax) g.Ks.push_back(kmax);
  return g;
}

CandidateGrid CandidateGrid::full(long long n) {
  CandidateGrid g;
  g.betas = beta_grid(n);
  for (int k = 1; k <= k_max(n); ++k) g.Ks.push_back(k);
  return g;
}

CandidateSet build_candidates(const Sample2D& x, double alpha, const CandidateGrid& grid,
                              const DensityParams& base_params) {
  require(!grid.Ks.empty() && !grid.betas.empty(), "build_candidates: empty grid");
  CandidateSet out;
  const long long n = (long long)x.size() - (long long)(x.size() % 4);
  std::map<std::pair<int, int>, int> seen;  // (K', j) -> candidate index
  for (int K : grid.Ks) {
    for (int j = 1; j <= (int)grid.betas.size(); ++j) {
      const double beta = grid.betas[(std::size_t)j - 1];
      CandidateInfo info{K, j, beta, -1};
      const int k_prime = choose_k_prime(K, beta, std::max<long long>(2, n),
                                         base_params.guard_log_scale);
      const auto key = std::make_pair(k_prime, j);
      auto it = seen.find(key);
      if (it != seen.end()) {
        info.distinct_id = out.info[(std::size_t)it->second].distinct_id;
        out.info.push_back(info);
        out.densities.push_back(out.densities[(std::size_t)it->second]);
        continue;
      }
      DensityParams p = base_params;
      p.alpha = alpha;
      p.K = K;
      p.beta = beta;
      try {
        auto res = alg2_density_2d(x, p);
        info.distinct_id = (int)seen.size();
        seen.emplace(key, (int)out.info.size());
        out.info.push_back(info);
        out.densities.push_back(std::move(res.density));
      } catch (const std::exception& e) {
        out.warnings.push_back("candidate (K=" + std::to_string(K) +
                               ", j=" + std::to_string(j) + ") dropped: " + e.what());
      }
    }
  }
  require(!out.info.empty(), "build_candidates: every candidate failed");
  return out;
}

namespace {

std::vector<double> overlay_breaks(std::vector<double> a, const std::vector<double>& b,
                                   const std::vector<double>& c) {
  a.insert(a.end(), b.begin(), b.end());
  a.insert(a.end(), c.begin(), c.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

} // namespace

double integrate_over_scheffe(const PiecewiseDensity2D& f, const PiecewiseDensity2D& fa,
                              const PiecewiseDensity2D& fb) {
  const auto gx = overlay_breaks(f.x_breaks(), fa.x_breaks(), fb.x_breaks());
  const auto gy = overlay_breaks(f.y_breaks(), fa.y_breaks(), fb.y_breaks());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < gx.size(); ++i) {
    const double mx = 0.5 * (gx[i] + gx[i + 1]);
    const double wx = gx[i + 1] - gx[i];
    if (wx <= 0.0) continue;
    for (std::size_t j = 0; j + 1 < gy.size(); ++j) {
      const double wy = gy[j + 1] - gy[j];
      if (wy <= 0.0) continue;
      const double my = 0.5 * (gy[j] + gy[j + 1]);
      if (fb.eval(mx, my) > fa.eval(mx, my)) total += f.eval(mx, my) * wx * wy;
    }
  }
  return total;
}

double empirical_measure_scheffe(const Sample2D& x, const PiecewiseDensity2D& fa,
                                 const PiecewiseDensity2D& fb) {
  if (x.empty()) return 0.0;
  long long hits = 0;
  for (const auto& [px, py] : x)
    if (fb.eval(px, py) > fa.eval(px, py)) ++hits;
  return (double)hits / (double)x.size();
}

std::pair<PiecewiseDensity2D, SelectionTrace>
min_distance_select(const std::vector<PiecewiseDensity2D>& candidates, const Sample2D& x) {
  require(!candidates.empty(), "min_distance_select: empty candidate list");

  SelectionTrace trace;
  // collapse exactly equal candidates; their Scheffe sets are empty and
  // their discrepancy columns coincide
  std::vector<int> distinct_of(candidates.size(), -1);
  std::vector<int> representative;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    for (std::size_t r = 0; r < representative.size(); ++r) {
      if (candidates[(std::size_t)representative[r]] == candidates[c]) {
        distinct_of[c] = (int)r;
        break;
      }
    }
    if (distinct_of[c] < 0) {
      distinct_of[c] = (int)representative.size();
      representative.push_back((int)c);
    }
  }
  const int M = (int)representative.size();

  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      if (a != b) trace.distinct_pairs.emplace_back(a, b);

  trace.distinct_table = Matrix::Zero(M, std::max<std::size_t>(1, trace.distinct_pairs.size()));
  for (std::size_t pi = 0; pi < trace.distinct_pairs.size(); ++pi) {
    const auto [a, b] = trace.distinct_pairs[pi];
    const auto& fa = candidates[(std::size_t)representative[(std::size_t)a]];
    const auto& fb = candidates[(std::size_t)representative[(std::size_t)b]];
    const double pn = empirical_measure_scheffe(x, fa, fb);
    for (int c = 0; c < M; ++c) {
      const auto& fc = candidates[(std::size_t)representative[(std::size_t)c]];
      trace.distinct_table(c, (Eigen::Index)pi) =
          std::abs(integrate_over_scheffe(fc, fa, fb) - pn);
    }
  }

  Vector max_disc = Vector::Zero(M);
  if (!trace.distinct_pairs.empty()) max_disc = trace.distinct_table.rowwise().maxCoeff();

  int best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c)
    if (max_disc(distinct_of[c]) < max_disc(distinct_of[(std::size_t)best])) best = (int)c;

  trace.selected_index = best;
  trace.distinct_of = distinct_of;
  trace.rows.resize(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    trace.rows[c].max_discrepancy = max_disc(distinct_of[c]);
    trace.rows[c].selected = (int)c == best;
  }
  return {candidates[(std::size_t)best], trace};
}

std::pair<PiecewiseDensity2D, SelectionTrace> min_distance_select(const CandidateSet& set,
                                                                  const Sample2D& x) {
  auto [density, trace] = min_distance_select(set.densities, x);
  for (std::size_t c = 0; c < set.info.size() && c < trace.rows.size(); ++c) {
    trace.rows[c].K = set.info[c].K;
    trace.rows[c].beta = set.info[c].beta;
  }
  return {std::move(density), std::move(trace)};
}

void write_selection_trace_csv(std::ostream& out, const SelectionTrace& trace) {
  out << "candidate_K,candidate_beta,max_discrepancy,selected_flag\n";
  for (const auto& row : trace.rows)
    out << row.K << ',' << format_double(row.beta) << ',' << format_double(row.max_discrepancy)
        << ',' << (row.selected ? 1 : 0) << '\n';
}

} // namespace lowrank
