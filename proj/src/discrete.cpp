#include "lowrank/discrete.hpp"

#include "lowrank/linalg.hpp"

#include <cmath>

namespace lowrank {

FrequencyMatrix FrequencyMatrix::from_counts(const Matrix& counts, long long n) {
  require(n >= 1, "FrequencyMatrix: n must be positive");
  FrequencyMatrix h{counts / (double)n, n};
  h.validate();
  return h;
}

void FrequencyMatrix::validate() const {
  require(n >= 1, "FrequencyMatrix: n must be positive");
  require(values.size() > 0 && all_finite(values), "FrequencyMatrix: empty or non-finite");
  long double total = 0.0L;
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double v = values(i, j);
      require(v >= 0.0, "FrequencyMatrix: negative entry");
      const double scaled = v * (double)n;
      require(std::abs(scaled - std::round(scaled)) <= 1e-9,
              "FrequencyMatrix: entry is not a multiple of 1/n");
      total += v;
    }
  require(std::abs((double)(total - 1.0L)) <= 1e-12, "FrequencyMatrix: entries must sum to 1");
}

namespace {

int dyadic_index(double mass, int T) {
  if (mass > 1.0) mass = 1.0;  // guard against summation round-off
  for (int t = 0; t <= T; ++t) {
    if (mass > std::ldexp(1.0, -t - 1) && mass <= std::ldexp(1.0, -t)) return t;
  }
  return T + 1;
}

DyadicBlocks blocks_from_marginals(const Vector& row_mass, const Vector& col_mass, int d) {
  require(d >= 2, "dyadic blocks: d must be >= 2");
  DyadicBlocks b;
  b.T = (int)std::floor(std::log2((double)d)) - 1;
  b.row_sets.assign(b.T + 2, {});
  b.col_sets.assign(b.T + 2, {});
  for (int i = 0; i < row_mass.size(); ++i)
    b.row_sets[dyadic_index(row_mass(i), b.T)].push_back(i);
  for (int j = 0; j < col_mass.size(); ++j)
    b.col_sets[dyadic_index(col_mass(j), b.T)].push_back(j);
  return b;
}

} // namespace

DyadicBlocks build_dyadic_blocks(const FrequencyMatrix& h1, int d) {
  return blocks_from_marginals(h1.values.rowwise().sum(), h1.values.colwise().sum(), d);
}

DyadicBlocks oracle_blocks(const Matrix& p, int d) {
  return blocks_from_marginals(p.rowwise().sum(), p.colwise().sum(), d);
}

std::pair<FrequencyMatrix, FrequencyMatrix>
split_and_histogram(const std::vector<std::int64_t>& draws, int d1, int d2) {
  require(d1 >= 1 && d2 >= 1, "split_and_histogram: invalid shape");
  require(!draws.empty() && draws.size() % 2 == 0,
          "split_and_histogram: total observation count must be even");
  const long long n = (long long)draws.size() / 2;
  Matrix c1 = Matrix::Zero(d1, d2), c2 = Matrix::Zero(d1, d2);
  for (long long k = 0; k < 2 * n; ++k) {
    const std::int64_t cell = draws[(std::size_t)k];
    require(cell >= 0 && cell < (std::int64_t)d1 * d2, "split_and_histogram: cell out of range");
    (k < n ? c1 : c2)(cell / d2, cell % d2) += 1.0;
  }
  return {FrequencyMatrix::from_counts(c1, n), FrequencyMatrix::from_counts(c2, n)};
}

std::pair<FrequencyMatrix, FrequencyMatrix> split_and_histogram(const Matrix& counts, Rng& rng) {
  require(counts.size() > 0 && all_finite(counts), "split_and_histogram: empty or non-finite");
  long long total = 0;
  for (Eigen::Index i = 0; i < counts.rows(); ++i)
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
      const double v = counts(i, j);
      require(v >= 0.0 && std::abs(v - std::round(v)) <= 1e-9,
              "split_and_histogram: counts must be nonnegative integers");
      total += (long long)std::llround(v);
    }
  require(total > 0 && total % 2 == 0,
          "split_and_histogram: total observation count must be even");
  const long long n = total / 2;
  // Uniformly random n-subset of the 2n observations, cell by cell.
  Matrix c1 = Matrix::Zero(counts.rows(), counts.cols());
  long long remaining = total, need = n;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (Eigen::Index i = 0; i < counts.rows() && need >= 0; ++i)
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
      const long long y = (long long)std::llround(counts(i, j));
      for (long long u = 0; u < y; ++u) {
        if (need > 0 && u01(rng) * (double)remaining < (double)need) {
          c1(i, j) += 1.0;
          --need;
        }
        --remaining;
      }
    }
  const Matrix c2 = counts - c1;
  return {FrequencyMatrix::from_counts(c1, n), FrequencyMatrix::from_counts(c2, n)};
}

void Alg1Params::validate() const {
  require(alpha > 1.0, "Alg1Params: alpha must be > 1");
  require(d >= 2, "Alg1Params: d must be >= 2");
  require(N > 1.0, "Alg1Params: N must be > 1");
  require(n >= 1, "Alg1Params: n must be >= 1");
  require(tau_scale > 0.0, "Alg1Params: tau_scale must be positive");
}

Matrix histogram_estimate(const FrequencyMatrix& h1, const FrequencyMatrix& h2) {
  require(h1.values.rows() == h2.values.rows() && h1.values.cols() == h2.values.cols(),
          "histogram_estimate: shape mismatch");
  return 0.5 * (h1.values + h2.values);
}

Alg1Result localized_svd_estimate_with_blocks(const Alg1Params& params,
                                              const DyadicBlocks& blocks,
                                              const FrequencyMatrix& h1,
                                              const FrequencyMatrix& h2) {
  params.validate();
  require(h1.values.rows() == h2.values.rows() && h1.values.cols() == h2.values.cols(),
          "localized_svd_estimate: shape mismatch");
  require(h1.n == h2.n, "localized_svd_estimate: halves must have the same n");

  Alg1Result res;
  if ((double)params.n < 14.0 * params.alpha * params.d * std::log(params.N)) {
    res.estimate = histogram_estimate(h1, h2);
    res.branch = Alg1Branch::SmallSample;
    return res;
  }

  const Matrix& m = h2.values;
  Matrix sum = Matrix::Zero(m.rows(), m.cols());
  const double log_n_factor = std::log(params.N);
  for (int t = 0; t < (int)blocks.row_sets.size(); ++t) {
    for (int tp = 0; tp < (int)blocks.col_sets.size(); ++tp) {
      const auto& rows = blocks.row_sets[t];
      const auto& cols = blocks.col_sets[tp];
      if (rows.empty() || cols.empty()) continue;
      const double tau = params.tau_scale * 12.0 *
                         std::sqrt(params.alpha * log_n_factor / (double)params.n *
                                   std::ldexp(1.0, -std::min(t, tp)));
      Matrix block((int)rows.size(), (int)cols.size());
      for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b) block((int)a, (int)b) = m(rows[a], cols[b]);
      BlockTrace trace{t, tp, (int)rows.size(), (int)cols.size(), tau, 0.0, 0.0};
      if (!block.isZero(0.0)) {
        SvdResult s = svd(block);
        Vector shrunk = (s.singular_values.array() - tau / 2.0).cwiseMax(0.0);
        trace.nuclear_before = s.singular_values.sum();
        trace.nuclear_after = shrunk.sum();
        if (shrunk.maxCoeff() > 0.0) {
          const Matrix denoised =
              s.left_vectors * shrunk.asDiagonal() * s.right_vectors.transpose();
          for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b = 0; b < cols.size(); ++b)
              sum(rows[a], cols[b]) += denoised((int)a, (int)b);
        }
      }
      res.blocks.push_back(trace);
    }
  }

  res.pre_normalization = sum;
  Matrix positive = sum.cwiseMax(0.0);
  const double mass = positive.sum();
  if (positive.isZero(0.0) || mass <= 0.0) {
    res.estimate = histogram_estimate(h1, h2);
    res.branch = Alg1Branch::ZeroFallback;
  } else {
    res.estimate = positive / mass;
    res.branch = Alg1Branch::Normalized;
  }
  return res;
}

Alg1Result localized_svd_estimate(const Alg1Params& params, const FrequencyMatrix& h1,
                                  const FrequencyMatrix& h2) {
  params.validate();
  require(h1.values.rows() == h2.values.rows() && h1.values.cols() == h2.values.cols(),
          "localized_svd_estimate: shape mismatch");
  if ((double)params.n < 14.0 * params.alpha * params.d * std::log(params.N)) {
    Alg1Result res;
    res.estimate = histogram_estimate(h1, h2);
    res.branch = Alg1Branch::SmallSample;
    return res;
  }
  return localized_svd_estimate_with_blocks(params, build_dyadic_blocks(h1, params.d), h1, h2);
}

} // namespace lowrank
