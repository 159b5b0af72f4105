#include "lowrank/rand.hpp"

#include <algorithm>
#include <cmath>

namespace lowrank {

bool is_prob_matrix(const Matrix& p, double tol) {
  if (p.size() == 0 || !all_finite(p)) return false;
  if ((p.array() < 0.0).any()) return false;
  return std::abs(p.sum() - 1.0) <= tol;
}

void validate_prob_matrix(const Matrix& p, double tol) {
  require(is_prob_matrix(p, tol), "not a probability matrix (negative entry or sum != 1)");
}

namespace {

// Walker/Vose alias table over the flattened cells.
struct AliasTable {
  std::vector<double> prob;
  std::vector<std::int64_t> alias;

  explicit AliasTable(const Matrix& p) {
    const std::int64_t m = p.size();
    prob.resize(m);
    alias.resize(m);
    std::vector<double> scaled(m);
    const double total = p.sum();
    for (std::int64_t c = 0; c < m; ++c) {
      // column-major storage; the flat index convention is row-major
      const std::int64_t i = c / p.cols(), j = c % p.cols();
      scaled[c] = p(i, j) / total * (double)m;
    }
    std::vector<std::int64_t> small, large;
    for (std::int64_t c = 0; c < m; ++c) (scaled[c] < 1.0 ? small : large).push_back(c);
    while (!small.empty() && !large.empty()) {
      const auto s = small.back(), l = large.back();
      small.pop_back();
      large.pop_back();
      prob[s] = scaled[s];
      alias[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (auto c : large) {
      prob[c] = 1.0;
      alias[c] = c;
    }
    for (auto c : small) {
      prob[c] = 1.0;
      alias[c] = c;
    }
  }

  std::int64_t draw(Rng& rng) const {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const std::int64_t m = (std::int64_t)prob.size();
    const std::int64_t c = std::min<std::int64_t>((std::int64_t)(u01(rng) * m), m - 1);
    return u01(rng) < prob[c] ? c : alias[c];
  }
};

} // namespace

std::vector<std::int64_t> sample_multinomial_sequence(const Matrix& p, long long n, Rng& rng) {
  validate_prob_matrix(p);
  require(n > 0, "sample_multinomial: n must be positive");
  AliasTable table(p);
  std::vector<std::int64_t> draws((std::size_t)n);
  for (auto& d : draws) d = table.draw(rng);
  return draws;
}

Matrix sample_multinomial(const Matrix& p, long long n, Rng& rng) {
  auto draws = sample_multinomial_sequence(p, n, rng);
  Matrix counts = Matrix::Zero(p.rows(), p.cols());
  for (auto c : draws) counts(c / p.cols(), c % p.cols()) += 1.0;
  return counts;
}

Matrix sample_poissonized(const Matrix& p, double lambda, Rng& rng) {
  validate_prob_matrix(p);
  require(lambda > 0.0, "sample_poissonized: lambda must be positive");
  Matrix counts = Matrix::Zero(p.rows(), p.cols());
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double mean = lambda * p(i, j);
      if (mean > 0.0) {
        std::poisson_distribution<long long> poi(mean);
        counts(i, j) = (double)poi(rng);
      }
    }
  return counts;
}

double AssouadMatrixSpec::gamma() const {
  const double dd = (double)D();
  return std::min(1.0 / (4.0 * std::sqrt((double)n * dd)), 1.0 / (2.0 * dd));
}

AssouadMatrixSpec AssouadMatrixSpec::random(int d1, int d2, int K, long long n, Rng& rng) {
  AssouadMatrixSpec s;
  s.d1 = d1;
  s.d2 = d2;
  s.K = K;
  s.n = n;
  s.signs.resize((std::size_t)K * (std::size_t)(d2 / 2));
  std::bernoulli_distribution coin(0.5);
  for (auto& e : s.signs) e = coin(rng) ? 1 : -1;
  return s;
}

Matrix assouad_matrix(const AssouadMatrixSpec& spec) {
  require(spec.d2 >= 2, "assouad_matrix: d2 must be >= 2");
  require(spec.K >= 1 && spec.K <= spec.d1, "assouad_matrix: need 1 <= K <= d1");
  require(spec.n >= 1, "assouad_matrix: n must be positive");
  const int D2 = spec.D2();
  require((std::int64_t)spec.signs.size() == (std::int64_t)spec.K * D2,
          "assouad_matrix: sign pattern must be K x floor(d2/2)");
  const double base = 1.0 / (double)spec.D();
  const double g = spec.gamma();
  Matrix p = Matrix::Zero(spec.d1, spec.d2);
  for (int i = 0; i < spec.K; ++i)
    for (int j = 0; j < D2; ++j) {
      const double e = (double)spec.signs[(std::size_t)i * D2 + j];
      p(i, j) = base + e * g;
      p(i, j + D2) = base - e * g;
    }
  return p;
}

int AssouadDensitySpec::k_prime() const {
  const int cap = (int)std::floor(std::pow((double)n, 1.0 / (2.0 * beta + 2.0)));
  return std::max(1, std::min(cap, K));
}

int AssouadDensitySpec::bumps_y() const {
  return (int)std::ceil(std::pow((double)n / k_prime(), 1.0 / (2.0 * beta + 1.0)));
}

AssouadDensitySpec AssouadDensitySpec::random(int K, long long n, double beta, double L,
                                              Rng& rng) {
  AssouadDensitySpec s;
  s.K = K;
  s.n = n;
  s.beta = beta;
  s.L = L;
  s.bits.resize((std::size_t)s.k_prime() * (std::size_t)s.bumps_y());
  std::bernoulli_distribution coin(0.5);
  for (auto& b : s.bits) b = coin(rng) ? 1 : 0;
  return s;
}

namespace {

double raw_bump(double t) {
  const double s = 2.0 * t;
  if (s <= -1.0 || s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

// beta-Hoelder constant of the raw bump, estimated on a probe grid.
double bump_hoelder_constant(double beta, int grid = 1024) {
  double c = 0.0;
  std::vector<double> vals(grid + 1);
  for (int i = 0; i <= grid; ++i) vals[i] = raw_bump(-0.5 + (double)i / grid);
  for (int i = 0; i <= grid; ++i)
    for (int j = i + 1; j <= grid; ++j) {
      const double dist = (double)(j - i) / grid;
      c = std::max(c, std::abs(vals[j] - vals[i]) / std::pow(dist, beta));
    }
  return c;
}

} // namespace

AssouadDensity::AssouadDensity(AssouadDensitySpec spec) : spec_(std::move(spec)) {
  require(spec_.beta > 0.0 && spec_.beta <= 1.0, "assouad_density: beta must be in (0,1]");
  require(spec_.K >= 1, "assouad_density: K must be >= 1");
  require(spec_.n >= 1, "assouad_density: n must be positive");
  require((std::int64_t)spec_.bits.size() ==
              (std::int64_t)spec_.k_prime() * spec_.bumps_y(),
          "assouad_density: bit pattern must be K' x H");
  const double c = bump_hoelder_constant(spec_.beta);
  bump_scale_ = std::min(1.0, 0.5 / c);
  amplitude_ = spec_.c_star() * spec_.L * std::pow(spec_.hy(), spec_.beta) *
               bump_scale_ * bump_scale_;
}

double AssouadDensity::bump(double t) const { return bump_scale_ * raw_bump(t); }

// V_{i,h}(t) = bump((t - t_i^-)/(h/2)) - bump((t - t_i^+)/(h/2)) with
// t_i^- = (i - 3/4) h and t_i^+ = (i - 1/4) h; supported on ((i-1)h, ih).
double AssouadDensity::v_diff(double t, double h, int index) const {
  const double lo = (index - 0.75) * h;
  const double hi = (index - 0.25) * h;
  return bump((t - lo) / (h / 2.0)) - bump((t - hi) / (h / 2.0));
}

double AssouadDensity::operator()(double x, double y) const {
  if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) return 0.0;
  const int kp = spec_.k_prime();
  const int hcount = spec_.bumps_y();
  const double hx = spec_.hx(), hy = spec_.hy();
  // at most one (i, j) bump pair covers a point, supports are disjoint
  const int i = std::min(kp, (int)std::floor(x / hx) + 1);
  const int j = std::min(hcount, (int)std::floor(y / hy) + 1);
  if (!spec_.bits[(std::size_t)(i - 1) * hcount + (j - 1)]) return 1.0;
  const double perturb = spec_.c_star() * spec_.L * std::pow(hy, spec_.beta) *
                         v_diff(x, hx, i) * v_diff(y, hy, j);
  return 1.0 + perturb;
}

double Piecewise1D::operator()(double x) const {
  if (breaks.size() < 2 || x < breaks.front() || x > breaks.back()) return 0.0;
  auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  std::size_t k = (std::size_t)std::distance(breaks.begin(), it);
  if (k == breaks.size()) k = breaks.size() - 1;  // x at the right endpoint
  if (k == 0) k = 1;
  const std::size_t cell = k - 1;
  if (kind == Kind::Constant) return values[cell];
  const double t = (x - breaks[cell]) / (breaks[cell + 1] - breaks[cell]);
  return values[cell] * (1.0 - t) + values[cell + 1] * t;
}

double Piecewise1D::integral() const {
  double s = 0.0;
  for (std::size_t c = 0; c + 1 < breaks.size(); ++c) {
    const double w = breaks[c + 1] - breaks[c];
    s += kind == Kind::Constant ? values[c] * w : 0.5 * (values[c] + values[c + 1]) * w;
  }
  return s;
}

double Piecewise1D::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double HolderMixtureSpec::operator()(double x, double y) const {
  double s = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k)
    s += weights[k] * components[k].u(x) * components[k].v(y);
  return s;
}

double HolderMixtureSpec::integral() const {
  double s = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k)
    s += weights[k] * components[k].u.integral() * components[k].v.integral();
  return s;
}

double HolderMixtureSpec::upper_bound() const {
  std::vector<double> xb, yb;
  for (const auto& c : components) {
    xb.insert(xb.end(), c.u.breaks.begin(), c.u.breaks.end());
    yb.insert(yb.end(), c.v.breaks.begin(), c.v.breaks.end());
  }
  std::sort(xb.begin(), xb.end());
  xb.erase(std::unique(xb.begin(), xb.end()), xb.end());
  std::sort(yb.begin(), yb.end());
  yb.erase(std::unique(yb.begin(), yb.end()), yb.end());
  double m = 0.0;
  for (double x : xb)
    for (double y : yb) m = std::max(m, (*this)(x, y));
  // piecewise-constant pieces attain their value on cell interiors as well
  for (std::size_t i = 0; i + 1 < xb.size(); ++i)
    for (std::size_t j = 0; j + 1 < yb.size(); ++j)
      m = std::max(m, (*this)(0.5 * (xb[i] + xb[i + 1]), 0.5 * (yb[j] + yb[j + 1])));
  return m;
}

void HolderMixtureSpec::validate(int probe_cells_per_axis) const {
  require(components.size() == weights.size(), "mixture: one weight per component");
  require(!components.empty(), "mixture: at least one component");
  const int g = probe_cells_per_axis;
  for (int i = 0; i <= g; ++i)
    for (int j = 0; j <= g; ++j)
      require((*this)((double)i / g, (double)j / g) >= -1e-12,
              "mixture: negative value on probe grid");
  require(std::abs(integral() - 1.0) <= 1e-6, "mixture: integral must be 1");
}

Sample2D sample_from_density(const std::function<double(double, double)>& f, double B,
                             long long n, Rng& rng, long long* proposals_out) {
  require(B > 0.0, "sample_from_density: envelope B must be positive");
  require(n >= 0, "sample_from_density: n must be nonnegative");
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Sample2D pts;
  pts.reserve((std::size_t)n);
  long long proposals = 0;
  while ((long long)pts.size() < n) {
    const double x = u01(rng), y = u01(rng);
    const double u = B * u01(rng);
    ++proposals;
    if (u < f(x, y)) pts.emplace_back(x, y);
    if (proposals >= 10000000LL &&
        (double)pts.size() / (double)proposals < 1e-4)
      throw std::runtime_error("sample_from_density: degenerate envelope, acceptance < 1e-4");
  }
  if (proposals_out) *proposals_out = proposals;
  return pts;
}

Vector dirichlet_vector(int d, double concentration, Rng& rng) {
  require(d >= 1, "dirichlet_vector: d must be >= 1");
  require(concentration > 0.0, "dirichlet_vector: concentration must be positive");
  std::gamma_distribution<double> gam(concentration, 1.0);
  Vector v(d);
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    v(i) = gam(rng);
    total += v(i);
  }
  if (total <= 0.0) {  // all draws underflowed; fall back to a point mass
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / total;
}

Matrix low_rank_dirichlet_matrix(int d1, int d2, int K, double concentration, Rng& rng) {
  require(K >= 1 && K <= std::min(d1, d2), "low_rank_dirichlet_matrix: need 1 <= K <= min(d1,d2)");
  const Vector w = dirichlet_vector(K, 1.0, rng);
  Matrix p = Matrix::Zero(d1, d2);
  for (int k = 0; k < K; ++k) {
    const Vector u = dirichlet_vector(d1, concentration, rng);
    const Vector v = dirichlet_vector(d2, concentration, rng);
    p.noalias() += w(k) * u * v.transpose();
  }
  return p;
}

Matrix low_rank_dirichlet_matrix(int d, int K, double concentration, Rng& rng) {
  return low_rank_dirichlet_matrix(d, d, K, concentration, rng);
}

} // namespace lowrank
