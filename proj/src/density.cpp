#include "lowrank/density.hpp"

#include "lowrank/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lowrank {

double PiecewiseDensity1D::eval(double z) const {
  if (z < lo || z > hi) return 0.0;
  if (is_uniform) return 1.0 / (hi - lo);
  const int ell = (int)values.size();
  int j = (int)std::floor((z - lo) / h);
  if (j < 0) j = 0;
  if (j >= ell) j = ell - 1;  // last bin is closed
  return values[(std::size_t)j];
}

double PiecewiseDensity1D::integral() const {
  if (is_uniform) return 1.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s * h;
}

std::vector<double> PiecewiseDensity1D::breaks() const {
  if (is_uniform) return {lo, hi};
  std::vector<double> b;
  b.reserve(values.size() + 1);
  for (std::size_t j = 0; j < values.size(); ++j) b.push_back(lo + (double)j * h);
  b.push_back(hi);
  return b;
}

void PiecewiseDensity1D::validate() const {
  require(hi > lo, "PiecewiseDensity1D: support must have positive width");
  if (!is_uniform) {
    require(h > 0.0 && !values.empty(), "PiecewiseDensity1D: missing bins");
    for (double v : values) require(v >= 0.0, "PiecewiseDensity1D: negative bin value");
  }
  require(std::abs(integral() - 1.0) <= 1e-9, "PiecewiseDensity1D: integral must be 1");
}

const char* to_string(Alg2Branch b) {
  switch (b) {
    case Alg2Branch::DegenerateX: return "degenerate_x";
    case Alg2Branch::DegenerateY: return "degenerate_y";
    case Alg2Branch::GridHistogram: return "grid_histogram";
    case Alg2Branch::GridLowRank: return "grid_lowrank";
    case Alg2Branch::UniformFallback: return "uniform";
  }
  return "uniform";
}

Alg2Branch alg2_branch_from_string(const std::string& s) {
  if (s == "degenerate_x") return Alg2Branch::DegenerateX;
  if (s == "degenerate_y") return Alg2Branch::DegenerateY;
  if (s == "grid_histogram") return Alg2Branch::GridHistogram;
  if (s == "grid_lowrank") return Alg2Branch::GridLowRank;
  if (s == "uniform") return Alg2Branch::UniformFallback;
  throw InvalidInput("unknown branch tag '" + s + "'");
}

PiecewiseDensity2D PiecewiseDensity2D::uniform_unit_square() {
  PiecewiseDensity2D f;
  f.branch = Alg2Branch::UniformFallback;
  return f;
}

namespace {

bool grid_form(Alg2Branch b) {
  return b == Alg2Branch::GridHistogram || b == Alg2Branch::GridLowRank;
}

bool separable_form(Alg2Branch b) {
  return b == Alg2Branch::DegenerateX || b == Alg2Branch::DegenerateY;
}

} // namespace

double PiecewiseDensity2D::eval(double x, double y) const {
  switch (branch) {
    case Alg2Branch::UniformFallback:
      return (x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0) ? 1.0 : 0.0;
    case Alg2Branch::DegenerateX: {
      if (x < thin_lo || x > thin_hi) return 0.0;
      return g.eval(y) / (thin_hi - thin_lo);
    }
    case Alg2Branch::DegenerateY: {
      if (y < thin_lo || y > thin_hi) return 0.0;
      return g.eval(x) / (thin_hi - thin_lo);
    }
    default: {
      const double x_lo = r1 + e1_min * h1, x_hi = r1 + (e1_max + 1) * h1;
      const double y_lo = r2 + e2_min * h2, y_hi = r2 + (e2_max + 1) * h2;
      if (x < x_lo || x > x_hi || y < y_lo || y > y_hi) return 0.0;
      const int jx = std::min((int)std::floor((x - r1) / h1), e1_max);
      const int jy = std::min((int)std::floor((y - r2) / h2), e2_max);
      if (jx < e1_min || jy < e2_min) return 0.0;
      return cell_values(jx - e1_min, jy - e2_min);
    }
  }
}

double PiecewiseDensity2D::integral() const {
  if (branch == Alg2Branch::UniformFallback) return 1.0;
  if (separable_form(branch)) return g.integral();
  return cell_values.sum() * h1 * h2;
}

std::vector<double> PiecewiseDensity2D::x_breaks() const {
  if (branch == Alg2Branch::UniformFallback) return {0.0, 1.0};
  if (branch == Alg2Branch::DegenerateX) return {thin_lo, thin_hi};
  if (branch == Alg2Branch::DegenerateY) return g.breaks();
  std::vector<double> b;
  for (int j = e1_min; j <= e1_max + 1; ++j) b.push_back(r1 + (double)j * h1);
  return b;
}

std::vector<double> PiecewiseDensity2D::y_breaks() const {
  if (branch == Alg2Branch::UniformFallback) return {0.0, 1.0};
  if (branch == Alg2Branch::DegenerateY) return {thin_lo, thin_hi};
  if (branch == Alg2Branch::DegenerateX) return g.breaks();
  std::vector<double> b;
  for (int j = e2_min; j <= e2_max + 1; ++j) b.push_back(r2 + (double)j * h2);
  return b;
}

void PiecewiseDensity2D::validate() const {
  if (branch == Alg2Branch::UniformFallback) return;
  if (separable_form(branch)) {
    require(thin_hi > thin_lo, "PiecewiseDensity2D: empty thin interval");
    g.validate();
  } else {
    require(h1 > 0.0 && h2 > 0.0, "PiecewiseDensity2D: cell widths must be positive");
    require(e1_max >= e1_min && e2_max >= e2_min, "PiecewiseDensity2D: empty index ranges");
    require(cell_values.rows() == e1_max - e1_min + 1 &&
                cell_values.cols() == e2_max - e2_min + 1,
            "PiecewiseDensity2D: cell value shape mismatch");
    require((cell_values.array() >= 0.0).all(), "PiecewiseDensity2D: negative cell value");
  }
  require(std::abs(integral() - 1.0) <= 1e-9, "PiecewiseDensity2D: integral must be 1");
}

bool PiecewiseDensity2D::operator==(const PiecewiseDensity2D& other) const {
  if (branch != other.branch) return false;
  if (branch == Alg2Branch::UniformFallback) return true;
  if (separable_form(branch)) {
    return thin_lo == other.thin_lo && thin_hi == other.thin_hi &&
           g.is_uniform == other.g.is_uniform && g.lo == other.g.lo && g.hi == other.g.hi &&
           g.h == other.g.h && g.values == other.g.values;
  }
  return r1 == other.r1 && r2 == other.r2 && h1 == other.h1 && h2 == other.h2 &&
         e1_min == other.e1_min && e1_max == other.e1_max && e2_min == other.e2_min &&
         e2_max == other.e2_max && cell_values.rows() == other.cell_values.rows() &&
         cell_values.cols() == other.cell_values.cols() &&
         (cell_values.array() == other.cell_values.array()).all();
}

void DensityParams::validate() const {
  require(alpha > 1.0, "DensityParams: alpha must be > 1");
  require(K >= 1, "DensityParams: K must be >= 1");
  require(beta > 0.0 && beta <= 1.0, "DensityParams: beta must be in (0,1]");
  require(L > 0.0, "DensityParams: L must be positive");
  require(guard_log_scale >= 0.0, "DensityParams: guard_log_scale must be >= 0");
  require(tau_scale > 0.0, "DensityParams: tau_scale must be positive");
}

bool k_prime_guard_holds(int K, double beta, long long n, double guard_log_scale) {
  require(n >= 2, "choose_k_prime: n must be >= 2");
  require(K >= 1, "choose_k_prime: K must be >= 1");
  require(beta > 0.0 && beta <= 1.0, "choose_k_prime: beta must be in (0,1]");
  const double log_factor =
      std::max(1.0, guard_log_scale * std::pow(std::log((double)n), 1.5));
  const double lhs = std::pow((double)K / (double)n, beta / (2.0 * beta + 1.0)) * log_factor;
  const double rhs = std::pow((double)n, -beta / (2.0 * beta + 2.0));
  return lhs <= rhs;
}

int choose_k_prime(int K, double beta, long long n, double guard_log_scale) {
  if (k_prime_guard_holds(K, beta, n, guard_log_scale)) return K;
  return (int)std::ceil(std::pow((double)n, 1.0 / (2.0 * beta + 2.0)));
}

std::pair<double, double> estimate_support_1d(const std::vector<double>& z) {
  require(!z.empty(), "estimate_support_1d: empty sample");
  const std::size_t k = std::max<std::size_t>(1, z.size() / 2);
  double lo = z[0], hi = z[0];
  for (std::size_t i = 1; i < k; ++i) {
    lo = std::min(lo, z[i]);
    hi = std::max(hi, z[i]);
  }
  return {lo, hi};
}

PiecewiseDensity1D alg3_density_1d(const std::vector<double>& z, int k_prime, double beta) {
  require(z.size() >= 2, "alg3_density_1d: need at least 2 observations");
  require(k_prime >= 1, "alg3_density_1d: K' must be >= 1");
  require(beta > 0.0 && beta <= 1.0, "alg3_density_1d: beta must be in (0,1]");
  const long long n = (long long)z.size();
  const auto [lo, hi] = estimate_support_1d(z);
  const double h_star = std::pow((double)k_prime / (double)n, 1.0 / (2.0 * beta + 1.0));

  PiecewiseDensity1D out;
  if (hi - lo < h_star) {
    out.is_uniform = true;
    if (hi > lo) {
      out.lo = lo;
      out.hi = hi;
    } else {
      // all first-half points equal: uniform of width h* centered at the
      // point, clipped to [0,1]
      out.lo = std::max(0.0, lo - h_star / 2.0);
      out.hi = std::min(1.0, lo + h_star / 2.0);
    }
    return out;
  }

  const int ell = (int)std::floor((hi - lo) / h_star);
  const double h = (hi - lo) / (double)ell;
  const std::size_t first_count = z.size() / 2;
  const long long m = n - (long long)first_count;
  std::vector<double> counts((std::size_t)ell, 0.0);
  for (std::size_t i = first_count; i < z.size(); ++i) {
    int j = (int)std::floor((z[i] - lo) / h);
    // points beyond the estimated support go to the nearest boundary bin
    if (j < 0) j = 0;
    if (j >= ell) j = ell - 1;
    counts[(std::size_t)j] += 1.0;
  }
  out.is_uniform = false;
  out.lo = lo;
  out.hi = hi;
  out.h = h;
  out.values.resize((std::size_t)ell);
  for (int j = 0; j < ell; ++j) out.values[(std::size_t)j] = counts[(std::size_t)j] / ((double)m * h);
  return out;
}

PiecewiseDensity2D density_l1_normalize(const PiecewiseDensity2D& phi) {
  if (phi.branch == Alg2Branch::UniformFallback) return phi;
  PiecewiseDensity2D out = phi;
  if (separable_form(phi.branch)) {
    for (double v : phi.g.values) require(v >= 0.0, "density_l1_normalize: negative value");
    const double mass = phi.g.is_uniform ? 1.0 : phi.g.integral();
    if (mass <= 0.0) return PiecewiseDensity2D::uniform_unit_square();
    if (!phi.g.is_uniform)
      for (auto& v : out.g.values) v /= mass;
    return out;
  }
  require((phi.cell_values.array() >= 0.0).all(), "density_l1_normalize: negative value");
  const double mass = phi.integral();
  if (mass <= 0.0) return PiecewiseDensity2D::uniform_unit_square();
  out.cell_values = phi.cell_values / mass;
  return out;
}

namespace {

std::vector<double> project(const Sample2D& pts, std::size_t from, std::size_t to, int axis) {
  std::vector<double> z;
  z.reserve(to - from);
  for (std::size_t i = from; i < to; ++i)
    z.push_back(axis == 0 ? pts[i].first : pts[i].second);
  return z;
}

} // namespace

Alg2Result alg2_density_2d(const Sample2D& x, const DensityParams& params) {
  params.validate();
  require((long long)x.size() >= 8, "alg2_density_2d: n must be at least 8");
  for (const auto& [a, b] : x)
    require(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0,
            "alg2_density_2d: sample coordinates must lie in [0,1]");

  Alg2Result res;
  const long long n = (long long)x.size() - (long long)(x.size() % 4);
  res.n_used = n;
  res.n_truncated = (long long)x.size() - n;

  // support from the whole first half of the sample
  const std::size_t half = (std::size_t)(n / 2);
  double r[2], R[2];
  for (int axis = 0; axis < 2; ++axis) {
    auto z = project(x, 0, half, axis);
    r[axis] = *std::min_element(z.begin(), z.end());
    R[axis] = *std::max_element(z.begin(), z.end());
  }

  const int k_prime = choose_k_prime(params.K, params.beta, n, params.guard_log_scale);
  const bool low_rank_regime =
      k_prime_guard_holds(params.K, params.beta, n, params.guard_log_scale);
  const double h_star = std::pow((double)k_prime / (double)n, 1.0 / (2.0 * params.beta + 1.0));
  res.k_prime = k_prime;
  res.h_star = h_star;

  PiecewiseDensity2D phi;
  if (R[0] - r[0] < h_star || R[1] - r[1] < h_star) {
    const int thin = (R[0] - r[0] < h_star) ? 0 : 1;
    phi.branch = thin == 0 ? Alg2Branch::DegenerateX : Alg2Branch::DegenerateY;
    phi.thin_axis = thin;
    if (R[thin] > r[thin]) {
      phi.thin_lo = r[thin];
      phi.thin_hi = R[thin];
    } else {
      phi.thin_lo = std::max(0.0, r[thin] - h_star / 2.0);
      phi.thin_hi = std::min(1.0, r[thin] + h_star / 2.0);
    }
    auto zs = project(x, half, (std::size_t)n, 1 - thin);
    phi.g = alg3_density_1d(zs, k_prime, params.beta);
  } else {
    int ell[2], e_min[2], e_max[2];
    double h[2];
    for (int axis = 0; axis < 2; ++axis) {
      ell[axis] = (int)std::floor((R[axis] - r[axis]) / h_star);
      h[axis] = (R[axis] - r[axis]) / (double)ell[axis];
      e_min[axis] = -(int)std::ceil(r[axis] / h[axis]);
      e_max[axis] = (int)std::ceil((1.0 - r[axis]) / h[axis]);
    }
    const int n1 = e_max[0] - e_min[0] + 1, n2 = e_max[1] - e_min[1] + 1;
    Matrix G = Matrix::Zero(n1, n2), Gp = Matrix::Zero(n1, n2);
    const long long quarter = n / 4;
    for (long long i = n / 2; i < n; ++i) {
      const auto& [px, py] = x[(std::size_t)i];
      const int jx = (int)std::floor((px - r[0]) / h[0]);
      const int jy = (int)std::floor((py - r[1]) / h[1]);
      require(jx >= e_min[0] && jx <= e_max[0] && jy >= e_min[1] && jy <= e_max[1],
              "alg2_density_2d: point escaped the extended grid");
      (i < 3 * n / 4 ? G : Gp)(jx - e_min[0], jy - e_min[1]) += 1.0;
    }
    G /= (double)quarter;
    Gp /= (double)quarter;

    Matrix p_star;
    if (!low_rank_regime) {
      p_star = 0.5 * (G + Gp);
      phi.branch = Alg2Branch::GridHistogram;
    } else {
      Alg1Params ap;
      ap.alpha = params.alpha;
      ap.d = std::max(n1, n2);
      ap.N = params.N_override > 0.0 ? params.N_override : (double)n;
      ap.n = quarter;
      ap.tau_scale = params.tau_scale;
      auto h1f = FrequencyMatrix::from_counts(G * (double)quarter, quarter);
      auto h2f = FrequencyMatrix::from_counts(Gp * (double)quarter, quarter);
      p_star = localized_svd_estimate(ap, h1f, h2f).estimate;
      phi.branch = Alg2Branch::GridLowRank;
    }
    phi.r1 = r[0];
    phi.R1 = R[0];
    phi.r2 = r[1];
    phi.R2 = R[1];
    phi.h1 = h[0];
    phi.h2 = h[1];
    phi.e1_min = e_min[0];
    phi.e1_max = e_max[0];
    phi.e2_min = e_min[1];
    phi.e2_max = e_max[1];
    phi.cell_values = p_star / (h[0] * h[1]);
  }

  res.branch = phi.branch;
  res.pre_normalization = phi;
  res.density = density_l1_normalize(phi);
  res.density.validate();
  return res;
}

PiecewiseDensity2D histogram_density_2d(const Sample2D& x) {
  require(!x.empty(), "histogram_density_2d: empty sample");
  const long long n = (long long)x.size();
  const int ell = (int)std::ceil(std::pow((double)n, 0.25));
  const double h = 1.0 / (double)ell;
  PiecewiseDensity2D f;
  f.branch = Alg2Branch::GridHistogram;
  f.r1 = 0.0;
  f.R1 = 1.0;
  f.r2 = 0.0;
  f.R2 = 1.0;
  f.h1 = h;
  f.h2 = h;
  f.e1_min = 0;
  f.e1_max = ell - 1;
  f.e2_min = 0;
  f.e2_max = ell - 1;
  Matrix counts = Matrix::Zero(ell, ell);
  for (const auto& [px, py] : x) {
    require(px >= 0.0 && px <= 1.0 && py >= 0.0 && py <= 1.0,
            "histogram_density_2d: sample coordinates must lie in [0,1]");
    const int jx = std::min((int)std::floor(px / h), ell - 1);
    const int jy = std::min((int)std::floor(py / h), ell - 1);
    counts(jx, jy) += 1.0;
  }
  f.cell_values = counts / ((double)n * h * h);
  return f;
}

void write_density(std::ostream& out, const PiecewiseDensity2D& f) {
  out << "branch " << to_string(f.branch) << '\n';
  if (f.branch == Alg2Branch::UniformFallback) return;
  if (separable_form(f.branch)) {
    out << "support " << format_double(f.thin_lo) << ' ' << format_double(f.thin_hi) << ' '
        << format_double(f.g.lo) << ' ' << format_double(f.g.hi) << '\n';
    if (f.g.is_uniform) {
      out << "g uniform\n";
    } else {
      out << "g binned " << format_double(f.g.h) << ' ' << f.g.values.size() << '\n';
      for (std::size_t j = 0; j < f.g.values.size(); ++j) {
        if (j) out << ' ';
        out << format_double(f.g.values[j]);
      }
      out << '\n';
    }
    return;
  }
  out << "support " << format_double(f.r1) << ' ' << format_double(f.R1) << ' '
      << format_double(f.r2) << ' ' << format_double(f.R2) << '\n';
  out << "h " << format_double(f.h1) << ' ' << format_double(f.h2) << '\n';
  out << "E " << f.e1_min << ' ' << f.e1_max << ' ' << f.e2_min << ' ' << f.e2_max << '\n';
  for (Eigen::Index i = 0; i < f.cell_values.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.cell_values.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(f.cell_values(i, j));
    }
    out << '\n';
  }
}

void write_density_file(const std::string& path, const PiecewiseDensity2D& f) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_density(file, f);
}

namespace {

std::vector<std::string> next_tokens(std::istream& in, int& lineno) {
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    if (!toks.empty()) return toks;
  }
  throw ParseError("unexpected end of density file", lineno + 1, 1);
}

double tok_double(const std::vector<std::string>& toks, std::size_t k, int lineno) {
  if (k >= toks.size()) throw ParseError("missing field", lineno, (int)k + 1);
  try {
    return std::stod(toks[k]);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + toks[k] + "'", lineno, (int)k + 1);
  }
}

} // namespace

PiecewiseDensity2D read_density(std::istream& in) {
  int lineno = 0;
  auto head = next_tokens(in, lineno);
  if (head.size() != 2 || head[0] != "branch")
    throw ParseError("expected 'branch <tag>'", lineno, 1);
  PiecewiseDensity2D f;
  f.branch = alg2_branch_from_string(head[1]);
  if (f.branch == Alg2Branch::UniformFallback) return f;

  auto sup = next_tokens(in, lineno);
  if (sup.size() != 5 || sup[0] != "support")
    throw ParseError("expected 'support a b c d'", lineno, 1);

  if (separable_form(f.branch)) {
    f.thin_axis = f.branch == Alg2Branch::DegenerateX ? 0 : 1;
    f.thin_lo = tok_double(sup, 1, lineno);
    f.thin_hi = tok_double(sup, 2, lineno);
    f.g.lo = tok_double(sup, 3, lineno);
    f.g.hi = tok_double(sup, 4, lineno);
    auto gl = next_tokens(in, lineno);
    if (gl.size() >= 2 && gl[0] == "g" && gl[1] == "uniform") {
      f.g.is_uniform = true;
    } else if (gl.size() == 4 && gl[0] == "g" && gl[1] == "binned") {
      f.g.is_uniform = false;
      f.g.h = tok_double(gl, 2, lineno);
      const int ell = (int)tok_double(gl, 3, lineno);
      auto vals = next_tokens(in, lineno);
      if ((int)vals.size() != ell)
        throw ParseError("expected " + std::to_string(ell) + " bin values", lineno, 1);
      for (int j = 0; j < ell; ++j) f.g.values.push_back(tok_double(vals, (std::size_t)j, lineno));
    } else {
      throw ParseError("expected 'g uniform' or 'g binned h ell'", lineno, 1);
    }
    return f;
  }

  f.r1 = tok_double(sup, 1, lineno);
  f.R1 = tok_double(sup, 2, lineno);
  f.r2 = tok_double(sup, 3, lineno);
  f.R2 = tok_double(sup, 4, lineno);
  auto hl = next_tokens(in, lineno);
  if (hl.size() != 3 || hl[0] != "h") throw ParseError("expected 'h h1 h2'", lineno, 1);
  f.h1 = tok_double(hl, 1, lineno);
  f.h2 = tok_double(hl, 2, lineno);
  auto el = next_tokens(in, lineno);
  if (el.size() != 5 || el[0] != "E")
    throw ParseError("expected 'E e1min e1max e2min e2max'", lineno, 1);
  f.e1_min = (int)tok_double(el, 1, lineno);
  f.e1_max = (int)tok_double(el, 2, lineno);
  f.e2_min = (int)tok_double(el, 3, lineno);
  f.e2_max = (int)tok_double(el, 4, lineno);
  const int rows = f.e1_max - f.e1_min + 1, cols = f.e2_max - f.e2_min + 1;
  if (rows < 1 || cols < 1) throw ParseError("empty index ranges", lineno, 1);
  f.cell_values.resize(rows, cols);
  for (int i = 0; i < rows; ++i) {
    auto vals = next_tokens(in, lineno);
    if ((int)vals.size() != cols)
      throw ParseError("expected " + std::to_string(cols) + " cell values", lineno, 1);
    for (int j = 0; j < cols; ++j) f.cell_values(i, j) = tok_double(vals, (std::size_t)j, lineno);
  }
  return f;
}

PiecewiseDensity2D read_density_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  return read_density(file);
}

} // namespace lowrank
