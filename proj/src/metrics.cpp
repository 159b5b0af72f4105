#include "lowrank/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace lowrank {

namespace {

std::vector<double> merge_breaks(std::vector<double> breaks, double lo, double hi,
                                 int uniform_cells) {
  for (int i = 0; i <= uniform_cells; ++i)
    breaks.push_back(lo + (hi - lo) * (double)i / (double)uniform_cells);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  // drop degenerate slivers introduced by near-duplicate break values
  std::vector<double> out;
  out.push_back(breaks.front());
  for (double b : breaks)
    if (b > out.back()) out.push_back(b);
  return out;
}

double quadrature_l1(const PiecewiseDensity2D& est, const TruthFunction& truth, int cells) {
  double xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
  std::vector<double> xb = est.x_breaks(), yb = est.y_breaks();
  xb.insert(xb.end(), truth.x_breaks.begin(), truth.x_breaks.end());
  yb.insert(yb.end(), truth.y_breaks.begin(), truth.y_breaks.end());
  for (double b : xb) {
    xlo = std::min(xlo, b);
    xhi = std::max(xhi, b);
  }
  for (double b : yb) {
    ylo = std::min(ylo, b);
    yhi = std::max(yhi, b);
  }
  const auto gx = merge_breaks(std::move(xb), xlo, xhi, cells);
  const auto gy = merge_breaks(std::move(yb), ylo, yhi, cells);

  std::vector<double> my((std::size_t)gy.size() - 1), wy(my.size());
  for (std::size_t j = 0; j + 1 < gy.size(); ++j) {
    my[j] = 0.5 * (gy[j] + gy[j + 1]);
    wy[j] = gy[j + 1] - gy[j];
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < gx.size(); ++i) {
    const double mx = 0.5 * (gx[i] + gx[i + 1]);
    const double wx = gx[i + 1] - gx[i];
    double row = 0.0;
    for (std::size_t j = 0; j < my.size(); ++j)
      row += std::abs(est.eval(mx, my[j]) - truth.f(mx, my[j])) * wy[j];
    total += row * wx;
  }
  return total;
}

} // namespace

std::pair<double, double> density_l1_error(const PiecewiseDensity2D& est,
                                           const TruthFunction& truth,
                                           int quad_cells_per_axis) {
  require(quad_cells_per_axis >= 256, "density_l1_error: need at least 256 cells per axis");
  require((bool)truth.f, "density_l1_error: missing truth evaluator");
  const double coarse = quadrature_l1(est, truth, quad_cells_per_axis / 2);
  const double fine = quadrature_l1(est, truth, quad_cells_per_axis);
  return {fine, std::abs(fine - coarse)};
}

double density_l1_distance(const PiecewiseDensity2D& a, const PiecewiseDensity2D& b) {
  TruthFunction t;
  t.f = [&b](double x, double y) { return b.eval(x, y); };
  t.x_breaks = b.x_breaks();
  t.y_breaks = b.y_breaks();
  // both are piecewise constant on their break grids, so a single overlay
  // evaluation is exact; the refinement only subdivides constant cells
  return quadrature_l1(a, t, 256);
}

SlopeFit loglog_slope(const std::vector<std::pair<double, double>>& points) {
  require(points.size() >= 3, "loglog_slope: need at least 3 points");
  SlopeFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : points) {
    require(x > 0.0 && y > 0.0, "loglog_slope: values must be positive");
    const double lx = std::log(x), ly = std::log(y);
    fit.x.push_back(x);
    fit.y.push_back(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double m = (double)points.size();
  const double vxx = sxx - sx * sx / m;
  const double vxy = sxy - sx * sy / m;
  const double vyy = syy - sy * sy / m;
  require(vxx > 0.0, "loglog_slope: x values must not be all equal");
  fit.slope = vxy / vxx;
  fit.intercept = (sy - fit.slope * sx) / m;
  fit.r2 = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
  return fit;
}

} // namespace lowrank
