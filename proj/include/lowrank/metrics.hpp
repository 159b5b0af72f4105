#pragma once

#include "lowrank/common.hpp"
#include "lowrank/density.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace lowrank {

/// Reference density used when measuring estimation error. Break hints mark
/// axis-aligned discontinuity lines; the quadrature grid is refined there so
/// piecewise-constant truths integrate exactly.
struct TruthFunction {
  std::function<double(double, double)> f;
  std::vector<double> x_breaks;
  std::vector<double> y_breaks;
};

/// L1 distance between a piecewise-constant estimate and a reference
/// density, by midpoint quadrature on the overlay of the estimate's grid
/// with a uniform refinement (quad_cells_per_axis >= 256). Returns the
/// value at the finer of two refinement levels and the difference between
/// the levels as a quadrature error bound.
std::pair<double, double> density_l1_error(const PiecewiseDensity2D& est,
                                           const TruthFunction& truth,
                                           int quad_cells_per_axis = 1024);

/// L1 distance between two piecewise-constant densities; exact on the
/// overlay of their grids.
double density_l1_distance(const PiecewiseDensity2D& a, const PiecewiseDensity2D& b);

/// Ordinary least squares on (ln x, ln y).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> x, y;
};

SlopeFit loglog_slope(const std::vector<std::pair<double, double>>& points);

} // namespace lowrank
