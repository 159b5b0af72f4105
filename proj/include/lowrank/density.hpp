#pragma once

#include "lowrank/common.hpp"
#include "lowrank/io.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lowrank {

/// Piecewise-constant density on an interval [lo, hi]: either a single
/// uniform value or ell bins of width h, last bin closed.
struct PiecewiseDensity1D {
  double lo = 0.0, hi = 1.0;
  bool is_uniform = true;
  double h = 0.0;              // bin width (binned form)
  std::vector<double> values;  // per-bin density values (binned form)

  double eval(double z) const;
  double integral() const;
  std::vector<double> breaks() const;
  void validate() const;
};

enum class Alg2Branch {
  DegenerateX,   // estimated x-support thinner than h*
  DegenerateY,   // estimated y-support thinner than h*
  GridHistogram, // cell grid, histogram average (2D-rate regime)
  GridLowRank,   // cell grid, localized SVD estimate
  UniformFallback,
};

const char* to_string(Alg2Branch b);
Alg2Branch alg2_branch_from_string(const std::string& s);

/// Piecewise-constant density on an axis-aligned cell grid anchored at an
/// estimated support rectangle, or a separable degenerate form
/// (uniform in one axis times a 1D density), or the uniform fallback.
struct PiecewiseDensity2D {
  Alg2Branch branch = Alg2Branch::UniformFallback;

  // grid form
  double r1 = 0.0, R1 = 1.0, r2 = 0.0, R2 = 1.0;
  double h1 = 0.0, h2 = 0.0;
  int e1_min = 0, e1_max = -1, e2_min = 0, e2_max = -1;
  Matrix cell_values;  // |E1| x |E2| density values

  // separable form: uniform on [thin_lo, thin_hi] along thin_axis,
  // g along the other axis
  int thin_axis = -1;
  double thin_lo = 0.0, thin_hi = 1.0;
  PiecewiseDensity1D g;

  double eval(double x, double y) const;
  double integral() const;
  std::vector<double> x_breaks() const;
  std::vector<double> y_breaks() const;
  void validate() const;

  bool operator==(const PiecewiseDensity2D& other) const;

  static PiecewiseDensity2D uniform_unit_square();
};

/// Density estimator inputs. alpha, tau_scale and N_override are forwarded
/// into the discrete estimator; L is used only by generators and metrics.
struct DensityParams {
  double alpha = 2.0;  // > 1
  int K = 1;           // >= 1
  double beta = 1.0;   // in (0, 1]
  double L = 1.0;
  double N_override = 0.0;      // 0 means N = n, as the algorithm passes
  double guard_log_scale = 1.0; // scale on the log^{3/2}(n) guard factor
  double tau_scale = 1.0;

  void validate() const;
};

/// Rate-selection rule: returns K when
/// (K/n)^{beta/(2 beta+1)} * s * log^{3/2}(n) <= n^{-beta/(2 beta+2)}
/// and ceil(n^{1/(2 beta+2)}) otherwise (s = guard_log_scale).
int choose_k_prime(int K, double beta, long long n, double guard_log_scale = 1.0);
bool k_prime_guard_holds(int K, double beta, long long n, double guard_log_scale = 1.0);

/// Sample min and max of the first floor(n/2) points of z (of the single
/// point when n = 1). Throws on empty input.
std::pair<double, double> estimate_support_1d(const std::vector<double>& z);

/// One-dimensional histogram density estimator: support from the first half,
/// bandwidth h* = (K'/n)^{1/(2 beta+1)}, counts from the second half.
/// Second-half points outside the estimated support are assigned to the
/// nearest boundary bin so the output always integrates to 1. When the
/// first-half points are all equal the output is a uniform of width h*
/// centered at the point, clipped to [0,1].
PiecewiseDensity1D alg3_density_1d(const std::vector<double>& z, int k_prime, double beta);

struct Alg2Result {
  PiecewiseDensity2D density;            // f-hat
  PiecewiseDensity2D pre_normalization;  // phi-hat
  Alg2Branch branch = Alg2Branch::UniformFallback;
  int k_prime = 0;
  double h_star = 0.0;
  long long n_used = 0;
  long long n_truncated = 0;  // observations dropped to reach a multiple of 4
};

/// Two-dimensional density estimator. Requires n >= 8; truncates the sample
/// to the largest multiple of 4 and records the truncation.
Alg2Result alg2_density_2d(const Sample2D& x, const DensityParams& params);

/// Divides a nonnegative piecewise density by its L1 norm; returns the
/// uniform density on the unit square when the norm is zero.
PiecewiseDensity2D density_l1_normalize(const PiecewiseDensity2D& phi);

/// Classical full-sample histogram on [0,1]^2 with ceil(n^{1/4}) bins per
/// axis (bin width about n^{-1/4}); the baseline of the simulation study.
PiecewiseDensity2D histogram_density_2d(const Sample2D& x);

/// Density text serialization: a header with the branch tag, support,
/// cell widths and index ranges, then cell values row-major.
void write_density(std::ostream& out, const PiecewiseDensity2D& f);
void write_density_file(const std::string& path, const PiecewiseDensity2D& f);
PiecewiseDensity2D read_density(std::istream& in);
PiecewiseDensity2D read_density_file(const std::string& path);

} // namespace lowrank
