#pragma once

#include "lowrank/common.hpp"
#include "lowrank/io.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace lowrank {

/// A probability matrix: entries >= 0 summing to 1 within tol.
bool is_prob_matrix(const Matrix& p, double tol = 1e-10);
void validate_prob_matrix(const Matrix& p, double tol = 1e-10);

/// Draws counts distributed M(p, n). The draw sequence variant returns the
/// individual observations as flat cell indices (row-major), which the
/// sample-splitting estimator consumes directly.
Matrix sample_multinomial(const Matrix& p, long long n, Rng& rng);
std::vector<std::int64_t> sample_multinomial_sequence(const Matrix& p, long long n, Rng& rng);

/// Each cell independently Poisson(lambda * p_ij); the total is not fixed.
Matrix sample_poissonized(const Matrix& p, double lambda, Rng& rng);

/// Sign-indexed hypercube family of rank-K probability matrices from the
/// minimax lower-bound construction. Entries are 1/D +- gamma on a K x 2*D2
/// block and zero elsewhere.
struct AssouadMatrixSpec {
  int d1 = 0;
  int d2 = 0;
  int K = 0;
  long long n = 0;
  std::vector<std::int8_t> signs;  // K x D2, row-major, values -1 or +1

  int D2() const { return d2 / 2; }
  long long D() const { return 2LL * K * D2(); }
  double gamma() const;

  static AssouadMatrixSpec random(int d1, int d2, int K, long long n, Rng& rng);
};

Matrix assouad_matrix(const AssouadMatrixSpec& spec);

/// Bit-indexed family of perturbed uniform densities on [0,1]^2 built from
/// disjoint products of zero-integral bump differences. Every member is
/// >= 1/2 and integrates to 1.
struct AssouadDensitySpec {
  int K = 1;
  long long n = 0;
  double beta = 1.0;
  double L = 1.0;
  std::vector<std::uint8_t> bits;  // K' x H, row-major, values 0 or 1

  int k_prime() const;
  int bumps_y() const;  // H
  double hx() const { return 1.0 / k_prime(); }
  double hy() const { return 1.0 / bumps_y(); }
  double c_star() const { return std::min(0.25, 1.0 / (2.0 * L)); }

  static AssouadDensitySpec random(int K, long long n, double beta, double L, Rng& rng);
};

/// Evaluator for one member of the density prior family.
class AssouadDensity {
public:
  explicit AssouadDensity(AssouadDensitySpec spec);

  double operator()(double x, double y) const;
  double upper_bound() const { return 1.0 + amplitude_; }
  double lower_bound() const { return 1.0 - amplitude_; }
  const AssouadDensitySpec& spec() const { return spec_; }
  /// Scale applied to the raw bump so its beta-Hoelder constant is <= 1/2.
  double bump_scale() const { return bump_scale_; }

private:
  double bump(double t) const;  // scaled bump on (-1/2, 1/2)
  double v_diff(double t, double h, int index) const;

  AssouadDensitySpec spec_;
  double bump_scale_ = 1.0;
  double amplitude_ = 0.0;  // c* L hy^beta * scale^2
};

/// A one-dimensional piecewise-constant or piecewise-linear function on [0,1].
struct Piecewise1D {
  enum class Kind { Constant, Linear };
  Kind kind = Kind::Constant;
  std::vector<double> breaks;  // ascending, breaks.front()=0, breaks.back()=1
  std::vector<double> values;  // Constant: one per interval; Linear: one per break

  double operator()(double x) const;
  double integral() const;
  double max_abs() const;
};

/// A sum of K separable components w_k * u_k(x) * v_k(y) on [0,1]^2.
struct HolderMixtureSpec {
  struct Component {
    Piecewise1D u, v;
  };
  std::vector<Component> components;
  std::vector<double> weights;

  double operator()(double x, double y) const;
  double integral() const;
  /// Exact supremum over [0,1]^2; per refinement cell the function is
  /// bilinear, so the maximum sits on a corner of the break grid.
  double upper_bound() const;
  /// Checks nonnegativity on a probe grid and integral 1 within 1e-6.
  void validate(int probe_cells_per_axis = 512) const;
};

/// n iid draws from f by rejection against the uniform envelope B on [0,1]^2.
/// Throws InvalidInput if B <= 0; throws std::runtime_error if the acceptance
/// rate stays below 1e-4 after 1e7 proposals (degenerate envelope).
/// proposals_out, when given, receives the number of proposals used.
Sample2D sample_from_density(const std::function<double(double, double)>& f, double B,
                             long long n, Rng& rng, long long* proposals_out = nullptr);

/// Random rank-<=K probability matrix P = sum_k w_k u_k v_k^T with
/// Dirichlet-distributed factors; stand-in for the rank-K instances of the
/// simulation study.
Matrix low_rank_dirichlet_matrix(int d, int K, double concentration, Rng& rng);
Matrix low_rank_dirichlet_matrix(int d1, int d2, int K, double concentration, Rng& rng);

/// Dirichlet(concentration * 1) probability vector of length d.
Vector dirichlet_vector(int d, double concentration, Rng& rng);

} // namespace lowrank
