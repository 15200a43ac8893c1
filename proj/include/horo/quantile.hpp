#pragma once
#include <vector>

#include "horo/measures.hpp"

namespace horo {

// Piecewise representation of a quantile function on (0,1]: on the cell
// (breaks[i], breaks[i+1]] the value is consts[i] + zcoefs[i] * norm_ppf(u).
// Step quantiles (discrete measures) have zcoefs == 0; a Gaussian is a single
// cell with zcoef sigma. Products and squared differences of two such
// functions integrate in closed form through the normal cell moments, which
// is what makes the 1D Wasserstein and Busemann quantities exact here.
struct PiecewiseQuantile {
  std::vector<double> breaks;  // 0 = b_0 < ... < b_k = 1
  std::vector<double> consts;  // k entries
  std::vector<double> zcoefs;  // k entries

  static PiecewiseQuantile from(const Discrete1D& m);
  static PiecewiseQuantile gaussian(double mean, double sd);

  int cells() const { return static_cast<int>(consts.size()); }
  double eval(double u) const;  // left-continuous
  // Affine combination ca*this + cb*g on the merged grid.
  PiecewiseQuantile affine(double ca, const PiecewiseQuantile& g, double cb) const;
  // The measure with this quantile function, discretized cell-by-cell.
  // Exact for step functions; cells with nonzero zcoef are refused.
  Discrete1D to_discrete() const;
  double mean() const;  // integral over (0,1)
};

// integral of f*g over (0,1)
double pq_inner(const PiecewiseQuantile& f, const PiecewiseQuantile& g);
// integral of (f-g)^2 over (0,1) — squared 1D Wasserstein distance
double pq_dist2(const PiecewiseQuantile& f, const PiecewiseQuantile& g);
// Is g - f non-decreasing on (0,1)? Checked on the merged grid: within each
// cell the slope coefficient must be >= -tol and at each interior boundary
// the jump must be >= -tol. tol = 0 is the exact check.
bool pq_diff_nondecreasing(const PiecewiseQuantile& f, const PiecewiseQuantile& g,
                           double tol = 0.0);

// Exact squared W2 between weighted discrete measures by merging the two
// cumulative-weight breakpoint sequences.
double w2_1d_sq(const Discrete1D& a, const Discrete1D& b);
double w2_1d(const Discrete1D& a, const Discrete1D& b);
// Fast path used by the sliced estimators: uniform same-size measures given
// as already-sorted value arrays.
double w2_1d_sq_sorted_uniform(const std::vector<double>& a, const std::vector<double>& b);

// Affine quantile interpolation (1-t)*a + t*b, as a measure. Defined for all
// t (cells are re-sorted into a valid measure when the combination leaves
// the geodesic's validity range); strict mode errors when t is outside [0,1]
// and the pair is not a ray extendable to t.
Discrete1D geodesic_1d(const Discrete1D& a, const Discrete1D& b, double t, bool strict = false);
Gaussian1D geodesic_1d(const Gaussian1D& a, const Gaussian1D& b, double t, bool strict = false);

// The t-range on which the interpolated quantile stays non-decreasing
// (contains [0,1]; unbounded above iff the pair is a ray).
void geodesic_interval_1d(const Discrete1D& a, const Discrete1D& b, double* t_lo, double* t_hi);

}  // namespace horo
