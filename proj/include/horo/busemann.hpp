#pragma once
#include <vector>

#include "horo/measures.hpp"
#include "horo/quantile.hpp"
#include "horo/rays.hpp"

namespace horo {

// Horofunction value of a target measure along a ray, normalized by the ray
// speed so that reparameterizing the same ray never changes the value. All
// closed forms share the structure -<direction, displacement> / speed; the
// oracle forms recover the same number through explicit transport problems
// and the limit form through distances at large t.

enum class BusemannMethod { closed_form, oracle, limit };

struct BusemannValue {
  double value = 0.0;
  double speed = 0.0;
  BusemannMethod method = BusemannMethod::closed_form;
};

// Generic 1D engine on piecewise quantiles: -<q1-q0, qt-q0> / ||q1-q0||.
// Assumes q0,q1 describe a valid ray; the typed overloads validate that at
// ray construction.
double busemann_1d(const PiecewiseQuantile& q0, const PiecewiseQuantile& q1,
                   const PiecewiseQuantile& target);
double busemann_1d(const Ray1DEmpirical& ray, const Discrete1D& nu);
double busemann_1d(const Ray1DEmpirical& ray, const Gaussian1D& nu);
double busemann_1d(const Ray1DGaussian& ray, const Discrete1D& nu);
double busemann_1d(const RayDirac1D& ray, const Discrete1D& nu);

// Closed form -[(m1-m0)(m-m0) + (s1-s0)(s-s0)] / speed.
double busemann_1d_gaussian(const Ray1DGaussian& ray, const Gaussian1D& nu);
double busemann_1d_gaussian(const RayDirac1D& ray, const Gaussian1D& nu);

// Closed form on Gaussians in R^d (Bures-Wasserstein geometry).
double busemann_bw(const RayBW& ray, const GaussianMeasure& nu);
// The PSD matrix whose cross term with the target covariance forms the
// value above; equals (A - I) base.cov (A - I).
Eigen::MatrixXd busemann_bw_direction(const RayBW& ray);

// w_i = integral of the standard normal quantile over (breaks[i-1], breaks[i]),
// in closed form through the density antiderivative. breaks run 0 = u_0 < ...
// < u_k = 1.
std::vector<double> normal_quantile_weights(const std::vector<double>& breaks);
// Weights for the uniform partition {i/m}; only depend on m.
std::vector<double> uniform_normal_weights(int m);

// Order-statistics evaluation against a dirac-based ray: values must be
// sorted ascending, weights from uniform_normal_weights(n).
double busemann_dirac_sorted(const RayDirac1D& ray, const double* sorted_values, int n,
                             const double* weights);

// ---- transport-problem oracles ----

enum class OracleMode { dirac, ot_map };

// Base is the point mass at x0; optimum of -<x1 - x0, y - x0> over couplings
// of (mu1, nu), speed-normalized.
double busemann_oracle_dirac(const Eigen::VectorXd& x0, const EmpiricalMeasure& mu1,
                             const EmpiricalMeasure& nu);
// Explicit transport map: images.row(i) = T(x_i) for mu0's i-th point, with
// (Id, T) an optimal coupling of (mu0, mu1). Optimum of -<T(x)-x, y-x> over
// couplings of (mu0, nu).
double busemann_oracle_map(const EmpiricalMeasure& mu0, const Eigen::MatrixXd& images,
                           const EmpiricalMeasure& nu);
// Dispatch: dirac mode requires mu0 a single point; ot_map mode derives the
// sorted-coupling map (1D, uniform weights, equal sizes only).
double busemann_oracle_general(const EmpiricalMeasure& mu0, const EmpiricalMeasure& mu1,
                               const EmpiricalMeasure& nu, OracleMode mode);

// ---- limit-definition validator ----

struct LimitPoint {
  double t;
  double gap;  // W2(mu_t, nu) - speed * t; decreases to the Busemann value
};
std::vector<LimitPoint> busemann_limit_oracle(const Ray1DEmpirical& ray, const Discrete1D& nu,
                                              const std::vector<double>& ts);
std::vector<LimitPoint> busemann_limit_oracle(const Ray1DGaussian& ray, const Gaussian1D& nu,
                                              const std::vector<double>& ts);
std::vector<LimitPoint> busemann_limit_oracle(const RayBW& ray, const GaussianMeasure& nu,
                                              const std::vector<double>& ts);

// ---- projection onto the ray ----

// Curve parameter t = -B(nu)/speed in the endpoint parameterization (t=1 is
// the ray's second endpoint). on_ray reports t >= 0; the point is filled
// whenever t lies in the extended curve's validity interval (open interval
// for the parametric families, closed for empirical pairs).
struct RayProjectionInfo {
  double t = 0.0;
  double busemann = 0.0;
  bool on_ray = false;
  bool has_point = false;
  Interval valid{0.0, 0.0};
};
struct Projection1D : RayProjectionInfo {
  Discrete1D point;
};
struct ProjectionGaussian1D : RayProjectionInfo {
  Gaussian1D point;
};
struct ProjectionBW : RayProjectionInfo {
  GaussianMeasure point;
};

Projection1D busemann_project(const Ray1DEmpirical& ray, const Discrete1D& nu);
ProjectionGaussian1D busemann_project(const Ray1DGaussian& ray, const Gaussian1D& nu);
ProjectionBW busemann_project(const RayBW& ray, const GaussianMeasure& nu);

}  // namespace horo
