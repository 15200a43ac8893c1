#pragma once
#include <variant>

#include <json.hpp>

#include "horo/measures.hpp"
#include "horo/quantile.hpp"
#include "horo/rng.hpp"

namespace horo {

// A unit of direction in Wasserstein space: a pair of endpoint measures whose
// connecting geodesic keeps extending past the second endpoint forever.
// Construction validates the defining monotonicity/ordering condition; the
// speed is the distance between the endpoints.

struct Ray1DGaussian {
  double m0 = 0.0, s0 = 1.0;
  double m1 = 0.0, s1 = 1.0;

  static Ray1DGaussian make(double m0, double s0, double m1, double s1);
  double speed() const;  // sqrt((m1-m0)^2 + (s1-s0)^2)
  Gaussian1D at(double t) const { return {(1 - t) * m0 + t * m1, (1 - t) * s0 + t * s1}; }
};

// Base is the point mass at 0; the endpoint is N(m1, s1^2) at unit distance.
struct RayDirac1D {
  double m1 = 0.0, s1 = 1.0;  // m1^2 + s1^2 == 1
};

struct Ray1DEmpirical {
  Discrete1D a, b;
  PiecewiseQuantile q0, q1;
  double speed = 0.0;

  static Ray1DEmpirical make(const Discrete1D& a, const Discrete1D& b);
  Discrete1D at(double t) const { return geodesic_1d(a, b, t); }
};

struct RayBW {
  GaussianMeasure base, tip;
  Eigen::MatrixXd A;   // transport-map matrix base -> tip
  double speed = 0.0;  // bw_distance(base, tip)

  static RayBW make(const GaussianMeasure& base, const GaussianMeasure& tip);
  int dim() const { return base.dim(); }
  bool identity_base() const;  // mean 0, covariance exactly I
};

// ---- predicates ----

// Non-decreasing quantile difference, checked on merged breakpoints with a
// 1e-10 * value-range slack for float noise.
bool is_ray_1d(const Discrete1D& a, const Discrete1D& b);
// Scale must not shrink.
bool is_ray_1d_gaussian(double s0, double s1);
// (S0^1/2 S1 S0^1/2)^1/2 - S0 must be PSD within 1e-10 * trace scale.
bool is_ray_bw(const Eigen::MatrixXd& sigma0, const Eigen::MatrixXd& sigma1);

struct Interval {
  double lo, hi;  // open interval; +-inf for unbounded sides
};

// t-range on which (1-t)s0 + t*s1 stays positive.
Interval ray_extension_interval_1d_gaussian(double s0, double s1);
// t-range on which (1-t)I + tA stays positive definite.
Interval ray_extension_interval_bw(const RayBW& ray);

// ---- samplers ----

// Base N(0, I_d); direction (m1, S) with S = D diag(|th|) D^T built from a
// Haar orthogonal D and a unit sphere vector th, jointly normalized to unit
// tangent norm. Tip is N(m1, (I+S)^2); the result has unit speed.
RayBW sample_ray_bw(int d, RngStream& rng);

enum class DiracSigmaRule {
  unit_speed,          // s1 = sqrt(1 - m1^2), keeps m1^2 + s1^2 = 1
  compat_sqrt_one_minus_m,  // s1 = sqrt(1 - m1); legacy variant
};
// m1 ~ U[-1,1], base delta_0.
RayDirac1D sample_ray_1d_dirac(RngStream& rng, DiracSigmaRule rule = DiracSigmaRule::unit_speed);

// Base N(0,1), m1 ~ U[-1,1], s1 = 1 + sqrt(1 - m1^2); unit speed by design.
Ray1DGaussian sample_ray_1d_gaussian_base(RngStream& rng);

// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, R-diagonal
// signs folded into Q).
Eigen::MatrixXd haar_orthogonal(int d, RngStream& rng);

// ---- serialization ----

using AnyRay = std::variant<Ray1DEmpirical, Ray1DGaussian, RayDirac1D, RayBW>;

double ray_speed(const AnyRay& ray);
nlohmann::json ray_to_json(const AnyRay& ray);
AnyRay ray_from_json(const nlohmann::json& j);

}  // namespace horo
