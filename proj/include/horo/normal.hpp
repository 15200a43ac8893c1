#pragma once

namespace horo {

// Standard normal density, CDF, and quantile (inverse CDF).
double norm_pdf(double x);
double norm_cdf(double x);
// Wichura's PPND16 rational approximation, |relative error| < 1e-15 on (0,1).
// norm_ppf(0) = -inf, norm_ppf(1) = +inf.
double norm_ppf(double p);

// Precomputed quantities at a cumulative-probability boundary u, used for
// closed-form integrals of quantile functions over cells (a,b] of (0,1):
//   integral of z(u) du        has antiderivative  -pdf(z(u))
//   integral of z(u)^2 du      has antiderivative  u - z(u) pdf(z(u))
// where z = norm_ppf. Both pdf(z) and z*pdf(z) tend to 0 at u -> {0,1},
// which is what the endpoint convention below encodes.
struct NormalBoundary {
  double u = 0.0;
  double z = 0.0;     // norm_ppf(u); +-inf at the endpoints
  double pdf = 0.0;   // pdf(z); 0 at the endpoints
  double zpdf = 0.0;  // z*pdf(z); 0 at the endpoints
};
NormalBoundary normal_boundary(double u);

// Moments of the standard-normal quantile over the cell (lo.u, hi.u]:
//   m0 = cell length, m1 = integral of z, m2 = integral of z^2.
struct CellMoments {
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
};
inline CellMoments normal_cell_moments(const NormalBoundary& lo, const NormalBoundary& hi) {
  CellMoments m;
  m.m0 = hi.u - lo.u;
  m.m1 = lo.pdf - hi.pdf;
  m.m2 = m.m0 - (hi.zpdf - lo.zpdf);
  return m;
}

}  // namespace horo
