#include "horo/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "horo/errors.hpp"
#include "horo/normal.hpp"

namespace horo {

PiecewiseQuantile PiecewiseQuantile::from(const Discrete1D& m) {
  PiecewiseQuantile q;
  q.breaks.reserve(m.values.size() + 1);
  q.breaks.push_back(0.0);
  q.breaks.insert(q.breaks.end(), m.cum.begin(), m.cum.end());
  q.consts = m.values;
  q.zcoefs.assign(m.values.size(), 0.0);
  return q;
}

PiecewiseQuantile PiecewiseQuantile::gaussian(double mean, double sd) {
  if (!(sd > 0.0)) throw InputError("PiecewiseQuantile::gaussian: sd must be > 0");
  PiecewiseQuantile q;
  q.breaks = {0.0, 1.0};
  q.consts = {mean};
  q.zcoefs = {sd};
  return q;
}

double PiecewiseQuantile::eval(double u) const {
  if (!(u > 0.0) || u > 1.0) throw InputError("PiecewiseQuantile::eval: u must be in (0,1]");
  auto it = std::lower_bound(breaks.begin() + 1, breaks.end(), u);
  size_t i = static_cast<size_t>(it - breaks.begin()) - 1;
  double z = zcoefs[i];
  return consts[i] + (z == 0.0 ? 0.0 : z * norm_ppf(u));
}

// Walks the merged cell grid of two piecewise quantiles. The callback sees
// each merged cell's coefficients and its boundaries (with cached normal
// moments data). Both functions must end at exactly 1.
template <class F>
static void merged_walk2(const PiecewiseQuantile& f, const PiecewiseQuantile& g, F&& cb) {
  size_t i = 0, j = 0;
  NormalBoundary lo = normal_boundary(0.0);
  double prev = 0.0;
  const size_t nf = f.consts.size(), ng = g.consts.size();
  while (i < nf && j < ng) {
    double next = std::min(f.breaks[i + 1], g.breaks[j + 1]);
    NormalBoundary hi = normal_boundary(next);
    cb(f.consts[i], f.zcoefs[i], g.consts[j], g.zcoefs[j], lo, hi);
    prev = next;
    if (f.breaks[i + 1] <= prev) ++i;
    if (g.breaks[j + 1] <= prev) ++j;
    lo = hi;
  }
}

PiecewiseQuantile PiecewiseQuantile::affine(double ca, const PiecewiseQuantile& g, double cb) const {
  PiecewiseQuantile out;
  out.breaks.push_back(0.0);
  merged_walk2(*this, g,
               [&](double c1, double s1, double c2, double s2, const NormalBoundary&,
                   const NormalBoundary& hi) {
                 out.breaks.push_back(hi.u);
                 out.consts.push_back(ca * c1 + cb * c2);
                 out.zcoefs.push_back(ca * s1 + cb * s2);
               });
  return out;
}

Discrete1D PiecewiseQuantile::to_discrete() const {
  std::vector<double> xs, ws;
  for (int i = 0; i < cells(); ++i) {
    if (zcoefs[i] != 0.0)
      throw InputError("to_discrete: quantile has a Gaussian cell, not a step function");
    xs.push_back(consts[i]);
    ws.push_back(breaks[i + 1] - breaks[i]);
  }
  return Discrete1D::weighted(std::move(xs), std::move(ws));
}

double PiecewiseQuantile::mean() const {
  double s = 0.0;
  NormalBoundary lo = normal_boundary(0.0);
  for (int i = 0; i < cells(); ++i) {
    NormalBoundary hi = normal_boundary(breaks[i + 1]);
    CellMoments m = normal_cell_moments(lo, hi);
    s += consts[i] * m.m0 + zcoefs[i] * m.m1;
    lo = hi;
  }
  return s;
}

double pq_inner(const PiecewiseQuantile& f, const PiecewiseQuantile& g) {
  double s = 0.0;
  merged_walk2(f, g,
               [&](double c1, double s1, double c2, double s2, const NormalBoundary& lo,
                   const NormalBoundary& hi) {
                 CellMoments m = normal_cell_moments(lo, hi);
                 s += c1 * c2 * m.m0 + (c1 * s2 + c2 * s1) * m.m1 + s1 * s2 * m.m2;
               });
  return s;
}

double pq_dist2(const PiecewiseQuantile& f, const PiecewiseQuantile& g) {
  double s = 0.0;
  merged_walk2(f, g,
               [&](double c1, double s1, double c2, double s2, const NormalBoundary& lo,
                   const NormalBoundary& hi) {
                 CellMoments m = normal_cell_moments(lo, hi);
                 const double dc = c1 - c2, dz = s1 - s2;
                 s += dc * dc * m.m0 + 2.0 * dc * dz * m.m1 + dz * dz * m.m2;
               });
  return std::max(0.0, s);
}

bool pq_diff_nondecreasing(const PiecewiseQuantile& f, const PiecewiseQuantile& g, double tol) {
  // Cells narrower than the weight resolution are collapsed into the
  // adjacent boundary, so two grids that differ only by float noise in
  // their cumulative weights compare like their exact counterparts.
  constexpr double kMinWidth = 1e-12;
  bool ok = true;
  bool have_prev = false;
  double prev_right = 0.0;  // diff value at the last wide cell's right edge
  merged_walk2(f, g,
               [&](double c1, double s1, double c2, double s2, const NormalBoundary& lo,
                   const NormalBoundary& hi) {
                 if (!ok) return;
                 const double dc = c2 - c1, dz = s2 - s1;
                 if (hi.u - lo.u <= kMinWidth) return;
                 if (dz < -tol) {  // decreasing inside the cell
                   ok = false;
                   return;
                 }
                 const double left = dz == 0.0 ? dc : dc + dz * lo.z;
                 if (have_prev && left < prev_right - tol) ok = false;
                 prev_right = dz == 0.0 ? dc : dc + dz * hi.z;
                 have_prev = true;
               });
  return ok;
}

static bool exactly_uniform(const Discrete1D& m) {
  const double w = 1.0 / m.size();
  for (double x : m.weights)
    if (x != w) return false;
  return true;
}

double w2_1d_sq_sorted_uniform(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(n);
}

double w2_1d_sq(const Discrete1D& a, const Discrete1D& b) {
  if (a.size() == b.size() && exactly_uniform(a) && exactly_uniform(b))
    return w2_1d_sq_sorted_uniform(a.values, b.values);
  size_t i = 0, j = 0;
  double prev = 0.0, s = 0.0;
  const size_t na = a.values.size(), nb = b.values.size();
  while (i < na && j < nb) {
    const double next = std::min(a.cum[i], b.cum[j]);
    const double d = a.values[i] - b.values[j];
    s += d * d * (next - prev);
    prev = next;
    if (a.cum[i] <= prev) ++i;
    if (b.cum[j] <= prev) ++j;
  }
  return s;
}

double w2_1d(const Discrete1D& a, const Discrete1D& b) { return std::sqrt(w2_1d_sq(a, b)); }

// Valid t-range of the interpolated quantile (1-t)a + tb: at every merged
// interior boundary the jump (1-t)*Ja + t*Jb must stay >= 0.
void geodesic_interval_1d(const Discrete1D& a, const Discrete1D& b, double* t_lo,
                          double* t_hi) {
  *t_lo = -std::numeric_limits<double>::infinity();
  *t_hi = std::numeric_limits<double>::infinity();
  size_t i = 0, j = 0;
  double prev = 0.0;
  double ja = 0.0, jb = 0.0;
  bool pending = false;
  const size_t na = a.values.size(), nb = b.values.size();
  while (i < na && j < nb) {
    const double next = std::min(a.cum[i], b.cum[j]);
    if (pending) {
      // jumps accumulated at boundary `prev`
      const double slope = jb - ja;
      if (slope > 0.0)
        *t_lo = std::max(*t_lo, -ja / slope);
      else if (slope < 0.0)
        *t_hi = std::min(*t_hi, ja / -slope);
      pending = false;
    }
    prev = next;
    ja = jb = 0.0;
    if (i + 1 < na && a.cum[i] <= prev) ja = a.values[i + 1] - a.values[i];
    if (j + 1 < nb && b.cum[j] <= prev) jb = b.values[j + 1] - b.values[j];
    if (prev < 1.0) pending = true;
    if (a.cum[i] <= prev) ++i;
    if (b.cum[j] <= prev) ++j;
  }
}

Discrete1D geodesic_1d(const Discrete1D& a, const Discrete1D& b, double t, bool strict) {
  if (strict && (t < 0.0 || t > 1.0)) {
    double lo, hi;
    geodesic_interval_1d(a, b, &lo, &hi);
    if (t < lo || t > hi)
      throw InputError("geodesic_1d: t=" + std::to_string(t) + " outside validity interval [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  if (a.size() == b.size() && exactly_uniform(a) && exactly_uniform(b)) {
    std::vector<double> v(a.values.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = (1.0 - t) * a.values[i] + t * b.values[i];
    return Discrete1D::from_samples(std::move(v));
  }
  std::vector<double> xs, ws;
  size_t i = 0, j = 0;
  double prev = 0.0;
  const size_t na = a.values.size(), nb = b.values.size();
  while (i < na && j < nb) {
    const double next = std::min(a.cum[i], b.cum[j]);
    xs.push_back((1.0 - t) * a.values[i] + t * b.values[j]);
    ws.push_back(next - prev);
    prev = next;
    if (a.cum[i] <= prev) ++i;
    if (b.cum[j] <= prev) ++j;
  }
  return Discrete1D::weighted(std::move(xs), std::move(ws));
}

Gaussian1D geodesic_1d(const Gaussian1D& a, const Gaussian1D& b, double t, bool strict) {
  const double m = (1.0 - t) * a.mean + t * b.mean;
  const double scale = (1.0 - t) * a.sd + t * b.sd;
  if (strict && (t < 0.0 || t > 1.0) && !(scale > 0.0))
    throw InputError("geodesic_1d: interpolated scale is not positive at t=" + std::to_string(t));
  return Gaussian1D{m, std::fabs(scale)};
}

}  // namespace horo
