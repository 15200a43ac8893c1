#include "horo/busemann.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "horo/errors.hpp"
#include "horo/normal.hpp"
#include "horo/ot.hpp"

namespace horo {

double busemann_1d(const PiecewiseQuantile& q0, const PiecewiseQuantile& q1,
                   const PiecewiseQuantile& target) {
  const double k2 = pq_dist2(q0, q1);
  if (!(k2 > 0.0)) throw InputError("busemann_1d: zero-speed ray");
  PiecewiseQuantile dir = q1.affine(1.0, q0, -1.0);
  PiecewiseQuantile disp = target.affine(1.0, q0, -1.0);
  return -pq_inner(dir, disp) / std::sqrt(k2);
}

double busemann_1d(const Ray1DEmpirical& ray, const Discrete1D& nu) {
  return busemann_1d(ray.q0, ray.q1, PiecewiseQuantile::from(nu));
}
double busemann_1d(const Ray1DEmpirical& ray, const Gaussian1D& nu) {
  return busemann_1d(ray.q0, ray.q1, PiecewiseQuantile::gaussian(nu.mean, nu.sd));
}
double busemann_1d(const Ray1DGaussian& ray, const Discrete1D& nu) {
  return busemann_1d(PiecewiseQuantile::gaussian(ray.m0, ray.s0),
                     PiecewiseQuantile::gaussian(ray.m1, ray.s1), PiecewiseQuantile::from(nu));
}
double busemann_1d(const RayDirac1D& ray, const Discrete1D& nu) {
  PiecewiseQuantile base = PiecewiseQuantile::from(Discrete1D::from_samples({0.0}));
  PiecewiseQuantile tip;
  tip.breaks = {0.0, 1.0};
  tip.consts = {ray.m1};
  tip.zcoefs = {ray.s1};
  return busemann_1d(base, tip, PiecewiseQuantile::from(nu));
}

double busemann_1d_gaussian(const Ray1DGaussian& ray, const Gaussian1D& nu) {
  const double k = ray.speed();
  if (!(k > 0.0)) throw InputError("busemann_1d_gaussian: zero-speed ray");
  if (ray.s1 < ray.s0) throw InputError("busemann_1d_gaussian: invalid ray (shrinking scale)");
  return -((ray.m1 - ray.m0) * (nu.mean - ray.m0) + (ray.s1 - ray.s0) * (nu.sd - ray.s0)) / k;
}

double busemann_1d_gaussian(const RayDirac1D& ray, const Gaussian1D& nu) {
  const double k = std::hypot(ray.m1, ray.s1);
  if (!(k > 0.0)) throw InputError("busemann_1d_gaussian: zero-speed ray");
  return -(ray.m1 * nu.mean + ray.s1 * nu.sd) / k;
}

Eigen::MatrixXd busemann_bw_direction(const RayBW& ray) {
  const int d = ray.dim();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd C;
  if (ray.identity_base()) {
    // A = I + S and the inner matrix collapses to S^2
    Eigen::MatrixXd S = ray.A - I;
    C = S * S;
  } else {
    C = ray.base.cov - ray.base.cov * ray.A - ray.A * ray.base.cov + ray.tip.cov;
  }
  return 0.5 * (C + C.transpose());
}

double busemann_bw(const RayBW& ray, const GaussianMeasure& nu) {
  const int d = ray.dim();
  if (nu.dim() != d) throw InputError("busemann_bw: dimension mismatch");
  if (!(ray.speed > 0.0)) throw InputError("busemann_bw: zero-speed ray");
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);

  const Eigen::MatrixXd C = busemann_bw_direction(ray);
  Eigen::MatrixXd h = sym_sqrt(nu.cov);
  Eigen::MatrixXd inner = h * C * h;
  inner = 0.5 * (inner + inner.transpose());
  const double tr_sqrt = sym_sqrt_checked(inner).trace();

  const double mean_part = (ray.tip.mean - ray.base.mean).dot(nu.mean - ray.base.mean);
  const double base_part = (ray.base.cov * (ray.A - I)).trace();
  return (-mean_part + base_part - tr_sqrt) / ray.speed;
}

std::vector<double> normal_quantile_weights(const std::vector<double>& breaks) {
  if (breaks.size() < 2 || breaks.front() != 0.0 || breaks.back() != 1.0)
    throw InputError("normal_quantile_weights: breakpoints must run 0 = u0 < ... < uk = 1");
  for (size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i] > breaks[i - 1]))
      throw InputError("normal_quantile_weights: breakpoints must be strictly increasing");
  std::vector<double> w(breaks.size() - 1);
  NormalBoundary prev = normal_boundary(breaks[0]);
  for (size_t i = 1; i < breaks.size(); ++i) {
    NormalBoundary cur = normal_boundary(breaks[i]);
    w[i - 1] = prev.pdf - cur.pdf;
    prev = cur;
  }
  return w;
}

std::vector<double> uniform_normal_weights(int m) {
  if (m < 1) throw InputError("uniform_normal_weights: m must be >= 1");
  std::vector<double> w(m);
  NormalBoundary prev = normal_boundary(0.0);
  for (int i = 1; i <= m; ++i) {
    NormalBoundary cur = normal_boundary(static_cast<double>(i) / m);
    w[i - 1] = prev.pdf - cur.pdf;
    prev = cur;
  }
  return w;
}

double busemann_dirac_sorted(const RayDirac1D& ray, const double* sorted_values, int n,
                             const double* weights) {
  const double k = std::hypot(ray.m1, ray.s1);
  double mean = 0.0, proj = 0.0;
  for (int i = 0; i < n; ++i) {
    mean += sorted_values[i];
    proj += sorted_values[i] * weights[i];
  }
  mean /= n;
  return -(ray.m1 * mean + ray.s1 * proj) / k;
}

// ---- oracles ----

double busemann_oracle_dirac(const Eigen::VectorXd& x0, const EmpiricalMeasure& mu1,
                             const EmpiricalMeasure& nu) {
  if (mu1.dim() != x0.size() || nu.dim() != x0.size())
    throw InputError("busemann_oracle_dirac: dimension mismatch");
  Eigen::MatrixXd d1 = mu1.points.rowwise() - x0.transpose();
  const double k2 = (d1.rowwise().squaredNorm().array() * mu1.weights.array()).sum();
  if (!(k2 > 0.0)) throw InputError("busemann_oracle_dirac: zero-speed ray");
  Eigen::MatrixXd dn = nu.points.rowwise() - x0.transpose();
  Eigen::MatrixXd cost = -(d1 * dn.transpose());
  TransportPlan plan = exact_ot_lp(cost, mu1.weights, nu.weights);
  return plan.cost / std::sqrt(k2);
}

double busemann_oracle_map(const EmpiricalMeasure& mu0, const Eigen::MatrixXd& images,
                           const EmpiricalMeasure& nu) {
  if (images.rows() != mu0.size() || images.cols() != mu0.dim())
    throw InputError("busemann_oracle_map: image matrix must match mu0's shape");
  if (nu.dim() != mu0.dim()) throw InputError("busemann_oracle_map: dimension mismatch");
  Eigen::MatrixXd disp = images - mu0.points;  // T(x_i) - x_i per row
  const double k2 = (disp.rowwise().squaredNorm().array() * mu0.weights.array()).sum();
  if (!(k2 > 0.0)) throw InputError("busemann_oracle_map: zero-speed ray");
  // cost(i,j) = -<T(x_i)-x_i, y_j - x_i>
  Eigen::MatrixXd cost = -(disp * nu.points.transpose());
  Eigen::VectorXd corr = (disp.array() * mu0.points.array()).rowwise().sum();
  cost.colwise() += corr;
  TransportPlan plan = exact_ot_lp(cost, mu0.weights, nu.weights);
  return plan.cost / std::sqrt(k2);
}

double busemann_oracle_general(const EmpiricalMeasure& mu0, const EmpiricalMeasure& mu1,
                               const EmpiricalMeasure& nu, OracleMode mode) {
  if (mode == OracleMode::dirac) {
    if (mu0.size() != 1)
      throw InputError("busemann_oracle_general: dirac mode needs a single-point base");
    return busemann_oracle_dirac(mu0.points.row(0), mu1, nu);
  }
  // ot_map: derive the monotone map in 1D for uniform equal-size endpoints
  if (mu0.dim() != 1 || mu1.dim() != 1)
    throw InputError("busemann_oracle_general: ot_map mode auto-derives maps only in 1D");
  const int n = mu0.size();
  if (mu1.size() != n)
    throw InputError("busemann_oracle_general: ot_map mode needs equal-size endpoints");
  const double u = 1.0 / n;
  for (int i = 0; i < n; ++i)
    if (mu0.weights[i] != u || mu1.weights[i] != u)
      throw InputError("busemann_oracle_general: ot_map mode needs uniform weights");
  std::vector<int> i0(n), i1(n);
  std::iota(i0.begin(), i0.end(), 0);
  std::iota(i1.begin(), i1.end(), 0);
  std::sort(i0.begin(), i0.end(),
            [&](int a, int b) { return mu0.points(a, 0) < mu0.points(b, 0); });
  std::sort(i1.begin(), i1.end(),
            [&](int a, int b) { return mu1.points(a, 0) < mu1.points(b, 0); });
  Eigen::MatrixXd images(n, 1);
  for (int r = 0; r < n; ++r) images(i0[r], 0) = mu1.points(i1[r], 0);
  return busemann_oracle_map(mu0, images, nu);
}

// ---- limit validator ----

static void check_ts(const std::vector<double>& ts) {
  for (double t : ts)
    if (!(t >= 0.0) || !std::isfinite(t))
      throw InputError("busemann_limit_oracle: t values must be finite and >= 0");
}

std::vector<LimitPoint> busemann_limit_oracle(const Ray1DEmpirical& ray, const Discrete1D& nu,
                                              const std::vector<double>& ts) {
  check_ts(ts);
  std::vector<LimitPoint> out;
  out.reserve(ts.size());
  for (double t : ts) {
    Discrete1D mt = geodesic_1d(ray.a, ray.b, t);
    out.push_back({t, w2_1d(mt, nu) - ray.speed * t});
  }
  return out;
}

std::vector<LimitPoint> busemann_limit_oracle(const Ray1DGaussian& ray, const Gaussian1D& nu,
                                              const std::vector<double>& ts) {
  check_ts(ts);
  const double k = ray.speed();
  std::vector<LimitPoint> out;
  out.reserve(ts.size());
  for (double t : ts) {
    Gaussian1D mt = ray.at(t);
    double w2 = std::hypot(mt.mean - nu.mean, mt.sd - nu.sd);
    out.push_back({t, w2 - k * t});
  }
  return out;
}

std::vector<LimitPoint> busemann_limit_oracle(const RayBW& ray, const GaussianMeasure& nu,
                                              const std::vector<double>& ts) {
  check_ts(ts);
  std::vector<LimitPoint> out;
  out.reserve(ts.size());
  for (double t : ts) {
    GaussianMeasure mt = geodesic_bw(ray.base, ray.tip, t);
    out.push_back({t, bw_distance(mt, nu) - ray.speed * t});
  }
  return out;
}

// ---- projection ----

Projection1D busemann_project(const Ray1DEmpirical& ray, const Discrete1D& nu) {
  Projection1D p;
  p.busemann = busemann_1d(ray, nu);
  p.t = -p.busemann / ray.speed;
  geodesic_interval_1d(ray.a, ray.b, &p.valid.lo, &p.valid.hi);
  p.on_ray = p.t >= 0.0;
  if (p.t >= p.valid.lo && p.t <= p.valid.hi) {
    p.has_point = true;
    p.point = geodesic_1d(ray.a, ray.b, p.t);
  }
  return p;
}

ProjectionGaussian1D busemann_project(const Ray1DGaussian& ray, const Gaussian1D& nu) {
  ProjectionGaussian1D p;
  p.busemann = busemann_1d_gaussian(ray, nu);
  p.t = -p.busemann / ray.speed();
  p.valid = ray_extension_interval_1d_gaussian(ray.s0, ray.s1);
  p.on_ray = p.t >= 0.0;
  if (p.t > p.valid.lo && p.t < p.valid.hi) {
    p.has_point = true;
    p.point = ray.at(p.t);
  }
  return p;
}

ProjectionBW busemann_project(const RayBW& ray, const GaussianMeasure& nu) {
  ProjectionBW p;
  p.busemann = busemann_bw(ray, nu);
  p.t = -p.busemann / ray.speed;
  p.valid = ray_extension_interval_bw(ray);
  p.on_ray = p.t >= 0.0;
  if (p.t > p.valid.lo && p.t < p.valid.hi) {
    p.has_point = true;
    p.point = geodesic_bw(ray.base, ray.tip, p.t);
  }
  return p;
}

}  // namespace horo
