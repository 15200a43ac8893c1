#include "horo/rays.hpp"

#include <cmath>
#include <limits>

#include "horo/errors.hpp"
#include "horo/ot.hpp"

namespace horo {

static constexpr double kInf = std::numeric_limits<double>::infinity();

Ray1DGaussian Ray1DGaussian::make(double m0, double s0, double m1, double s1) {
  if (!is_ray_1d_gaussian(s0, s1))
    throw InputError("Ray1DGaussian: scale must not shrink (s1 >= s0)");
  Ray1DGaussian r{m0, s0, m1, s1};
  if (!(r.speed() > 0.0)) throw InputError("Ray1DGaussian: endpoints coincide (zero speed)");
  return r;
}

double Ray1DGaussian::speed() const { return std::hypot(m1 - m0, s1 - s0); }

Ray1DEmpirical Ray1DEmpirical::make(const Discrete1D& a, const Discrete1D& b) {
  if (!is_ray_1d(a, b))
    throw InputError("Ray1DEmpirical: quantile difference is not non-decreasing");
  Ray1DEmpirical r;
  r.a = a;
  r.b = b;
  r.q0 = PiecewiseQuantile::from(a);
  r.q1 = PiecewiseQuantile::from(b);
  r.speed = std::sqrt(pq_dist2(r.q0, r.q1));
  if (!(r.speed > 0.0)) throw InputError("Ray1DEmpirical: endpoints coincide (zero speed)");
  return r;
}

RayBW RayBW::make(const GaussianMeasure& base, const GaussianMeasure& tip) {
  if (!is_ray_bw(base.cov, tip.cov))
    throw InputError("RayBW: covariance pair fails the ray ordering condition");
  RayBW r;
  r.base = base;
  r.tip = tip;
  r.A = bw_map(base, tip).A;
  r.speed = bw_distance(base, tip);
  if (!(r.speed > 0.0)) throw InputError("RayBW: endpoints coincide (zero speed)");
  return r;
}

bool RayBW::identity_base() const {
  return base.mean.isZero(0.0) && base.cov.isIdentity(0.0);
}

bool is_ray_1d(const Discrete1D& a, const Discrete1D& b) {
  double lo = std::min(a.values.front(), b.values.front());
  double hi = std::max(a.values.back(), b.values.back());
  double tol = 1e-10 * std::max(1.0, hi - lo);
  return pq_diff_nondecreasing(PiecewiseQuantile::from(a), PiecewiseQuantile::from(b), tol);
}

bool is_ray_1d_gaussian(double s0, double s1) {
  if (!(s0 > 0.0) || !(s1 > 0.0)) throw InputError("is_ray_1d_gaussian: scales must be positive");
  return s1 >= s0;
}

bool is_ray_bw(const Eigen::MatrixXd& sigma0, const Eigen::MatrixXd& sigma1) {
  const int d = static_cast<int>(sigma0.rows());
  if (sigma1.rows() != d || sigma0.cols() != d || sigma1.cols() != d)
    throw InputError("is_ray_bw: dimension mismatch");
  // make() semantics double as the SPD check
  GaussianMeasure g0 = GaussianMeasure::make(Eigen::VectorXd::Zero(d), sigma0);
  GaussianMeasure g1 = GaussianMeasure::make(Eigen::VectorXd::Zero(d), sigma1);
  Eigen::MatrixXd h0 = sym_sqrt(g0.cov);
  Eigen::MatrixXd mid = sym_sqrt(h0 * g1.cov * h0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mid - g0.cov);
  double tol = 1e-10 * std::max(1.0, g0.cov.trace() + g1.cov.trace());
  return es.eigenvalues().minCoeff() >= -tol;
}

Interval ray_extension_interval_1d_gaussian(double s0, double s1) {
  if (!(s0 > 0.0) || !(s1 > 0.0))
    throw InputError("ray_extension_interval_1d_gaussian: scales must be positive");
  if (s1 > s0) return {-s0 / (s1 - s0), kInf};
  if (s1 < s0) return {-kInf, s0 / (s0 - s1)};
  return {-kInf, kInf};
}

Interval ray_extension_interval_bw(const RayBW& ray) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ray.A);
  double lo = -kInf, hi = kInf;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double a = es.eigenvalues()[i];
    // (1-t) + t*a > 0  <=>  1 + t(a-1) > 0
    if (a > 1.0)
      lo = std::max(lo, -1.0 / (a - 1.0));
    else if (a < 1.0)
      hi = std::min(hi, 1.0 / (1.0 - a));
  }
  return {lo, hi};
}

Eigen::MatrixXd haar_orthogonal(int d, RngStream& rng) {
  Eigen::MatrixXd G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd rd = qr.matrixQR().diagonal();
  for (int j = 0; j < d; ++j)
    if (rd[j] < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

RayBW sample_ray_bw(int d, RngStream& rng) {
  if (d < 1) throw InputError("sample_ray_bw: dimension must be >= 1");
  Eigen::VectorXd m1 = rng.sphere(d);
  Eigen::MatrixXd D = haar_orthogonal(d, rng);
  Eigen::VectorXd th = rng.sphere(d);
  Eigen::MatrixXd S = D * th.cwiseAbs().asDiagonal() * D.transpose();
  // ||m1||^2 + ||S||_F^2 = 2 exactly, so the unit-tangent scale is 1/sqrt(2)
  const double c = 1.0 / std::sqrt(2.0);
  m1 *= c;
  S *= c;
  S = 0.5 * (S + S.transpose());

  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd ipS = I + S;
  RayBW r;
  r.base = GaussianMeasure::make(Eigen::VectorXd::Zero(d), I);
  r.tip = GaussianMeasure::make(m1, ipS * ipS);
  r.A = ipS;  // transport map of N(0,I) -> N(m1, (I+S)^2)
  r.speed = 1.0;
  return r;
}

RayDirac1D sample_ray_1d_dirac(RngStream& rng, DiracSigmaRule rule) {
  double m1 = rng.uniform(-1.0, 1.0);
  double s1 = rule == DiracSigmaRule::unit_speed ? std::sqrt(std::max(0.0, 1.0 - m1 * m1))
                                                 : std::sqrt(std::max(0.0, 1.0 - m1));
  return {m1, s1};
}

Ray1DGaussian sample_ray_1d_gaussian_base(RngStream& rng) {
  double m1 = rng.uniform(-1.0, 1.0);
  double s1 = 1.0 + std::sqrt(std::max(0.0, 1.0 - m1 * m1));
  return {0.0, 1.0, m1, s1};
}

double ray_speed(const AnyRay& ray) {
  return std::visit(
      [](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Ray1DGaussian>)
          return r.speed();
        else if constexpr (std::is_same_v<T, RayDirac1D>)
          return std::hypot(r.m1, r.s1);
        else
          return r.speed;
      },
      ray);
}

// ---- json ----

static nlohmann::json vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}
static nlohmann::json mat_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}
static Eigen::VectorXd vec_from(const nlohmann::json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}
static Eigen::MatrixXd mat_from(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw InputError("ray json: empty matrix");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw InputError("ray json: ragged matrix");
    for (size_t j2 = 0; j2 < rows[i].size(); ++j2) m(i, j2) = rows[i][j2];
  }
  return m;
}

nlohmann::json ray_to_json(const AnyRay& ray) {
  return std::visit(
      [](const auto& r) -> nlohmann::json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Ray1DEmpirical>) {
          return {{"type", "empirical1d"},
                  {"values0", r.a.values},
                  {"weights0", r.a.weights},
                  {"values1", r.b.values},
                  {"weights1", r.b.weights}};
        } else if constexpr (std::is_same_v<T, Ray1DGaussian>) {
          return {{"type", "gaussian1d"}, {"m0", r.m0}, {"s0", r.s0}, {"m1", r.m1}, {"s1", r.s1}};
        } else if constexpr (std::is_same_v<T, RayDirac1D>) {
          return {{"type", "dirac1d"}, {"m1", r.m1}, {"s1", r.s1}};
        } else {
          return {{"type", "bw"},
                  {"m0", vec_json(r.base.mean)},
                  {"cov0", mat_json(r.base.cov)},
                  {"m1", vec_json(r.tip.mean)},
                  {"cov1", mat_json(r.tip.cov)}};
        }
      },
      ray);
}

AnyRay ray_from_json(const nlohmann::json& j) {
  const std::string type = j.value("type", "");
  if (type == "empirical1d") {
    auto a = Discrete1D::weighted(j.at("values0").get<std::vector<double>>(),
                                  j.at("weights0").get<std::vector<double>>());
    auto b = Discrete1D::weighted(j.at("values1").get<std::vector<double>>(),
                                  j.at("weights1").get<std::vector<double>>());
    return Ray1DEmpirical::make(a, b);
  }
  if (type == "gaussian1d")
    return Ray1DGaussian::make(j.at("m0").get<double>(), j.at("s0").get<double>(),
                               j.at("m1").get<double>(), j.at("s1").get<double>());
  if (type == "dirac1d") {
    RayDirac1D r{j.at("m1").get<double>(), j.at("s1").get<double>()};
    if (!std::isfinite(r.m1) || !(r.s1 >= 0.0))
      throw InputError("ray json: dirac1d needs finite m1 and s1 >= 0");
    if (!(std::hypot(r.m1, r.s1) > 0.0)) throw InputError("ray json: dirac1d has zero speed");
    return r;
  }
  if (type == "bw")
    return RayBW::make(GaussianMeasure::make(vec_from(j.at("m0")), mat_from(j.at("cov0"))),
                       GaussianMeasure::make(vec_from(j.at("m1")), mat_from(j.at("cov1"))));
  throw InputError("ray json: unknown type '" + type + "'");
}

}  // namespace horo
