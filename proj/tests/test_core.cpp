#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "horo/errors.hpp"
#include "horo/measures.hpp"
#include "horo/normal.hpp"
#include "horo/quantile.hpp"
#include "horo/rng.hpp"

using namespace horo;

// Adaptive Simpson quadrature, used as an independent oracle for the
// closed-form quantile-cell integrals.
static double simpson(double (*f)(double), double a, double b, double fa, double fb, double fm,
                      double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, fm, flm, eps / 2.0, depth - 1) +
         simpson(f, m, b, fm, fb, frm, eps / 2.0, depth - 1);
}
static double integrate(double (*f)(double), double a, double b, double eps = 1e-12) {
  double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(b), f(m), eps, 40);
}

TEST_CASE("normal ppf/cdf round trip and known values") {
  CHECK(norm_ppf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(norm_ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  for (int i = 1; i < 400; ++i) {
    double u = i / 400.0;
    CHECK(norm_cdf(norm_ppf(u)) == doctest::Approx(u).epsilon(1e-12));
  }
  CHECK(std::isinf(norm_ppf(0.0)));
  CHECK(std::isinf(norm_ppf(1.0)));
}

TEST_CASE("normal cell moments match quadrature") {
  // integral of ppf over (0, 0.5) is -1/sqrt(2*pi)
  NormalBoundary b0 = normal_boundary(0.0);
  NormalBoundary bh = normal_boundary(0.5);
  NormalBoundary b1 = normal_boundary(1.0);
  CellMoments left = normal_cell_moments(b0, bh);
  CHECK(left.m1 == doctest::Approx(-0.3989422804014327).epsilon(1e-12));
  CellMoments whole = normal_cell_moments(b0, b1);
  CHECK(whole.m1 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(whole.m2 == doctest::Approx(1.0).epsilon(1e-14));  // unit variance

  // generic cells against quadrature
  auto quad1 = integrate(&norm_ppf, 0.1, 0.37);
  auto sq = +[](double u) { double z = norm_ppf(u); return z * z; };
  auto quad2 = integrate(sq, 0.1, 0.37);
  CellMoments m = normal_cell_moments(normal_boundary(0.1), normal_boundary(0.37));
  CHECK(m.m1 == doctest::Approx(quad1).epsilon(1e-9));
  CHECK(m.m2 == doctest::Approx(quad2).epsilon(1e-9));
  // a cell reaching into the upper tail
  auto quad3 = integrate(&norm_ppf, 0.6, 0.999999);
  CellMoments tail = normal_cell_moments(normal_boundary(0.6), normal_boundary(0.999999));
  CHECK(tail.m1 == doctest::Approx(quad3).epsilon(1e-6));
}

TEST_CASE("rng substreams are deterministic and independent of call order") {
  RngStream a(42, "proj", 7);
  RngStream b(42, "proj", 7);
  for (int i = 0; i < 16; ++i) CHECK(a.uniform01() == b.uniform01());
  RngStream c(42, "proj", 8);
  bool same = true;
  RngStream a2(42, "proj", 7);
  for (int i = 0; i < 16; ++i) same = same && (a2.uniform01() == c.uniform01());
  CHECK(!same);
  RngStream d(42, "pairs", 7);  // different purpose tag
  bool same2 = true;
  RngStream a3(42, "proj", 7);
  for (int i = 0; i < 16; ++i) same2 = same2 && (a3.uniform01() == d.uniform01());
  CHECK(!same2);
}

TEST_CASE("rng normal and sphere sampling") {
  RngStream r(123, "test", 0);
  int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::fabs(s / n) < 0.02);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));

  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd v = r.sphere(5);
    CHECK(std::fabs(v.norm() - 1.0) < 1e-14);
  }
  // d=1 gives exactly +-1
  for (int i = 0; i < 20; ++i) {
    double v = r.sphere(1)[0];
    CHECK(std::fabs(std::fabs(v) - 1.0) < 1e-15);
  }
  // coordinate means vanish by symmetry
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
  int m = 100000;
  for (int i = 0; i < m; ++i) mean += r.sphere(4);
  mean /= m;
  for (int j = 0; j < 4; ++j) CHECK(std::fabs(mean[j]) < 0.02);
}

TEST_CASE("discrete quantile basics") {
  auto m = Discrete1D::from_samples({2, 0});
  CHECK(quantile_eval(m, 0.5) == 0.0);
  CHECK(quantile_eval(m, 0.75) == 2.0);
  CHECK(quantile_eval(m, 1.0) == 2.0);
  CHECK_THROWS_AS(quantile_eval(m, 0.0), InputError);
  CHECK_THROWS_AS(quantile_eval(m, 1.5), InputError);
  Gaussian1D g{0.0, 1.0};
  CHECK(quantile_eval(g, 0.5) == doctest::Approx(0.0).epsilon(1e-15));

  // non-decreasing in u on random pairs
  RngStream r(7, "quantile", 0);
  auto w = Discrete1D::weighted({3.0, -1.0, 0.5, 2.0}, {0.1, 0.4, 0.3, 0.2});
  for (int i = 0; i < 1000; ++i) {
    double u1 = r.uniform(1e-9, 1.0), u2 = r.uniform(1e-9, 1.0);
    if (u1 > u2) std::swap(u1, u2);
    CHECK(w.quantile(u1) <= w.quantile(u2));
    CHECK(g.quantile(u1) <= g.quantile(u2));
  }

  // midpoint-grid average of the quantile recovers the sample mean exactly
  auto u = Discrete1D::from_samples({0.25, -3.5, 7.0, 1.5, 2.0});
  double acc = 0.0;
  int n = u.size();
  for (int i = 0; i < n; ++i) acc += u.quantile((i + 0.5) / n);
  CHECK(acc / n == doctest::Approx(u.mean()).epsilon(1e-15));
}

TEST_CASE("gaussian moments of empirical measures") {
  Eigen::MatrixXd pts(2, 2);
  pts << 0, 0, 2, 0;
  auto g = gaussian_moments(EmpiricalMeasure::uniform(pts));
  CHECK(g.mean[0] == doctest::Approx(1.0));
  CHECK(g.mean[1] == doctest::Approx(0.0));
  CHECK(g.cov(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(g.cov(1, 1) > 0.0);  // jittered, not exactly 0
  CHECK(g.cov(1, 1) < 1e-8);

  Eigen::MatrixXd one(1, 1);
  one << 5.0;
  auto g1 = gaussian_moments(EmpiricalMeasure::uniform(one));
  CHECK(g1.mean[0] == doctest::Approx(5.0));
  CHECK(g1.cov(0, 0) > 0.0);

  // law of large numbers at n = 1e5
  RngStream r(99, "lln", 0);
  int n = 100000;
  Eigen::MatrixXd X(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) X(i, j) = r.normal();
  auto gg = gaussian_moments(EmpiricalMeasure::uniform(X));
  for (int j = 0; j < 3; ++j) CHECK(std::fabs(gg.mean[j]) < 0.02);
  CHECK((gg.cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("moment estimation error halves when n quadruples") {
  // median over repetitions to tame sampling noise in the ratio
  auto err_at = [](int n, uint64_t seed) {
    RngStream r(seed, "conv", n);
    Eigen::MatrixXd X(n, 2);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1.0 + 2.0 * r.normal();
      X(i, 1) = -0.5 + 0.5 * r.normal();
    }
    auto g = gaussian_moments(EmpiricalMeasure::uniform(X));
    Eigen::MatrixXd truth(2, 2);
    truth << 4.0, 0.0, 0.0, 0.25;
    double e = (g.cov - truth).norm() + std::fabs(g.mean[0] - 1.0) + std::fabs(g.mean[1] + 0.5);
    return e;
  };
  std::vector<double> ratios;
  for (uint64_t s = 0; s < 9; ++s) {
    double e1 = err_at(4000, s), e2 = err_at(16000, s);
    ratios.push_back(e1 / e2);
  }
  std::sort(ratios.begin(), ratios.end());
  double med = ratios[4];
  CHECK(med > 1.6);
  CHECK(med < 2.4);
}

TEST_CASE("class conditionals") {
  Eigen::MatrixXd X(3, 1);
  X << 0, 1, 2;
  auto ds = LabeledDataset::make(X, {1, 1, 2});
  auto m1 = class_conditional(ds, 1);
  CHECK(m1.size() == 2);
  CHECK(m1.points(0, 0) == 0.0);
  CHECK(m1.points(1, 0) == 1.0);
  auto m2 = class_conditional(ds, 2);
  CHECK(m2.size() == 1);
  CHECK(m2.points(0, 0) == 2.0);
  CHECK_THROWS_AS(class_conditional(ds, 3), InputError);

  auto all = LabeledDataset::make(X, {4, 4, 4});
  CHECK(all.num_classes == 1);
  CHECK(class_conditional(all, 1).size() == 3);
}

TEST_CASE("dataset csv round trip and errors") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "horo_test_core";
  fs::create_directories(dir);
  auto path = (dir / "ds.csv").string();

  Eigen::MatrixXd X(3, 2);
  X << 0.125, -3.75, 1e-7, 42.0, 3.5, 0.0;
  auto ds = LabeledDataset::make(X, {1, 2, 1});
  save_dataset_csv(ds, path);
  auto back = load_dataset_csv(path);
  CHECK(back.size() == 3);
  CHECK(back.num_classes == 2);
  CHECK((back.features - ds.features).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(back.labels == ds.labels);

  auto bad = (dir / "bad.csv").string();
  {
    FILE* f = fopen(bad.c_str(), "w");
    fputs("f0,f1,label\n1.0,2.0,1\nnan,2.0,1\n", f);
    fclose(f);
  }
  try {
    load_dataset_csv(bad);
    CHECK(false);
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
}

TEST_CASE("mixture json round trip") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "horo_test_core";
  fs::create_directories(dir);
  auto path = (dir / "mix.json").string();

  Eigen::VectorXd m1(2), m2(2);
  m1 << 0, 1;
  m2 << -2, 3;
  Eigen::MatrixXd c1(2, 2), c2(2, 2);
  c1 << 2, 0.5, 0.5, 1;
  c2 << 1, 0, 0, 4;
  auto mix = GaussianMixture::make({0.25, 0.75}, {GaussianMeasure::make(m1, c1),
                                                  GaussianMeasure::make(m2, c2)});
  save_mixture_json(mix, path);
  auto back = load_mixture_json(path);
  CHECK(back.size() == 2);
  CHECK(back.weights[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK((back.components[1].cov - c2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("piecewise quantile distances: gaussian closed form") {
  // With unit-variance quantile moments, W2^2 between Gaussians is
  // (m1-m2)^2 + (s1-s2)^2; exercises every cell-moment identity.
  auto f = PiecewiseQuantile::gaussian(1.0, 2.0);
  auto g = PiecewiseQuantile::gaussian(-0.5, 0.75);
  double d2 = pq_dist2(f, g);
  CHECK(d2 == doctest::Approx(1.5 * 1.5 + 1.25 * 1.25).epsilon(1e-13));

  // mixed gaussian/step distance against quadrature of the two quantiles
  auto disc = Discrete1D::weighted({-1.0, 0.25, 2.0}, {0.2, 0.5, 0.3});
  auto fd = PiecewiseQuantile::from(disc);
  double got = pq_dist2(f, fd);
  double acc = 0.0;
  int N = 200000;  // midpoint rule; integrand is bounded on the interior grid
  for (int i = 0; i < N; ++i) {
    double u = (i + 0.5) / N;
    double dv = f.eval(u) - fd.eval(u);
    acc += dv * dv;
  }
  acc /= N;
  CHECK(got == doctest::Approx(acc).epsilon(1e-3));
}

TEST_CASE("w2_1d examples and merged breakpoints") {
  auto d0 = Discrete1D::from_samples({0.0});
  auto d3 = Discrete1D::from_samples({3.0});
  CHECK(w2_1d(d0, d3) == doctest::Approx(3.0).epsilon(1e-15));

  auto a = Discrete1D::from_samples({0.0, 2.0});
  auto b = Discrete1D::from_samples({1.0, 3.0});
  CHECK(w2_1d(a, b) == doctest::Approx(1.0).epsilon(1e-15));

  // weighted measures against the uniform-expansion oracle: a weight k/8
  // atom equals k copies at weight 1/8
  auto w1 = Discrete1D::weighted({0.0, 1.0}, {0.25, 0.75});
  auto w2m = Discrete1D::weighted({-1.0, 2.0}, {0.5, 0.5});
  auto e1 = Discrete1D::from_samples({0, 0, 1, 1, 1, 1, 1, 1});
  auto e2 = Discrete1D::from_samples({-1, -1, -1, -1, 2, 2, 2, 2});
  CHECK(w2_1d_sq(w1, w2m) == doctest::Approx(w2_1d_sq(e1, e2)).epsilon(1e-14));
}

TEST_CASE("geodesic_1d endpoints and midpoint") {
  auto a = Discrete1D::from_samples({0.0, 2.0});
  auto b = Discrete1D::from_samples({2.0, 4.0});
  auto at0 = geodesic_1d(a, b, 0.0);
  CHECK(at0.values == a.values);
  auto mid = geodesic_1d(a, b, 0.5);
  CHECK(mid.values[0] == doctest::Approx(1.0));
  CHECK(mid.values[1] == doctest::Approx(3.0));

  Gaussian1D g0{0, 1}, g1{2, 3};
  auto gm = geodesic_1d(g0, g1, 0.25);
  CHECK(gm.mean == doctest::Approx(0.5));
  CHECK(gm.sd == doctest::Approx(1.5));

  // strict mode rejects t beyond the valid range for a non-ray pair
  auto x = Discrete1D::from_samples({0.0, 1.0});
  auto y = Discrete1D::from_samples({0.0, 0.5});
  CHECK_THROWS_AS(geodesic_1d(x, y, 4.0, true), InputError);
  // but allows it for a ray pair (quantile difference non-decreasing)
  auto yr = Discrete1D::from_samples({0.0, 2.0});
  auto far = geodesic_1d(x, yr, 4.0, true);
  CHECK(far.values[1] == doctest::Approx(5.0));
}

TEST_CASE("constant speed along 1d geodesics") {
  RngStream r(5, "speed", 0);
  std::vector<double> xs, ys;
  for (int i = 0; i < 8; ++i) xs.push_back(r.uniform(-2, 2));
  for (int i = 0; i < 8; ++i) ys.push_back(r.uniform(-2, 2));
  auto a = Discrete1D::from_samples(xs);
  auto b = Discrete1D::from_samples(ys);
  double base = w2_1d(a, b);
  for (int k = 0; k < 10; ++k) {
    double s = r.uniform01(), t = r.uniform01();
    auto ms = geodesic_1d(a, b, s);
    auto mt = geodesic_1d(a, b, t);
    CHECK(w2_1d(ms, mt) == doctest::Approx(std::fabs(t - s) * base).epsilon(1e-10));
  }
}

TEST_CASE("quantile difference monotonicity check") {
  auto x = PiecewiseQuantile::from(Discrete1D::from_samples({0.0, 1.0}));
  auto y = PiecewiseQuantile::from(Discrete1D::from_samples({0.0, 2.0}));
  CHECK(pq_diff_nondecreasing(x, y));
  auto ybad = PiecewiseQuantile::from(Discrete1D::from_samples({0.0, 0.5}));
  CHECK(!pq_diff_nondecreasing(x, ybad));
  // gaussian pair: monotone iff sd grows
  auto g1 = PiecewiseQuantile::gaussian(0, 1);
  auto g2 = PiecewiseQuantile::gaussian(5, 2);
  CHECK(pq_diff_nondecreasing(g1, g2));
  CHECK(!pq_diff_nondecreasing(g2, g1));
}
