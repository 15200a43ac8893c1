#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "horo/busemann.hpp"
#include "horo/errors.hpp"
#include "horo/flow.hpp"
#include "horo/ot.hpp"
#include "horo/quantile.hpp"
#include "horo/sliced.hpp"

using namespace horo;

namespace {

LabeledDataset make_blobs(uint64_t seed, int per_class, int C, int d, double spread) {
  RngStream r(seed, "blobs", 0);
  Eigen::MatrixXd X(per_class * C, d);
  std::vector<int> y(static_cast<size_t>(per_class * C));
  for (int c = 0; c < C; ++c) {
    const Eigen::VectorXd center = spread * r.normal_vec(d);
    for (int i = 0; i < per_class; ++i) {
      const int row = c * per_class + i;
      X.row(row) = (center + r.normal_vec(d)).transpose();
      y[static_cast<size_t>(row)] = c + 1;
    }
  }
  return LabeledDataset::make(std::move(X), std::move(y));
}

LabeledDataset dataset_from(const Eigen::MatrixXd& particles, int C, int n) {
  std::vector<int> labels(static_cast<size_t>(C * n));
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < n; ++i) labels[static_cast<size_t>(c * n + i)] = c + 1;
  return LabeledDataset::make(particles, std::move(labels));
}

double metric_objective(FlowMetric metric, const Eigen::MatrixXd& particles, int C, int n,
                        const LabeledDataset& target, int L, uint64_t seed) {
  const auto ds = dataset_from(particles, C, n);
  switch (metric) {
    case FlowMetric::sw:
      return sw_vanilla(EmpiricalMeasure::uniform(particles),
                        EmpiricalMeasure::uniform(target.features), L, seed)
          .mean_sq();
    case FlowMetric::swb1dg:
      return swb1dg(ds, target, L, seed).mean_sq();
    case FlowMetric::swbg:
      return swbg(ds, target, L, seed).mean_sq();
    case FlowMetric::sotdd:
      return sotdd_baseline(ds, target, L, seed).mean_sq();
  }
  return 0.0;
}

GaussianMixture random_mixture(RngStream& r, int K, int d) {
  std::vector<double> w(static_cast<size_t>(K));
  for (double& x : w) x = r.uniform(0.2, 1.0);
  std::vector<GaussianMeasure> comps;
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd m = 2.0 * r.normal_vec(d);
    Eigen::MatrixXd G(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) G(i, j) = r.normal();
    Eigen::MatrixXd cov = 0.3 * G * G.transpose() + 0.4 * Eigen::MatrixXd::Identity(d, d);
    comps.push_back(GaussianMeasure::make(std::move(m), std::move(cov)));
  }
  return GaussianMixture::make(std::move(w), std::move(comps));
}

}  // namespace

TEST_CASE("flow state round-trips the source dataset in class-major order") {
  auto src = make_blobs(1, 7, 3, 4, 1.0);
  const auto st = FlowState::init(src);
  CHECK(st.classes == 3);
  CHECK(st.per_class == 7);
  CHECK(st.size() == 21);
  const auto back = st.dataset();
  CHECK(back.num_classes == 3);
  for (int c = 1; c <= 3; ++c) {
    auto orig = class_conditional(src, c);
    auto got = class_conditional(back, c);
    CHECK((orig.points - got.points).cwiseAbs().maxCoeff() == 0.0);
  }

  Eigen::MatrixXd X(3, 2);
  X.setZero();
  CHECK_THROWS_AS(static_cast<void>(FlowState::init(
                      LabeledDataset::make(X, std::vector<int>{1, 1, 2}))),
                  InputError);
}

TEST_CASE("sw gradient on sorted pairs is the explicit matched difference") {
  Eigen::MatrixXd Xs(2, 1), Xt(2, 1);
  Xs << 0.3, -1.2;
  Xt << 2.0, -0.5;
  const auto st = FlowState::init(dataset_from(Xs, 1, 2));
  const auto tgt = dataset_from(Xt, 1, 2);
  const auto res = sliced_particle_grad(FlowMetric::sw, st, tgt, 6, 9);
  // sorted matching pairs -1.2 with -0.5 and 0.3 with 2.0; the per-particle
  // derivative of the squared distance is 2(x - y)/2, rescaled by n*C = 2
  CHECK(res.grad(0, 0) == doctest::Approx(2.0 * (0.3 - 2.0)).epsilon(1e-12));
  CHECK(res.grad(1, 0) == doctest::Approx(2.0 * (-1.2 + 0.5)).epsilon(1e-12));
  const double w2 = w2_1d_sq(Discrete1D::from_samples({0.3, -1.2}),
                             Discrete1D::from_samples({2.0, -0.5}));
  CHECK(res.objective_sq == doctest::Approx(w2).epsilon(1e-12));
}

TEST_CASE("gradient vanishes when the state already sits on the target") {
  auto tgt = make_blobs(2, 8, 2, 3, 1.5);
  const auto st = FlowState::init(tgt);
  for (FlowMetric m :
       {FlowMetric::sw, FlowMetric::swb1dg, FlowMetric::swbg, FlowMetric::sotdd}) {
    const auto res = sliced_particle_grad(m, st, tgt, 12, 5);
    CHECK(res.grad.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(res.objective_sq < 1e-20);
  }
}

TEST_CASE("gradients match central finite differences of the estimators") {
  auto src = make_blobs(3, 6, 2, 3, 1.2);
  auto tgt = make_blobs(4, 7, 2, 3, 1.2);
  const auto st = FlowState::init(src);
  const int N = st.size(), d = st.dim();
  const int L = 8;
  const uint64_t seed = 71;
  const double h = 1e-5;
  RngStream pick(6, "coords", 0);

  for (FlowMetric m : {FlowMetric::sw, FlowMetric::swb1dg, FlowMetric::sotdd}) {
    const auto res = sliced_particle_grad(m, st, tgt, L, seed);
    for (int trial = 0; trial < 100; ++trial) {
      const int i = static_cast<int>(pick.uniform_index(static_cast<uint64_t>(N)));
      const int j = static_cast<int>(pick.uniform_index(static_cast<uint64_t>(d)));
      Eigen::MatrixXd plus = st.particles, minus = st.particles;
      plus(i, j) += h;
      minus(i, j) -= h;
      const double fd = (metric_objective(m, plus, st.classes, st.per_class, tgt, L, seed) -
                         metric_objective(m, minus, st.classes, st.per_class, tgt, L, seed)) /
                        (2.0 * h);
      const double analytic = res.grad(i, j) / N;  // undo the dataset-space rescaling
      const double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-3});
      CHECK(rel <= 1e-4);
    }
  }
}

TEST_CASE("swbg gradient matches finite differences of the frozen-reducer objective") {
  auto src = make_blobs(5, 6, 2, 3, 1.2);
  auto tgt = make_blobs(6, 7, 2, 3, 1.2);
  const auto st = FlowState::init(src);
  const int N = st.size(), d = st.dim();
  const int L = 8;
  const uint64_t seed = 91;
  const double h = 1e-5;

  // the reducer the gradient call freezes
  const PcaReducer psi = pca_reduce_pair(st.particles, tgt.features, 3);
  const auto gT = reduced_class_gaussians(tgt, psi);
  const SlicedOptions no_hook;
  const auto frozen_objective = [&](const Eigen::MatrixXd& particles) {
    const auto ds = dataset_from(particles, st.classes, st.per_class);
    const auto gM = reduced_class_gaussians(ds, psi);
    double acc = 0.0;
    for (int l = 0; l < L; ++l) {
      RngStream rng(seed, "proj", static_cast<uint64_t>(l));
      const auto dr = draw_swbg(d, psi.out_dim(), rng, no_hook);
      ProjectionSpec spec;
      spec.theta = dr.theta;
      spec.alpha1 = dr.a1;
      spec.alpha2 = dr.a2;
      acc += w2_1d_sq(project_labeled(ds, spec, swbg_class_scalars(gM, dr.ray)),
                      project_labeled(tgt, spec, swbg_class_scalars(gT, dr.ray)));
    }
    return acc / L;
  };

  const auto res = sliced_particle_grad(FlowMetric::swbg, st, tgt, L, seed);
  CHECK(res.objective_sq == doctest::Approx(frozen_objective(st.particles)).epsilon(1e-12));

  RngStream pick(8, "coords", 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int i = static_cast<int>(pick.uniform_index(static_cast<uint64_t>(N)));
    const int j = static_cast<int>(pick.uniform_index(static_cast<uint64_t>(d)));
    Eigen::MatrixXd plus = st.particles, minus = st.particles;
    plus(i, j) += h;
    minus(i, j) -= h;
    const double fd = (frozen_objective(plus) - frozen_objective(minus)) / (2.0 * h);
    const double analytic = res.grad(i, j) / N;
    const double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-3});
    CHECK(rel <= 1e-4);
  }
}

TEST_CASE("gradient objective replays the estimator value") {
  auto src = make_blobs(7, 9, 3, 4, 1.3);
  auto tgt = make_blobs(8, 11, 3, 4, 1.3);
  const auto st = FlowState::init(src);
  const int L = 16;
  const uint64_t seed = 55;
  for (FlowMetric m :
       {FlowMetric::sw, FlowMetric::swb1dg, FlowMetric::swbg, FlowMetric::sotdd}) {
    const auto res = sliced_particle_grad(m, st, tgt, L, seed);
    const double est = metric_objective(m, st.particles, st.classes, st.per_class, tgt, L, seed);
    CHECK(res.objective_sq == doctest::Approx(est).epsilon(1e-12));
  }
}

TEST_CASE("flow_step implements momentum descent exactly") {
  auto src = make_blobs(9, 5, 2, 2, 1.0);
  const auto st = FlowState::init(src);
  FlowConfig cfg;
  cfg.step = 1.0;
  cfg.momentum = 0.0;

  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(st.size(), st.dim());
  const auto same = flow_step(st, zero, cfg);
  CHECK((same.particles - st.particles).cwiseAbs().maxCoeff() == 0.0);
  CHECK(same.iteration == 1);

  Eigen::MatrixXd g0 = Eigen::MatrixXd::Constant(st.size(), st.dim(), 0.25);
  const auto plain = flow_step(st, g0, cfg);
  CHECK((plain.particles - (st.particles - g0)).cwiseAbs().maxCoeff() == 0.0);

  // two steps of the momentum recursion, unrolled by hand
  cfg.momentum = 0.9;
  cfg.step = 0.5;
  Eigen::MatrixXd g1 = Eigen::MatrixXd::Constant(st.size(), st.dim(), -0.4);
  const auto s1 = flow_step(st, g0, cfg);
  const auto s2 = flow_step(s1, g1, cfg);
  const Eigen::MatrixXd expect =
      st.particles - cfg.step * g0 - cfg.step * (0.9 * g0 + g1);
  CHECK((s2.particles - expect).cwiseAbs().maxCoeff() < 1e-15);

  FlowConfig bad = cfg;
  bad.step = 0.0;
  CHECK_THROWS_AS(static_cast<void>(flow_step(st, g0, bad)), InputError);
  bad = cfg;
  bad.momentum = 1.0;
  CHECK_THROWS_AS(static_cast<void>(flow_step(st, g0, bad)), InputError);
  CHECK_THROWS_AS(static_cast<void>(flow_step(st, Eigen::MatrixXd::Zero(2, 2), cfg)), InputError);
}

TEST_CASE("flowing a dataset onto itself stays put") {
  auto src = make_blobs(10, 6, 2, 2, 1.5);
  FlowConfig cfg;
  cfg.metric = FlowMetric::swb1dg;
  cfg.iterations = 20;
  cfg.projections = 8;
  cfg.seed = 12;
  Eigen::MatrixXd prev = FlowState::init(src).particles;
  double max_step_change = 0.0;
  const auto res = run_flow(src, src, cfg, [&](const FlowState& s, const FlowRecord&) {
    max_step_change = std::max(max_step_change, (s.particles - prev).cwiseAbs().maxCoeff());
    prev = s.particles;
  });
  max_step_change =
      std::max(max_step_change, (res.state.particles - prev).cwiseAbs().maxCoeff());
  CHECK(max_step_change <= 1e-9);
  for (const auto& r : res.records) CHECK(r.objective <= 1e-9);
}

TEST_CASE("small-step flow decreases the exact coupling objective") {
  auto src = make_blobs(11, 8, 2, 2, 1.2);
  auto tgt = make_blobs(12, 8, 2, 2, 1.2);
  FlowConfig cfg;
  cfg.metric = FlowMetric::swb1dg;
  cfg.step = 0.05;
  cfg.momentum = 0.0;
  cfg.iterations = 120;
  cfg.projections = 512;
  cfg.seed = 5;

  std::vector<double> exact;
  const auto res = run_flow(src, tgt, cfg, [&](const FlowState& s, const FlowRecord&) {
    exact.push_back(otdd_exact(s.dataset(), tgt));
  });
  REQUIRE(exact.size() == 120);
  int down = 0;
  for (size_t k = 0; k + 1 < exact.size(); ++k)
    if (exact[k + 1] <= exact[k] + 1e-12) ++down;
  CHECK(down >= static_cast<int>(0.95 * (exact.size() - 1)));
  CHECK(exact.back() < exact.front());
}

TEST_CASE("stochastic objective estimates trend down through a rings run") {
  auto tgt = rings_target(20, {1.0, 2.0, 3.0}, 0, RingsMode::evenly);
  auto src = make_blobs(3, 20, 3, 2, 0.6);
  FlowConfig cfg;
  cfg.metric = FlowMetric::swbg;
  cfg.step = 1.0;
  cfg.momentum = 0.9;
  cfg.iterations = 200;
  cfg.projections = 64;
  cfg.seed = 3;
  const auto res = run_flow(src, tgt, cfg);
  REQUIRE(res.records.size() == 200);
  // after the warmup phase the estimates should sit below where they were;
  // consecutive estimates use fresh projection draws, so pairwise comparisons
  // near the plateau are coin flips and are not a meaningful descent signal
  const double ref = res.records[50].objective;
  int below = 0, total = 0;
  for (size_t k = 51; k < res.records.size(); ++k) {
    ++total;
    if (res.records[k].objective < ref) ++below;
  }
  CHECK(below >= static_cast<int>(0.8 * total));
  // and the flow actually went somewhere useful
  CHECK(res.records.back().objective < 0.5 * res.records.front().objective);
}

TEST_CASE("translating source and target together translates the whole trajectory") {
  auto src = make_blobs(14, 5, 2, 2, 1.0);
  auto tgt = make_blobs(15, 6, 2, 2, 1.0);
  Eigen::RowVector2d v(1.7, -2.3);
  auto src_t = LabeledDataset::make(src.features.rowwise() + v, src.labels);
  auto tgt_t = LabeledDataset::make(tgt.features.rowwise() + v, tgt.labels);

  for (FlowMetric m : {FlowMetric::sw, FlowMetric::swb1dg, FlowMetric::swbg}) {
    FlowConfig cfg;
    cfg.metric = m;
    cfg.step = 0.5;
    cfg.momentum = 0.9;
    cfg.iterations = 12;
    cfg.projections = 16;
    cfg.seed = 77;
    const auto a = run_flow(src, tgt, cfg);
    const auto b = run_flow(src_t, tgt_t, cfg);
    const Eigen::MatrixXd shifted = a.state.particles.rowwise() + v;
    CHECK((b.state.particles - shifted).cwiseAbs().maxCoeff() <= 1e-9);
    for (size_t k = 0; k < a.records.size(); ++k)
      CHECK(a.records[k].objective == doctest::Approx(b.records[k].objective).epsilon(1e-9));
  }
}

TEST_CASE("run_flow aborts cleanly when the step size blows the flow up") {
  auto src = make_blobs(16, 5, 2, 2, 1.0);
  auto tgt = make_blobs(17, 5, 2, 2, 1.0);
  FlowConfig cfg;
  cfg.metric = FlowMetric::sw;
  cfg.step = 1e8;
  cfg.momentum = 0.0;
  cfg.iterations = 50;
  cfg.projections = 4;
  CHECK_THROWS_AS(static_cast<void>(run_flow(src, tgt, cfg)), CapacityError);
}

TEST_CASE("target batching keeps runs reproducible") {
  auto src = make_blobs(18, 6, 2, 2, 1.0);
  auto tgt = make_blobs(19, 30, 2, 2, 1.0);
  FlowConfig cfg;
  cfg.metric = FlowMetric::swb1dg;
  cfg.iterations = 10;
  cfg.projections = 8;
  cfg.step = 0.5;
  cfg.target_batch = 12;
  cfg.seed = 9;
  const auto a = run_flow(src, tgt, cfg);
  const auto b = run_flow(src, tgt, cfg);
  CHECK((a.state.particles - b.state.particles).cwiseAbs().maxCoeff() == 0.0);
  cfg.target_batch = 0;
  const auto full = run_flow(src, tgt, cfg);
  CHECK((a.state.particles - full.state.particles).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("rings_target lays classes on their circles") {
  const auto even = rings_target(12, {1.0, 2.0, 3.0}, 0, RingsMode::evenly);
  CHECK(even.num_classes == 3);
  for (int c = 1; c <= 3; ++c) CHECK(even.class_size(c) == 12);
  for (int i : even.class_index[0])
    CHECK(even.features.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  for (int i : even.class_index[2])
    CHECK(even.features.row(i).norm() == doctest::Approx(3.0).epsilon(1e-12));

  const auto u1 = rings_target(12, {1.0, 2.0}, 42, RingsMode::uniform);
  const auto u2 = rings_target(12, {1.0, 2.0}, 42, RingsMode::uniform);
  const auto u3 = rings_target(12, {1.0, 2.0}, 43, RingsMode::uniform);
  CHECK((u1.features - u2.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((u1.features - u3.features).cwiseAbs().maxCoeff() > 0.0);
  for (int i : u1.class_index[1])
    CHECK(u1.features.row(i).norm() == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(static_cast<void>(rings_target(5, {1.0, 1.0})), InputError);
  CHECK_THROWS_AS(static_cast<void>(rings_target(5, {1.0, -2.0})), InputError);
  CHECK_THROWS_AS(static_cast<void>(rings_target(0, {1.0})), InputError);
}

TEST_CASE("exact nested transport evaluation") {
  auto P = make_blobs(20, 6, 2, 2, 2.0);
  CHECK(wow_distance_eval(P, P).value == doctest::Approx(0.0).epsilon(1e-9));

  // permuting the class blocks leaves the collection of class measures
  // unchanged; the outer plan must find the crossing
  const int n1 = P.class_size(1), n2 = P.class_size(2);
  Eigen::MatrixXd perm(P.features.rows(), P.features.cols());
  perm.topRows(n2) = P.features.bottomRows(n2);
  perm.bottomRows(n1) = P.features.topRows(n1);
  std::vector<int> plabels;
  plabels.insert(plabels.end(), static_cast<size_t>(n2), 1);
  plabels.insert(plabels.end(), static_cast<size_t>(n1), 2);
  auto Pswap = LabeledDataset::make(perm, plabels);
  CHECK(wow_distance_eval(P, Pswap).value < 1e-9);
  const auto match = wow_class_match(wow_distance_eval(P, Pswap), 2);
  CHECK(match[0] == 2);
  CHECK(match[1] == 1);

  // two classes: the optimal outer plan is the cheaper of both assignments
  auto Q = make_blobs(21, 5, 2, 2, 2.0);
  Eigen::MatrixXd cost(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      cost(a, b) = w2_empirical_sq(class_conditional(P, a + 1), class_conditional(Q, b + 1));
  const double brute =
      std::min(0.5 * (cost(0, 0) + cost(1, 1)), 0.5 * (cost(0, 1) + cost(1, 0)));
  const auto eval = wow_distance_eval(P, Q);
  CHECK(eval.value * eval.value == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("snapshots and trajectories round-trip through disk") {
  namespace fs = std::filesystem;
  auto src = make_blobs(22, 4, 2, 3, 1.0);
  const auto st = FlowState::init(src);
  const std::string dir = (fs::temp_directory_path() / "horo_flow_test").string();
  fs::remove_all(dir);
  write_snapshot(st, dir, 7);

  std::ifstream bf(fs::path(dir) / "snapshot_000007.bin", std::ios::binary);
  REQUIRE(bf.good());
  std::vector<double> buf(static_cast<size_t>(st.size() * st.dim()));
  bf.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(double)));
  REQUIRE(bf.gcount() == static_cast<std::streamsize>(buf.size() * sizeof(double)));
  for (int i = 0; i < st.size(); ++i)
    for (int j = 0; j < st.dim(); ++j)
      CHECK(buf[static_cast<size_t>(i * st.dim() + j)] == st.particles(i, j));

  std::ifstream sf(fs::path(dir) / "snapshot_000007.json");
  REQUIRE(sf.good());
  nlohmann::json meta = nlohmann::json::parse(sf);
  CHECK(meta["rows"] == st.size());
  CHECK(meta["cols"] == st.dim());
  CHECK(meta["classes"] == 2);
  CHECK(meta["per_class"] == 4);
  CHECK(meta["iteration"] == 7);
  CHECK(meta["dtype"] == "float64");

  std::vector<FlowRecord> recs(2);
  recs[0].iteration = 0;
  recs[0].objective = 1.5;
  recs[1].iteration = 1;
  recs[1].objective = 1.25;
  recs[1].wow = 0.75;
  const std::string csv = (fs::path(dir) / "traj.csv").string();
  save_trajectory_csv(recs, csv);
  std::ifstream cf(csv);
  std::string line;
  std::getline(cf, line);
  CHECK(line == "iteration,objective,wow");
  std::getline(cf, line);
  CHECK(line == "0,1.5,");
  std::getline(cf, line);
  CHECK(line == "1,1.25,0.75");
  fs::remove_all(dir);
}

TEST_CASE("mixture flow state projects onto valid parameters") {
  RngStream r(23, "t", 0);
  auto target = random_mixture(r, 2, 2);
  auto state = GMMFlowState::init(target);
  const auto round = state.mixture();
  CHECK(mixture_bw_distance(round, target) < 1e-6);

  FlowConfig cfg;
  cfg.step = 0.1;
  cfg.momentum = 0.0;
  cfg.projections = 16;
  cfg.seed = 4;
  // already at the optimum: finite differences see a flat objective
  const auto next = gmm_flow_step(state, target, GmmMetric::b1dgmsw, cfg);
  double update = (next.logits - state.logits).norm() + (next.means - state.means).norm();
  for (int k = 0; k < state.size(); ++k)
    update += (next.factors[static_cast<size_t>(k)] - state.factors[static_cast<size_t>(k)]).norm();
  CHECK(update <= 1e-6);
}

TEST_CASE("mixture flow descends toward the target under the exact metric") {
  RngStream r(24, "t", 1);
  auto target = random_mixture(r, 2, 2);
  auto start = random_mixture(r, 2, 2);
  auto state = GMMFlowState::init(start);
  const double initial = mixture_bw_distance(state.mixture(), target);

  FlowConfig cfg;
  cfg.step = 0.2;
  cfg.momentum = 0.0;
  cfg.seed = 10;
  for (int it = 0; it < 25; ++it) {
    state = gmm_flow_step(state, target, GmmMetric::bw_exact, cfg);
    const auto mix = state.mixture();
    double wsum = 0.0;
    for (double w : mix.weights) {
      CHECK(w >= 0.0);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& comp : mix.components) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(comp.cov);
      CHECK(es.eigenvalues().minCoeff() >= state.eig_floor - 1e-9);
    }
  }
  const double final_dist = mixture_bw_distance(state.mixture(), target);
  CHECK(final_dist < 0.9 * initial);
  CHECK(state.iteration == 25);
}
