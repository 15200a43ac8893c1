#include "horo/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <utility>

#include "horo/busemann.hpp"
#include "horo/errors.hpp"
#include "horo/parallel.hpp"
#include "horo/quantile.hpp"

namespace horo {

FlowState FlowState::init(const LabeledDataset& source) {
  FlowState s;
  s.classes = source.num_classes;
  if (s.classes < 1) throw InputError("FlowState: source has no classes");
  s.per_class = source.class_size(1);
  for (int c = 2; c <= s.classes; ++c)
    if (source.class_size(c) != s.per_class)
      throw InputError("FlowState: class sizes must be equal");
  s.particles.resize(s.classes * s.per_class, source.dim());
  int row = 0;
  for (int c = 0; c < s.classes; ++c)
    for (int idx : source.class_index[static_cast<size_t>(c)])
      s.particles.row(row++) = source.features.row(idx);
  s.velocity = Eigen::MatrixXd::Zero(s.particles.rows(), s.particles.cols());
  return s;
}

LabeledDataset FlowState::dataset() const {
  std::vector<int> labels(static_cast<size_t>(size()));
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < per_class; ++i) labels[static_cast<size_t>(c * per_class + i)] = c + 1;
  return LabeledDataset::make(particles, std::move(labels));
}

double SlicedGrad::objective() const { return std::sqrt(std::max(0.0, objective_sq)); }

// Squared distance between the uniform measure on sorted values sp and the
// target, plus the derivative with respect to each sorted value: twice the
// gap between the value and the target quantile averaged over its rank cell.
static double w2_grad_walk(const std::vector<double>& sp, const Discrete1D& tgt,
                           std::vector<double>& dR) {
  const int N = static_cast<int>(sp.size());
  const int M = static_cast<int>(tgt.values.size());
  dR.assign(static_cast<size_t>(N), 0.0);
  double w2 = 0.0;
  double u = 0.0;
  int j = 0;
  const double invN = 1.0 / static_cast<double>(N);
  for (int r = 0; r < N; ++r) {
    // same arithmetic the uniform measures use for their cumulative weights, so
    // equal-size identical inputs produce exactly aligned cells (and w2 == 0)
    const double hi = (r + 1 == N) ? 1.0 : static_cast<double>(r + 1) / N;
    double integ = 0.0;
    while (u < hi) {
      const double tc = j < M ? tgt.cum[static_cast<size_t>(j)] : 1.0;
      const double end = std::min(hi, tc);
      const double q = tgt.values[static_cast<size_t>(std::min(j, M - 1))];
      const double w = end - u;
      if (w > 0.0) {
        integ += q * w;
        const double diff = sp[static_cast<size_t>(r)] - q;
        w2 += diff * diff * w;
      }
      u = end;
      if (end == tc && j < M) ++j;
    }
    dR[static_cast<size_t>(r)] = 2.0 * (sp[static_cast<size_t>(r)] * invN - integ);
  }
  return w2;
}

static std::vector<int> argsort(const std::vector<double>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return v[static_cast<size_t>(a)] < v[static_cast<size_t>(b)]; });
  return idx;
}

// Sorts the moving values, runs the walk against the target, and scatters the
// per-rank derivatives back to particle order. Returns the squared distance.
static double moving_derivatives(const std::vector<double>& p, const Discrete1D& tgt,
                                 std::vector<double>& D) {
  const auto idx = argsort(p);
  std::vector<double> sp(p.size());
  for (size_t r = 0; r < idx.size(); ++r) sp[r] = p[static_cast<size_t>(idx[r])];
  std::vector<double> dR;
  const double w2 = w2_grad_walk(sp, tgt, dR);
  D.assign(p.size(), 0.0);
  for (size_t r = 0; r < idx.size(); ++r) D[static_cast<size_t>(idx[r])] = dR[r];
  return w2;
}

SlicedGrad sliced_particle_grad(FlowMetric metric, const FlowState& state,
                                const LabeledDataset& target, int L, std::uint64_t seed,
                                const GradOptions& opt) {
  if (L < 1) throw InputError("sliced_particle_grad: need at least one projection");
  if (state.dim() != target.dim()) throw InputError("sliced_particle_grad: dimension mismatch");
  if (!state.particles.allFinite()) throw InputError("sliced_particle_grad: non-finite particles");
  const int N = state.size();
  const int n = state.per_class;
  const int C = state.classes;
  const int d = state.dim();
  const LabeledDataset moving = state.dataset();
  const auto cls_of = [&](int row) { return row / n; };

  // metric-specific per-call state, frozen across projections
  std::vector<std::vector<double>> wMov, wTgt;             // swb1dg
  PcaReducer psi;                                          // swbg
  std::vector<GaussianMeasure> gMov, gTgt;                 // swbg
  std::vector<Eigen::MatrixXd> sqrtS, isqrtS;              // swbg
  Eigen::MatrixXd Z;                                       // swbg reduced particles
  if (metric == FlowMetric::swb1dg) {
    wMov = class_normal_weights(moving);
    wTgt = class_normal_weights(target);
  } else if (metric == FlowMetric::swbg) {
    psi = pca_reduce_pair(state.particles, target.features, std::min(opt.d_reduced, d));
    gMov = reduced_class_gaussians(moving, psi);
    gTgt = reduced_class_gaussians(target, psi);
    Z = psi.apply(state.particles);
    for (const auto& g : gMov) {
      sqrtS.push_back(sym_sqrt(g.cov));
      isqrtS.push_back(sym_inv_sqrt(g.cov));
    }
  }

  std::vector<Eigen::MatrixXd> slots(static_cast<size_t>(L));
  std::vector<double> terms(static_cast<size_t>(L));
  const SlicedOptions draw_opt;  // plain draws, no test hooks

  parallel_for(opt.threads, L, [&](int l) {
    RngStream rng(seed, "proj", static_cast<uint64_t>(l));
    Eigen::MatrixXd slot = Eigen::MatrixXd::Zero(N, d);
    std::vector<double> p(static_cast<size_t>(N)), D;

    switch (metric) {
      case FlowMetric::sw: {
        const Eigen::VectorXd theta = rng.sphere(d);
        const Eigen::VectorXd g = state.particles * theta;
        for (int i = 0; i < N; ++i) p[static_cast<size_t>(i)] = g[i];
        const Eigen::VectorXd tg = target.features * theta;
        const Discrete1D td =
            Discrete1D::from_samples(std::vector<double>(tg.data(), tg.data() + tg.size()));
        terms[static_cast<size_t>(l)] = moving_derivatives(p, td, D);
        for (int i = 0; i < N; ++i) slot.row(i) = D[static_cast<size_t>(i)] * theta.transpose();
        break;
      }
      case FlowMetric::swb1dg: {
        const DrawSWB1DG dr = draw_swb1dg(d, rng, draw_opt);
        const Eigen::VectorXd g = state.particles * dr.theta;
        const auto sM = swb1dg_class_scalars(moving, dr.theta, dr.ray, wMov);
        const auto sT = swb1dg_class_scalars(target, dr.theta, dr.ray, wTgt);
        for (int i = 0; i < N; ++i)
          p[static_cast<size_t>(i)] = dr.a1 * g[i] + dr.a2 * sM[static_cast<size_t>(cls_of(i))];
        ProjectionSpec spec;
        spec.theta = dr.theta;
        spec.alpha1 = dr.a1;
        spec.alpha2 = dr.a2;
        terms[static_cast<size_t>(l)] = moving_derivatives(p, project_labeled(target, spec, sT), D);

        const double speed = std::hypot(dr.ray.m1, dr.ray.s1);
        for (int c = 0; c < C; ++c) {
          // rank of each class member in its projected class order
          std::vector<double> gv(static_cast<size_t>(n));
          for (int i = 0; i < n; ++i) gv[static_cast<size_t>(i)] = g[c * n + i];
          const auto order = argsort(gv);
          double S = 0.0;
          for (int i = 0; i < n; ++i) S += D[static_cast<size_t>(c * n + i)];
          const auto& w = wMov[static_cast<size_t>(c)];
          for (int r = 0; r < n; ++r) {
            const int row = c * n + order[static_cast<size_t>(r)];
            const double dB =
                -(dr.ray.m1 / static_cast<double>(n) + dr.ray.s1 * w[static_cast<size_t>(r)]) /
                speed;
            const double coef = dr.a1 * D[static_cast<size_t>(row)] + dr.a2 * S * dB;
            slot.row(row) = coef * dr.theta.transpose();
          }
        }
        break;
      }
      case FlowMetric::swbg: {
        const DrawSWBG dr = draw_swbg(d, psi.out_dim(), rng, draw_opt);
        const Eigen::VectorXd g = state.particles * dr.theta;
        const auto sM = swbg_class_scalars(gMov, dr.ray);
        const auto sT = swbg_class_scalars(gTgt, dr.ray);
        for (int i = 0; i < N; ++i)
          p[static_cast<size_t>(i)] = dr.a1 * g[i] + dr.a2 * sM[static_cast<size_t>(cls_of(i))];
        ProjectionSpec spec;
        spec.theta = dr.theta;
        spec.alpha1 = dr.a1;
        spec.alpha2 = dr.a2;
        terms[static_cast<size_t>(l)] = moving_derivatives(p, project_labeled(target, spec, sT), D);

        const Eigen::MatrixXd Cdir = busemann_bw_direction(dr.ray);
        const Eigen::VectorXd dm = dr.ray.tip.mean - dr.ray.base.mean;
        const Eigen::VectorXd wdm = psi.components * dm;
        for (int c = 0; c < C; ++c) {
          Eigen::MatrixXd inner = sqrtS[static_cast<size_t>(c)] * Cdir * sqrtS[static_cast<size_t>(c)];
          inner = 0.5 * (inner + inner.transpose()).eval();
          // transport-map factor: d Tr((S C S)^(1/2)) / dS = M/2
          Eigen::MatrixXd Mmap = isqrtS[static_cast<size_t>(c)] * sym_sqrt(inner) *
                                 isqrtS[static_cast<size_t>(c)];
          Mmap = 0.5 * (Mmap + Mmap.transpose()).eval();
          const Eigen::MatrixXd WM = psi.components * Mmap;
          double S = 0.0;
          for (int i = 0; i < n; ++i) S += D[static_cast<size_t>(c * n + i)];
          const double scale = -dr.a2 * S / (dr.ray.speed * static_cast<double>(n));
          for (int i = 0; i < n; ++i) {
            const int row = c * n + i;
            const Eigen::VectorXd zc =
                Z.row(row).transpose() - gMov[static_cast<size_t>(c)].mean;
            slot.row(row) = dr.a1 * D[static_cast<size_t>(row)] * dr.theta.transpose() +
                            scale * (wdm + WM * zc).transpose();
          }
        }
        break;
      }
      case FlowMetric::sotdd: {
        static const double kFact[] = {1, 1, 2, 6, 24, 120, 720, 5040, 40320, 362880, 3628800,
                                       39916800};
        const DrawSOTDD dr = draw_sotdd(d, opt.moments, opt.lambda_max, rng);
        const Eigen::VectorXd g = state.particles * dr.theta;
        const auto mM = sotdd_class_moments(moving, dr.theta, dr.lambdas);
        const auto mT = sotdd_class_moments(target, dr.theta, dr.lambdas);
        const auto combine = [&](const LabeledDataset& Dset,
                                 const std::vector<std::vector<double>>& mm) {
          const Eigen::VectorXd gg = Dset.features * dr.theta;
          std::vector<double> vals(static_cast<size_t>(Dset.size()));
          for (int i = 0; i < Dset.size(); ++i) {
            double v = dr.alpha[0] * gg[i];
            const auto& rowm = mm[static_cast<size_t>(Dset.labels[static_cast<size_t>(i)] - 1)];
            for (size_t t = 0; t < rowm.size(); ++t)
              v += dr.alpha[static_cast<int>(t) + 1] * rowm[t];
            vals[static_cast<size_t>(i)] = v;
          }
          return Discrete1D::from_samples(std::move(vals));
        };
        for (int i = 0; i < N; ++i) {
          double v = dr.alpha[0] * g[i];
          const auto& rowm = mM[static_cast<size_t>(cls_of(i))];
          for (size_t t = 0; t < rowm.size(); ++t) v += dr.alpha[static_cast<int>(t) + 1] * rowm[t];
          p[static_cast<size_t>(i)] = v;
        }
        terms[static_cast<size_t>(l)] = moving_derivatives(p, combine(target, mT), D);

        for (int c = 0; c < C; ++c) {
          double S = 0.0;
          for (int i = 0; i < n; ++i) S += D[static_cast<size_t>(c * n + i)];
          for (int i = 0; i < n; ++i) {
            const int row = c * n + i;
            double chain = 0.0;
            for (size_t t = 0; t < dr.lambdas.size(); ++t) {
              const int lam = dr.lambdas[t];
              chain += dr.alpha[static_cast<int>(t) + 1] *
                       std::pow(g[row], lam - 1) / (static_cast<double>(n) * kFact[lam - 1]);
            }
            const double coef = dr.alpha[0] * D[static_cast<size_t>(row)] + S * chain;
            slot.row(row) = coef * dr.theta.transpose();
          }
        }
        break;
      }
    }
    slots[static_cast<size_t>(l)] = std::move(slot);
  });

  SlicedGrad out;
  out.grad = Eigen::MatrixXd::Zero(N, d);
  double acc = 0.0;
  for (int l = 0; l < L; ++l) {
    out.grad += slots[static_cast<size_t>(l)];
    acc += terms[static_cast<size_t>(l)];
  }
  out.objective_sq = acc / static_cast<double>(L);
  // mean over projections, then the dataset-of-measures rescaling n*C
  out.grad *= static_cast<double>(N) / static_cast<double>(L);
  return out;
}

static void check_flow_config(const FlowConfig& cfg) {
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step))
    throw InputError("flow: step must be positive");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
    throw InputError("flow: momentum must lie in [0,1)");
}

FlowState flow_step(const FlowState& state, const Eigen::MatrixXd& grad, const FlowConfig& cfg) {
  check_flow_config(cfg);
  if (grad.rows() != state.particles.rows() || grad.cols() != state.particles.cols())
    throw InputError("flow_step: gradient shape mismatch");
  FlowState next = state;
  next.velocity = cfg.momentum * state.velocity + grad;
  next.particles = state.particles - cfg.step * next.velocity;
  next.iteration = state.iteration + 1;
  return next;
}

static LabeledDataset batch_of(const LabeledDataset& target, int batch, std::uint64_t seed,
                               int iteration) {
  std::vector<int> idx(static_cast<size_t>(target.size()));
  std::iota(idx.begin(), idx.end(), 0);
  RngStream r(seed, "batch", static_cast<uint64_t>(iteration));
  r.shuffle(idx);
  idx.resize(static_cast<size_t>(batch));
  std::sort(idx.begin(), idx.end());
  Eigen::MatrixXd feats(batch, target.dim());
  std::vector<int> labels(static_cast<size_t>(batch));
  for (int i = 0; i < batch; ++i) {
    feats.row(i) = target.features.row(idx[static_cast<size_t>(i)]);
    labels[static_cast<size_t>(i)] = target.labels[static_cast<size_t>(idx[static_cast<size_t>(i)])];
  }
  return LabeledDataset::make(std::move(feats), std::move(labels));
}

FlowResult run_flow(const LabeledDataset& source, const LabeledDataset& target,
                    const FlowConfig& cfg, const FlowCallback& on_iteration) {
  check_flow_config(cfg);
  if (cfg.iterations < 0) throw InputError("run_flow: negative iteration count");
  if (source.dim() != target.dim()) throw InputError("run_flow: dimension mismatch");
  if (source.num_classes != target.num_classes)
    throw InputError("run_flow: class count mismatch");

  FlowResult result;
  result.state = FlowState::init(source);
  const double init_scale = std::max(1.0, result.state.particles.norm());
  GradOptions go;
  go.threads = cfg.threads;
  go.d_reduced = cfg.d_reduced;
  go.moments = cfg.moments;
  go.lambda_max = cfg.lambda_max;

  for (int k = 0; k < cfg.iterations; ++k) {
    const std::uint64_t iter_seed = derive_seed(cfg.seed, "iter", static_cast<uint64_t>(k));
    const bool subsample = cfg.target_batch > 0 && cfg.target_batch < target.size();
    const LabeledDataset tgt =
        subsample ? batch_of(target, cfg.target_batch, cfg.seed, k) : target;
    const SlicedGrad grad =
        sliced_particle_grad(cfg.metric, result.state, tgt, cfg.projections, iter_seed, go);

    FlowRecord rec;
    rec.iteration = result.state.iteration;
    rec.objective = grad.objective();
    if (cfg.eval_every > 0 && k % cfg.eval_every == 0)
      rec.wow = wow_distance_eval(result.state.dataset(), target).value;
    if (cfg.snapshot_every > 0 && !cfg.out_dir.empty() && k % cfg.snapshot_every == 0)
      write_snapshot(result.state, cfg.out_dir, k);
    result.records.push_back(rec);
    if (on_iteration) on_iteration(result.state, rec);

    result.state = flow_step(result.state, grad.grad, cfg);
    if (!result.state.particles.allFinite() ||
        result.state.particles.norm() > cfg.divergence_factor * init_scale)
      throw CapacityError("run_flow: particles diverged; reduce the step size");
  }
  return result;
}

LabeledDataset rings_target(int n_per_class, const std::vector<double>& radii, std::uint64_t seed,
                            RingsMode mode) {
  if (n_per_class < 1) throw InputError("rings_target: need at least one point per class");
  if (radii.empty()) throw InputError("rings_target: need at least one radius");
  for (size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw InputError("rings_target: radii must be positive");
    for (size_t j = i + 1; j < radii.size(); ++j)
      if (radii[i] == radii[j]) throw InputError("rings_target: radii must be distinct");
  }
  const int C = static_cast<int>(radii.size());
  RngStream r(seed, "rings", 0);
  Eigen::MatrixXd X(C * n_per_class, 2);
  std::vector<int> y(static_cast<size_t>(C * n_per_class));
  const double two_pi = 2.0 * M_PI;
  int row = 0;
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < n_per_class; ++i) {
      const double ang = mode == RingsMode::evenly
                             ? two_pi * static_cast<double>(i) / static_cast<double>(n_per_class)
                             : r.uniform(0.0, two_pi);
      X(row, 0) = radii[static_cast<size_t>(c)] * std::cos(ang);
      X(row, 1) = radii[static_cast<size_t>(c)] * std::sin(ang);
      y[static_cast<size_t>(row)] = c + 1;
      ++row;
    }
  }
  return LabeledDataset::make(std::move(X), std::move(y));
}

WowEval wow_distance_eval(const LabeledDataset& P, const LabeledDataset& Q) {
  if (P.dim() != Q.dim()) throw InputError("wow_distance_eval: dimension mismatch");
  const int CP = P.num_classes, CQ = Q.num_classes;
  Eigen::MatrixXd cost(CP, CQ);
  for (int a = 0; a < CP; ++a)
    for (int b = 0; b < CQ; ++b)
      cost(a, b) = w2_empirical_sq(class_conditional(P, a + 1), class_conditional(Q, b + 1));
  const Eigen::VectorXd wa = Eigen::VectorXd::Constant(CP, 1.0 / CP);
  const Eigen::VectorXd wb = Eigen::VectorXd::Constant(CQ, 1.0 / CQ);
  WowEval out;
  out.outer = exact_ot_lp(cost, wa, wb);
  out.value = std::sqrt(std::max(0.0, out.outer.cost));
  return out;
}

std::vector<int> wow_class_match(const WowEval& eval, int source_classes) {
  std::vector<int> match(static_cast<size_t>(source_classes), 0);
  std::vector<double> best(static_cast<size_t>(source_classes), -1.0);
  for (const auto& e : eval.outer.entries) {
    if (e.i < 0 || e.i >= source_classes) continue;
    if (e.mass > best[static_cast<size_t>(e.i)]) {
      best[static_cast<size_t>(e.i)] = e.mass;
      match[static_cast<size_t>(e.i)] = e.j + 1;
    }
  }
  return match;
}

void save_trajectory_csv(const std::vector<FlowRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("save_trajectory_csv: cannot open " + path);
  out.precision(17);
  out << "iteration,objective,wow\n";
  for (const auto& r : records) {
    out << r.iteration << ',' << r.objective << ',';
    if (r.wow) out << *r.wow;
    out << '\n';
  }
  if (!out.good()) throw InputError("save_trajectory_csv: write failed for " + path);
}

void write_snapshot(const FlowState& state, const std::string& dir, int iteration) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  char stem[64];
  std::snprintf(stem, sizeof(stem), "snapshot_%06d", iteration);
  const fs::path bin = fs::path(dir) / (std::string(stem) + ".bin");
  const fs::path side = fs::path(dir) / (std::string(stem) + ".json");

  std::ofstream bf(bin, std::ios::binary);
  if (!bf) throw InputError("write_snapshot: cannot open " + bin.string());
  std::vector<double> buf(static_cast<size_t>(state.particles.size()));
  for (int i = 0; i < state.particles.rows(); ++i)
    for (int j = 0; j < state.particles.cols(); ++j)
      buf[static_cast<size_t>(i) * state.particles.cols() + j] = state.particles(i, j);
  bf.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!bf.good()) throw InputError("write_snapshot: write failed for " + bin.string());

  nlohmann::json meta;
  meta["file"] = std::string(stem) + ".bin";
  meta["rows"] = state.particles.rows();
  meta["cols"] = state.particles.cols();
  meta["classes"] = state.classes;
  meta["per_class"] = state.per_class;
  meta["iteration"] = iteration;
  meta["dtype"] = "float64";
  meta["order"] = "row-major";
  std::ofstream sf(side);
  if (!sf) throw InputError("write_snapshot: cannot open " + side.string());
  sf << meta.dump(2) << '\n';
}

// ---- mixture-parameter flow ----

Eigen::MatrixXd clip_eigs(const Eigen::MatrixXd& S, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

GMMFlowState GMMFlowState::init(const GaussianMixture& m) {
  GMMFlowState s;
  const int K = m.size();
  const int d = m.dim();
  s.logits.resize(K);
  s.means.resize(K, d);
  for (int k = 0; k < K; ++k) {
    s.logits[k] = std::log(std::max(m.weights[static_cast<size_t>(k)], 1e-300));
    s.means.row(k) = m.components[static_cast<size_t>(k)].mean.transpose();
    s.factors.push_back(sym_sqrt(m.components[static_cast<size_t>(k)].cov));
  }
  s.v_logits = Eigen::VectorXd::Zero(K);
  s.v_means = Eigen::MatrixXd::Zero(K, d);
  s.v_factors.assign(static_cast<size_t>(K), Eigen::MatrixXd::Zero(d, d));
  return s;
}

GaussianMixture GMMFlowState::mixture() const {
  const int K = size();
  const double mx = logits.maxCoeff();
  std::vector<double> w(static_cast<size_t>(K));
  double z = 0.0;
  for (int k = 0; k < K; ++k) {
    w[static_cast<size_t>(k)] = std::exp(logits[k] - mx);
    z += w[static_cast<size_t>(k)];
  }
  for (double& x : w) x /= z;
  std::vector<GaussianMeasure> comps;
  for (int k = 0; k < K; ++k) {
    const auto& F = factors[static_cast<size_t>(k)];
    comps.push_back(GaussianMeasure::make(means.row(k).transpose(),
                                          clip_eigs(F * F.transpose(), eig_floor)));
  }
  return GaussianMixture::make(std::move(w), std::move(comps));
}

GMMFlowState gmm_flow_step(const GMMFlowState& state, const GaussianMixture& target,
                           GmmMetric metric, const FlowConfig& cfg) {
  check_flow_config(cfg);
  if (state.dim() != target.dim()) throw InputError("gmm_flow_step: dimension mismatch");
  const int K = state.size();
  const int d = state.dim();
  const std::uint64_t iter_seed =
      derive_seed(cfg.seed, "iter", static_cast<uint64_t>(state.iteration));
  SlicedOptions so;
  so.threads = cfg.threads;

  const auto objective = [&](const GMMFlowState& s) {
    const GaussianMixture mix = s.mixture();
    switch (metric) {
      case GmmMetric::b1dgmsw:
        return b1dgmsw(mix, target, cfg.projections, iter_seed, so).mean_sq();
      case GmmMetric::bgmsw:
        return bgmsw(mix, target, cfg.projections, iter_seed, so).mean_sq();
      case GmmMetric::bw_exact: {
        const double v = mixture_bw_distance(mix, target);
        return v * v;
      }
    }
    return 0.0;
  };

  const double h = 1e-5;
  const auto fd = [&](const std::function<double&(GMMFlowState&)>& entry) {
    GMMFlowState plus = state, minus = state;
    entry(plus) += h;
    entry(minus) -= h;
    return (objective(plus) - objective(minus)) / (2.0 * h);
  };

  GMMFlowState next = state;
  Eigen::VectorXd g_logits(K);
  Eigen::MatrixXd g_means(K, d);
  std::vector<Eigen::MatrixXd> g_factors(static_cast<size_t>(K), Eigen::MatrixXd::Zero(d, d));
  for (int k = 0; k < K; ++k) {
    g_logits[k] = fd([&](GMMFlowState& s) -> double& { return s.logits[k]; });
    for (int j = 0; j < d; ++j)
      g_means(k, j) = fd([&](GMMFlowState& s) -> double& { return s.means(k, j); });
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        g_factors[static_cast<size_t>(k)](a, b) =
            fd([&](GMMFlowState& s) -> double& { return s.factors[static_cast<size_t>(k)](a, b); });
  }

  next.v_logits = cfg.momentum * state.v_logits + g_logits;
  next.logits = state.logits - cfg.step * next.v_logits;
  next.v_means = cfg.momentum * state.v_means + g_means;
  next.means = state.means - cfg.step * next.v_means;
  for (int k = 0; k < K; ++k) {
    auto& vf = next.v_factors[static_cast<size_t>(k)];
    vf = cfg.momentum * state.v_factors[static_cast<size_t>(k)] + g_factors[static_cast<size_t>(k)];
    Eigen::MatrixXd F = state.factors[static_cast<size_t>(k)] - cfg.step * vf;
    // re-project so the stored factor stays a symmetric PSD square root
    next.factors[static_cast<size_t>(k)] = sym_sqrt(clip_eigs(F * F.transpose(), state.eig_floor));
  }
  next.iteration = state.iteration + 1;
  return next;
}

}  // namespace horo
