#include "horo/sliced.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "horo/errors.hpp"
#include "horo/ot.hpp"
#include "horo/parallel.hpp"
#include "horo/quantile.hpp"

namespace horo {

double SlicedEstimate::mean_sq() const {
  double acc = 0.0;
  for (double t : terms) acc += t;
  return terms.empty() ? 0.0 : acc / static_cast<double>(terms.size());
}

double SlicedEstimate::std_error() const {
  const int n = static_cast<int>(terms.size());
  if (n < 2 || !(value > 0.0)) return 0.0;
  const double m = mean_sq();
  double ss = 0.0;
  for (double t : terms) ss += (t - m) * (t - m);
  const double se_mean = std::sqrt(ss / (static_cast<double>(n - 1) * n));
  //  value = sqrt(mean), so d value = d mean / (2 value)
  return se_mean / (2.0 * value);
}

Eigen::VectorXd sample_sphere(int d, RngStream& rng) { return rng.sphere(d); }

Discrete1D project_labeled(const LabeledDataset& P, const ProjectionSpec& spec,
                           const std::vector<double>& label_proj) {
  if (static_cast<int>(label_proj.size()) != P.num_classes)
    throw InputError("project_labeled: one label value per class required");
  if (spec.theta.size() != P.features.cols())
    throw InputError("project_labeled: direction dimension mismatch");
  const Eigen::VectorXd g = P.features * spec.theta;
  std::vector<double> vals(static_cast<size_t>(P.size()));
  for (int i = 0; i < P.size(); ++i)
    vals[static_cast<size_t>(i)] = spec.alpha1 * g[i] + spec.alpha2 * label_proj[P.labels[i] - 1];
  return Discrete1D::from_samples(std::move(vals));
}

// ---- draws ----

static std::pair<double, double> draw_alpha(RngStream& rng, const SlicedOptions& opt) {
  // Always consume the two normals so the stream layout does not depend on
  // whether the fixed-alpha test hook is active.
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  if (opt.fixed_alpha) return *opt.fixed_alpha;
  const double r = std::hypot(z1, z2);
  if (r == 0.0) return {1.0, 0.0};
  return {z1 / r, z2 / r};
}

DrawSWB1DG draw_swb1dg(int d, RngStream& rng, const SlicedOptions& opt) {
  DrawSWB1DG out;
  out.theta = rng.sphere(d);
  std::tie(out.a1, out.a2) = draw_alpha(rng, opt);
  out.ray = sample_ray_1d_dirac(rng);
  return out;
}

DrawSWBG draw_swbg(int d, int d_reduced, RngStream& rng, const SlicedOptions& opt) {
  DrawSWBG out;
  out.theta = rng.sphere(d);
  std::tie(out.a1, out.a2) = draw_alpha(rng, opt);
  out.ray = sample_ray_bw(d_reduced, rng);
  return out;
}

int sample_ztp(RngStream& rng, int lambda_max) {
  if (lambda_max < 1) throw InputError("sample_ztp: lambda_max must be >= 1");
  // Poisson(1) conditioned on being positive: p_k = (e^{-1}/k!) / (1-e^{-1}).
  const double u = rng.uniform01();
  const double scale = 1.0 - std::exp(-1.0);
  double pk = std::exp(-1.0);  // unconditional p_1 numerator after first divide below
  double cum = 0.0;
  for (int k = 1; k < lambda_max; ++k) {
    pk /= static_cast<double>(k);
    cum += pk / scale;
    if (u < cum) return k;
  }
  return lambda_max;  // tail mass collapses onto the cap
}

DrawSOTDD draw_sotdd(int d, int k, int lambda_max, RngStream& rng) {
  if (k < 1) throw InputError("draw_sotdd: need at least one moment slot");
  DrawSOTDD out;
  out.theta = rng.sphere(d);
  out.alpha = rng.sphere(k + 1);
  out.lambdas.resize(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) out.lambdas[static_cast<size_t>(i)] = sample_ztp(rng, lambda_max);
  return out;
}

// ---- label scalars ----

std::vector<std::vector<double>> class_normal_weights(const LabeledDataset& P) {
  std::vector<std::vector<double>> out(static_cast<size_t>(P.num_classes));
  for (int c = 0; c < P.num_classes; ++c)
    out[static_cast<size_t>(c)] = uniform_normal_weights(static_cast<int>(P.class_index[c].size()));
  return out;
}

std::vector<double> swb1dg_class_scalars(const LabeledDataset& P, const Eigen::VectorXd& theta,
                                         const RayDirac1D& ray,
                                         const std::vector<std::vector<double>>& weights) {
  if (static_cast<int>(weights.size()) != P.num_classes)
    throw InputError("swb1dg_class_scalars: weights must match the class count");
  const Eigen::VectorXd g = P.features * theta;
  std::vector<double> out(static_cast<size_t>(P.num_classes));
  std::vector<double> vals;
  for (int c = 0; c < P.num_classes; ++c) {
    const auto& idx = P.class_index[c];
    if (idx.empty()) throw InputError("swb1dg_class_scalars: empty class");
    vals.resize(idx.size());
    for (size_t j = 0; j < idx.size(); ++j) vals[j] = g[idx[j]];
    std::sort(vals.begin(), vals.end());
    out[static_cast<size_t>(c)] = busemann_dirac_sorted(ray, vals.data(),
                                                        static_cast<int>(vals.size()),
                                                        weights[static_cast<size_t>(c)].data());
  }
  return out;
}

Eigen::MatrixXd PcaReducer::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != components.rows()) throw InputError("PcaReducer: dimension mismatch");
  return (X.rowwise() - mean) * components;
}

static PcaReducer finish_pca(Eigen::RowVectorXd mean, Eigen::MatrixXd cov, int d_reduced) {
  const int d = static_cast<int>(cov.rows());
  PcaReducer out;
  out.mean = std::move(mean);
  cov = 0.5 * (cov + cov.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw InputError("pca_reduce: eigendecomposition failed");
  // Eigen returns ascending order; walk from the top.
  const double top = std::max(es.eigenvalues()[d - 1], 0.0);
  const double floor = 1e-12 * std::max(top, 1e-300);
  int rank = 0;
  for (int i = 0; i < d; ++i)
    if (es.eigenvalues()[d - 1 - i] > floor) ++rank;
  if (rank == 0) throw InputError("pca_reduce: all features are constant");
  const int keep = std::min(d_reduced, rank);
  if (keep < d_reduced && d_reduced <= d)
    std::fprintf(stderr, "pca_reduce: rank %d < requested %d components, reducing\n", rank,
                 d_reduced);

  out.components.resize(d, keep);
  out.variances.resize(keep);
  for (int i = 0; i < keep; ++i) {
    Eigen::VectorXd v = es.eigenvectors().col(d - 1 - i);
    // Deterministic sign: the largest-magnitude entry points up.
    int arg = 0;
    for (int j = 1; j < d; ++j)
      if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
    if (v[arg] < 0.0) v = -v;
    out.components.col(i) = v;
    out.variances[i] = es.eigenvalues()[d - 1 - i];
  }
  return out;
}

PcaReducer pca_reduce(const Eigen::MatrixXd& pooled, int d_reduced) {
  if (pooled.rows() < 1 || pooled.cols() < 1) throw InputError("pca_reduce: empty input");
  if (d_reduced < 1) throw InputError("pca_reduce: need at least one component");
  const int n = static_cast<int>(pooled.rows());
  const Eigen::RowVectorXd mean = pooled.colwise().mean();
  const Eigen::MatrixXd centered = pooled.rowwise() - mean;
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  return finish_pca(mean, centered.transpose() * centered / denom, d_reduced);
}

PcaReducer pca_reduce_pair(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int d_reduced) {
  if (A.cols() != B.cols()) throw InputError("pca_reduce_pair: dimension mismatch");
  if (A.rows() < 1 || B.rows() < 1 || A.cols() < 1)
    throw InputError("pca_reduce_pair: empty input");
  if (d_reduced < 1) throw InputError("pca_reduce_pair: need at least one component");
  const int n = static_cast<int>(A.rows() + B.rows());
  // Per-side sums combined with one commutative addition each, so the two
  // argument orders round identically.
  const Eigen::RowVectorXd sum = A.colwise().sum() + B.colwise().sum();
  const Eigen::RowVectorXd mean = sum / static_cast<double>(n);
  const Eigen::MatrixXd ca = A.rowwise() - mean;
  const Eigen::MatrixXd cb = B.rowwise() - mean;
  const Eigen::MatrixXd scatter = ca.transpose() * ca + cb.transpose() * cb;
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  return finish_pca(mean, scatter / denom, d_reduced);
}

std::vector<GaussianMeasure> reduced_class_gaussians(const LabeledDataset& P,
                                                     const PcaReducer& psi) {
  const Eigen::MatrixXd reduced = psi.apply(P.features);
  std::vector<GaussianMeasure> out;
  out.reserve(static_cast<size_t>(P.num_classes));
  for (int c = 1; c <= P.num_classes; ++c) {
    const auto& idx = P.class_index[static_cast<size_t>(c - 1)];
    Eigen::MatrixXd pts(static_cast<int>(idx.size()), reduced.cols());
    for (size_t j = 0; j < idx.size(); ++j) pts.row(static_cast<int>(j)) = reduced.row(idx[j]);
    out.push_back(gaussian_moments(EmpiricalMeasure::uniform(std::move(pts))));
  }
  return out;
}

std::vector<double> swbg_class_scalars(const std::vector<GaussianMeasure>& class_gaussians,
                                       const RayBW& ray) {
  std::vector<double> out(class_gaussians.size());
  for (size_t c = 0; c < class_gaussians.size(); ++c)
    out[c] = busemann_bw(ray, class_gaussians[c]);
  return out;
}

std::vector<std::vector<double>> sotdd_class_moments(const LabeledDataset& P,
                                                     const Eigen::VectorXd& theta,
                                                     const std::vector<int>& lambdas) {
  static const double kFactorial[] = {1, 1, 2, 6, 24, 120, 720, 5040, 40320, 362880, 3628800,
                                      39916800, 479001600};
  for (int l : lambdas)
    if (l < 1 || l > 12) throw InputError("sotdd_class_moments: moment order out of range");
  const Eigen::VectorXd g = P.features * theta;
  std::vector<std::vector<double>> out(static_cast<size_t>(P.num_classes),
                                       std::vector<double>(lambdas.size(), 0.0));
  for (int c = 0; c < P.num_classes; ++c) {
    const auto& idx = P.class_index[static_cast<size_t>(c)];
    if (idx.empty()) throw InputError("sotdd_class_moments: empty class");
    for (size_t i = 0; i < lambdas.size(); ++i) {
      const int l = lambdas[i];
      double acc = 0.0;
      for (int j : idx) acc += std::pow(g[j], l);
      const double m = acc / (static_cast<double>(idx.size()) * kFactorial[l]);
      if (!std::isfinite(m))
        throw InputError(
            "sotdd_class_moments: moment overflow; lower lambda_max or rescale features");
      out[static_cast<size_t>(c)][i] = m;
    }
  }
  return out;
}

// ---- estimator driver ----

template <class PerProjection>
static SlicedEstimate run_sliced(int L, std::uint64_t seed, int threads,
                                 const PerProjection& term_of) {
  if (L < 1) throw InputError("sliced estimate: need at least one projection");
  SlicedEstimate est;
  est.projections = L;
  est.seed = seed;
  est.terms.resize(static_cast<size_t>(L));
  parallel_for(threads, L, [&](int l) {
    RngStream rng(seed, "proj", static_cast<uint64_t>(l));
    est.terms[static_cast<size_t>(l)] = term_of(rng);
  });
  est.value = std::sqrt(std::max(0.0, est.mean_sq()));
  return est;
}

SlicedEstimate sw_vanilla(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int L,
                          std::uint64_t seed, const SlicedOptions& opt) {
  if (a.dim() != b.dim()) throw InputError("sw_vanilla: dimension mismatch");
  const int d = a.dim();
  const std::vector<double> wa(a.weights.data(), a.weights.data() + a.weights.size());
  const std::vector<double> wb(b.weights.data(), b.weights.data() + b.weights.size());
  return run_sliced(L, seed, opt.threads, [&](RngStream& rng) {
    const Eigen::VectorXd theta = rng.sphere(d);
    const Eigen::VectorXd ga = a.points * theta;
    const Eigen::VectorXd gb = b.points * theta;
    Discrete1D pa = Discrete1D::weighted(std::vector<double>(ga.data(), ga.data() + ga.size()), wa);
    Discrete1D pb = Discrete1D::weighted(std::vector<double>(gb.data(), gb.data() + gb.size()), wb);
    return w2_1d_sq(pa, pb);
  });
}

SlicedEstimate swb1dg(const LabeledDataset& P, const LabeledDataset& Q, int L, std::uint64_t seed,
                      const SlicedOptions& opt) {
  if (P.dim() != Q.dim()) throw InputError("swb1dg: dimension mismatch");
  const int d = P.dim();
  const auto wP = class_normal_weights(P);
  const auto wQ = class_normal_weights(Q);
  return run_sliced(L, seed, opt.threads, [&](RngStream& rng) {
    const DrawSWB1DG dr = draw_swb1dg(d, rng, opt);
    ProjectionSpec spec;
    spec.theta = dr.theta;
    spec.alpha1 = dr.a1;
    spec.alpha2 = dr.a2;
    const Discrete1D pd = project_labeled(P, spec, swb1dg_class_scalars(P, dr.theta, dr.ray, wP));
    const Discrete1D qd = project_labeled(Q, spec, swb1dg_class_scalars(Q, dr.theta, dr.ray, wQ));
    return w2_1d_sq(pd, qd);
  });
}

SlicedEstimate swbg(const LabeledDataset& P, const LabeledDataset& Q, int L, std::uint64_t seed,
                    int d_reduced, const SlicedOptions& opt) {
  if (P.dim() != Q.dim()) throw InputError("swbg: dimension mismatch");
  const int d = P.dim();
  const PcaReducer psi = pca_reduce_pair(P.features, Q.features, std::min(d_reduced, d));
  const auto gP = reduced_class_gaussians(P, psi);
  const auto gQ = reduced_class_gaussians(Q, psi);
  const int dr_dim = psi.out_dim();
  return run_sliced(L, seed, opt.threads, [&](RngStream& rng) {
    const DrawSWBG dr = draw_swbg(d, dr_dim, rng, opt);
    ProjectionSpec spec;
    spec.theta = dr.theta;
    spec.alpha1 = dr.a1;
    spec.alpha2 = dr.a2;
    const Discrete1D pd = project_labeled(P, spec, swbg_class_scalars(gP, dr.ray));
    const Discrete1D qd = project_labeled(Q, spec, swbg_class_scalars(gQ, dr.ray));
    return w2_1d_sq(pd, qd);
  });
}

SlicedEstimate sotdd_baseline(const LabeledDataset& P, const LabeledDataset& Q, int L,
                              std::uint64_t seed, int k, int lambda_max,
                              const SlicedOptions& opt) {
  if (P.dim() != Q.dim()) throw InputError("sotdd_baseline: dimension mismatch");
  if (k < 1) throw InputError("sotdd_baseline: need at least one moment slot");
  if (lambda_max < 1 || lambda_max > 12)
    throw InputError("sotdd_baseline: lambda_max must lie in 1..12");
  const int d = P.dim();
  return run_sliced(L, seed, opt.threads, [&](RngStream& rng) {
    const DrawSOTDD dr = draw_sotdd(d, k, lambda_max, rng);
    const auto mP = sotdd_class_moments(P, dr.theta, dr.lambdas);
    const auto mQ = sotdd_class_moments(Q, dr.theta, dr.lambdas);
    const auto combine = [&](const LabeledDataset& D,
                             const std::vector<std::vector<double>>& moments) {
      const Eigen::VectorXd g = D.features * dr.theta;
      std::vector<double> vals(static_cast<size_t>(D.size()));
      for (int i = 0; i < D.size(); ++i) {
        double v = dr.alpha[0] * g[i];
        const auto& row = moments[static_cast<size_t>(D.labels[i] - 1)];
        for (int j = 0; j < k; ++j) v += dr.alpha[j + 1] * row[static_cast<size_t>(j)];
        vals[static_cast<size_t>(i)] = v;
      }
      return Discrete1D::from_samples(std::move(vals));
    };
    return w2_1d_sq(combine(P, mP), combine(Q, mQ));
  });
}

SlicedEstimate b1dgmsw(const GaussianMixture& P, const GaussianMixture& Q, int L,
                       std::uint64_t seed, const SlicedOptions& opt) {
  if (P.dim() != Q.dim()) throw InputError("b1dgmsw: dimension mismatch");
  const int d = P.dim();
  const auto embed = [](const GaussianMixture& M, const Eigen::VectorXd& theta,
                        const Ray1DGaussian& ray) {
    std::vector<double> vals(M.components.size());
    for (size_t j = 0; j < M.components.size(); ++j) {
      const GaussianMeasure& c = M.components[j];
      const double m = c.mean.dot(theta);
      const double s = std::sqrt(std::max(0.0, theta.dot(c.cov * theta)));
      vals[j] = busemann_1d_gaussian(ray, Gaussian1D{m, s});
    }
    return Discrete1D::weighted(std::move(vals), M.weights);
  };
  return run_sliced(L, seed, opt.threads, [&](RngStream& rng) {
    const Eigen::VectorXd theta = rng.sphere(d);
    const Ray1DGaussian ray = sample_ray_1d_gaussian_base(rng);
    return w2_1d_sq(embed(P, theta, ray), embed(Q, theta, ray));
  });
}

SlicedEstimate bgmsw(const GaussianMixture& P, const GaussianMixture& Q, int L,
                     std::uint64_t seed, const SlicedOptions& opt) {
  if (P.dim() != Q.dim()) throw InputError("bgmsw: dimension mismatch");
  const int d = P.dim();
  const auto embed = [](const GaussianMixture& M, const RayBW& ray) {
    std::vector<double> vals(M.components.size());
    for (size_t j = 0; j < M.components.size(); ++j) vals[j] = busemann_bw(ray, M.components[j]);
    return Discrete1D::weighted(std::move(vals), M.weights);
  };
  return run_sliced(L, seed, opt.threads, [&](RngStream& rng) {
    const RayBW ray = sample_ray_bw(d, rng);
    return w2_1d_sq(embed(P, ray), embed(Q, ray));
  });
}

double mixture_bw_distance(const GaussianMixture& a, const GaussianMixture& b) {
  if (a.dim() != b.dim()) throw InputError("mixture_bw_distance: dimension mismatch");
  Eigen::MatrixXd cost(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < b.size(); ++j)
      cost(i, j) = bw_distance_sq(a.components[static_cast<size_t>(i)],
                                  b.components[static_cast<size_t>(j)]);
  Eigen::VectorXd wa = Eigen::Map<const Eigen::VectorXd>(a.weights.data(), a.size());
  Eigen::VectorXd wb = Eigen::Map<const Eigen::VectorXd>(b.weights.data(), b.size());
  return std::sqrt(std::max(0.0, exact_ot_lp(cost, wa, wb).cost));
}

}  // namespace horo
