#include "horo/harness.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "horo/errors.hpp"
#include "horo/flow.hpp"
#include "horo/parallel.hpp"
#include "horo/rng.hpp"
#include "horo/sliced.hpp"

namespace horo {

namespace {

void check_corr_input(const std::vector<double>& x, const std::vector<double>& y,
                      const char* who) {
  if (x.size() != y.size()) throw InputError(std::string(who) + ": length mismatch");
  if (x.size() < 2) throw InputError(std::string(who) + ": need at least 2 points");
}

double pearson_checked(const std::vector<double>& x, const std::vector<double>& y,
                       const char* who) {
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double cxy = 0.0, vx = 0.0, vy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    cxy += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  if (vx <= 0.0 || vy <= 0.0) throw InputError(std::string(who) + ": zero variance");
  return cxy / (std::sqrt(vx) * std::sqrt(vy));
}

}  // namespace

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  check_corr_input(x, y, "pearson");
  return pearson_checked(x, y, "pearson");
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    // positions i..j (0-based) share the mean of ranks i+1..j+1
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  check_corr_input(x, y, "spearman");
  return pearson_checked(average_ranks(x), average_ranks(y), "spearman");
}

LabeledDataset make_blobs(int classes, int per_class, int dim, double separation,
                          uint64_t seed) {
  if (classes < 1 || per_class < 1 || dim < 1)
    throw InputError("make_blobs: classes, per_class, dim must be positive");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    throw InputError("make_blobs: separation must be finite and >= 0");
  RngStream rc(seed, "blob-centers", 0);
  Eigen::MatrixXd X(classes * per_class, dim);
  std::vector<int> y(static_cast<size_t>(classes * per_class));
  for (int c = 0; c < classes; ++c) {
    const Eigen::VectorXd center = separation * rc.sphere(dim);
    RngStream rp(seed, "blob-class", static_cast<uint64_t>(c));
    for (int i = 0; i < per_class; ++i) {
      const int row = c * per_class + i;
      X.row(row) = (center + rp.normal_vec(dim)).transpose();
      y[static_cast<size_t>(row)] = c + 1;
    }
  }
  return LabeledDataset::make(std::move(X), std::move(y));
}

// ---- EM ----

namespace {

constexpr double kCovFloor = 1e-6;

// draw an index with probability proportional to scores
int draw_categorical(RngStream& r, const Eigen::VectorXd& scores) {
  const double total = scores.sum();
  if (!(total > 0.0)) return static_cast<int>(r.uniform_index(static_cast<uint64_t>(scores.size())));
  double u = r.uniform01() * total;
  for (int i = 0; i < scores.size(); ++i) {
    u -= scores[i];
    if (u <= 0.0) return i;
  }
  return static_cast<int>(scores.size()) - 1;
}

struct GaussComp {
  double weight;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

}  // namespace

GaussianMixture fit_gmm_em(const EmpiricalMeasure& data, int K, uint64_t seed,
                           int iters, double tol, std::vector<double>* ll_trace) {
  const int n = data.size(), d = data.dim();
  if (K < 1) throw InputError("fit_gmm_em: K must be >= 1");
  if (n < K) throw InputError("fit_gmm_em: need at least K points");
  if (iters < 1) throw InputError("fit_gmm_em: iters must be >= 1");
  const Eigen::MatrixXd& X = data.points;
  const Eigen::VectorXd& w = data.weights;
  if (ll_trace) ll_trace->clear();

  const GaussianMeasure global = gaussian_moments(data);
  const Eigen::MatrixXd global_cov = clip_eigs(global.cov, kCovFloor);

  // k-means++-style seeding: first center by weight, the rest by weighted
  // squared distance to the nearest chosen center
  RngStream r(seed, "gmm-init", 0);
  std::vector<int> center_idx;
  center_idx.push_back(draw_categorical(r, w));
  Eigen::VectorXd d2 =
      (X.rowwise() - X.row(center_idx[0])).rowwise().squaredNorm();
  while (static_cast<int>(center_idx.size()) < K) {
    center_idx.push_back(draw_categorical(r, w.cwiseProduct(d2)));
    d2 = d2.cwiseMin((X.rowwise() - X.row(center_idx.back())).rowwise().squaredNorm());
  }

  // hard-assign to the nearest center for the initial responsibilities
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, K);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      const double dist = (X.row(i) - X.row(center_idx[static_cast<size_t>(k)])).squaredNorm();
      if (dist < bd) {
        bd = dist;
        best = k;
      }
    }
    resp(i, best) = 1.0;
  }

  std::vector<GaussComp> comps(static_cast<size_t>(K));
  Eigen::VectorXd worst_fit = Eigen::VectorXd::Zero(n);  // -loglik per point

  const auto m_step = [&]() {
    for (int k = 0; k < K; ++k) {
      auto& comp = comps[static_cast<size_t>(k)];
      const Eigen::VectorXd wr = w.cwiseProduct(resp.col(k));
      const double mass = wr.sum();
      if (mass <= 1e-12) {
        // collapsed component: reseed at the point the current mixture
        // explains worst, with the global covariance
        int worst = 0;
        worst_fit.maxCoeff(&worst);
        comp.weight = 1.0 / static_cast<double>(n);
        comp.mean = X.row(worst).transpose();
        comp.cov = global_cov;
        continue;
      }
      comp.weight = mass;
      comp.mean = X.transpose() * wr / mass;
      const Eigen::MatrixXd centered = X.rowwise() - comp.mean.transpose();
      comp.cov = clip_eigs(centered.transpose() * wr.asDiagonal() * centered / mass, kCovFloor);
    }
    double total = 0.0;
    for (const auto& c : comps) total += c.weight;
    for (auto& c : comps) c.weight /= total;
  };

  const double log2pi = std::log(2.0 * std::acos(-1.0));
  Eigen::MatrixXd logp(n, K);
  const auto e_step = [&]() {  // returns the weighted mean log-likelihood
    for (int k = 0; k < K; ++k) {
      const auto& comp = comps[static_cast<size_t>(k)];
      const Eigen::LLT<Eigen::MatrixXd> llt(comp.cov);
      double logdet = 0.0;
      for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
      const Eigen::MatrixXd centered = (X.rowwise() - comp.mean.transpose()).transpose();
      const Eigen::MatrixXd z = llt.matrixL().solve(centered);  // d x n
      logp.col(k) = (-0.5 * (z.colwise().squaredNorm().array() + d * log2pi + logdet) +
                     std::log(comp.weight))
                        .matrix()
                        .transpose();
    }
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      const double mx = logp.row(i).maxCoeff();
      const double lse = mx + std::log((logp.row(i).array() - mx).exp().sum());
      resp.row(i) = (logp.row(i).array() - lse).exp();
      worst_fit[i] = -lse;
      ll += w[i] * lse;
    }
    return ll;
  };

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < iters; ++it) {
    m_step();
    const double ll = e_step();
    if (ll_trace) ll_trace->push_back(ll);
    if (std::isfinite(prev_ll) && std::abs(ll - prev_ll) <= tol) break;
    prev_ll = ll;
  }

  std::vector<double> ws;
  std::vector<GaussianMeasure> gs;
  for (const auto& c : comps) {
    ws.push_back(c.weight);
    gs.push_back(GaussianMeasure::make(c.mean, c.cov));
  }
  return GaussianMixture::make(std::move(ws), std::move(gs));
}

// ---- correlation study ----

namespace {

enum class CorrMetric { sw, swb1dg, swbg, sotdd, otdd_exact_id };

CorrMetric parse_corr_metric(const std::string& name) {
  if (name == "sw") return CorrMetric::sw;
  if (name == "swb1dg") return CorrMetric::swb1dg;
  if (name == "swbg") return CorrMetric::swbg;
  if (name == "sotdd") return CorrMetric::sotdd;
  if (name == "otdd-exact") return CorrMetric::otdd_exact_id;
  throw InputError("correlate_cmd: unknown metric '" + name + "'");
}

LabeledDataset take_rows(const LabeledDataset& base, const std::vector<int>& rows) {
  Eigen::MatrixXd X(static_cast<int>(rows.size()), base.dim());
  std::vector<int> y(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    X.row(static_cast<int>(i)) = base.features.row(rows[i]);
    y[i] = base.labels[static_cast<size_t>(rows[i])];
  }
  return LabeledDataset::make(std::move(X), std::move(y));
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

LabeledDataset resolve_base_dataset(const ExperimentConfig& cfg) {
  if (!cfg.dataset_path.empty()) return load_dataset_csv(cfg.dataset_path);
  const auto& g = cfg.generator;
  return make_blobs(g.classes, g.per_class, g.dim, g.separation, cfg.seed);
}

CorrelationReport correlate_cmd(const LabeledDataset& base, const ExperimentConfig& cfg) {
  const int M = static_cast<int>(cfg.metrics.size());
  if (M == 0) throw InputError("correlate_cmd: no metrics configured");
  std::vector<CorrMetric> ids;
  for (const auto& name : cfg.metrics) ids.push_back(parse_corr_metric(name));
  if (cfg.proj_counts.size() != 1 && static_cast<int>(cfg.proj_counts.size()) != M)
    throw InputError("correlate_cmd: proj_counts must have one entry or one per metric");
  for (int L : cfg.proj_counts)
    if (L < 1) throw InputError("correlate_cmd: projection counts must be >= 1");
  if (cfg.pairs < 2) throw InputError("correlate_cmd: need at least 2 pairs");
  if (cfg.sub_min < 1 || cfg.sub_max < cfg.sub_min)
    throw InputError("correlate_cmd: need 1 <= sub_min <= sub_max");
  int min_class = std::numeric_limits<int>::max();
  for (int c = 1; c <= base.num_classes; ++c) min_class = std::min(min_class, base.class_size(c));
  if (2 * cfg.sub_max > min_class)
    throw InputError(
        "correlate_cmd: smallest class cannot supply two disjoint subsamples of sub_max points");
  if (cfg.boot_sets < 0 || (cfg.boot_sets > 0 && cfg.boot_size < 2))
    throw InputError("correlate_cmd: bootstrap needs boot_size >= 2");

  const auto proj_for = [&](int mi) {
    return cfg.proj_counts.size() == 1 ? cfg.proj_counts[0] : cfg.proj_counts[static_cast<size_t>(mi)];
  };

  CorrelationReport report;
  report.seed = cfg.seed;
  report.reference.assign(static_cast<size_t>(cfg.pairs), 0.0);
  report.pair_sizes.assign(static_cast<size_t>(cfg.pairs), 0);
  std::vector<std::vector<double>> columns(static_cast<size_t>(M),
                                           std::vector<double>(static_cast<size_t>(cfg.pairs), 0.0));

  parallel_for(cfg.threads, cfg.pairs, [&](int p) {
    RngStream r(cfg.seed, "pair", static_cast<uint64_t>(p));
    const int span = cfg.sub_max - cfg.sub_min + 1;
    const int s = cfg.sub_min + static_cast<int>(r.uniform_index(static_cast<uint64_t>(span)));
    std::vector<int> rows_a, rows_b;
    for (int c = 1; c <= base.num_classes; ++c) {
      std::vector<int> pool = base.class_index[static_cast<size_t>(c - 1)];
      r.shuffle(pool);
      rows_a.insert(rows_a.end(), pool.begin(), pool.begin() + s);
      rows_b.insert(rows_b.end(), pool.begin() + s, pool.begin() + 2 * s);
    }
    const LabeledDataset A = take_rows(base, rows_a);
    const LabeledDataset B = take_rows(base, rows_b);
    report.pair_sizes[static_cast<size_t>(p)] = s;

    double ref;
    try {
      ref = otdd_exact(A, B, cfg.lp_cap);
    } catch (const CapacityError& e) {
      throw CapacityError(std::string(e.what()) +
                          "; reduce sub_min/sub_max or raise the LP cap");
    }
    report.reference[static_cast<size_t>(p)] = ref;

    for (int mi = 0; mi < M; ++mi) {
      const int L = proj_for(mi);
      const uint64_t ms =
          derive_seed(cfg.seed, "corr", static_cast<uint64_t>(mi) * static_cast<uint64_t>(cfg.pairs) +
                                            static_cast<uint64_t>(p));
      double v = 0.0;
      switch (ids[static_cast<size_t>(mi)]) {
        case CorrMetric::sw:
          v = sw_vanilla(EmpiricalMeasure::uniform(A.features),
                         EmpiricalMeasure::uniform(B.features), L, ms)
                  .value;
          break;
        case CorrMetric::swb1dg:
          v = swb1dg(A, B, L, ms).value;
          break;
        case CorrMetric::swbg:
          v = swbg(A, B, L, ms).value;
          break;
        case CorrMetric::sotdd:
          v = sotdd_baseline(A, B, L, ms).value;
          break;
        case CorrMetric::otdd_exact_id:
          v = ref;
          break;
      }
      columns[static_cast<size_t>(mi)][static_cast<size_t>(p)] = v;
    }
  });

  for (int mi = 0; mi < M; ++mi) {
    MetricCorrelation mc;
    mc.metric = cfg.metrics[static_cast<size_t>(mi)];
    mc.projections = ids[static_cast<size_t>(mi)] == CorrMetric::otdd_exact_id ? 0 : proj_for(mi);
    mc.values = columns[static_cast<size_t>(mi)];
    mc.rho_s = spearman(mc.values, report.reference);
    mc.rho_p = pearson(mc.values, report.reference);

    std::vector<double> bs, bp;
    for (int b = 0; b < cfg.boot_sets; ++b) {
      RngStream rb(cfg.seed, "boot", static_cast<uint64_t>(b));
      std::vector<double> rx(static_cast<size_t>(cfg.boot_size)),
          ry(static_cast<size_t>(cfg.boot_size));
      for (int i = 0; i < cfg.boot_size; ++i) {
        const auto pick = static_cast<size_t>(rb.uniform_index(static_cast<uint64_t>(cfg.pairs)));
        rx[static_cast<size_t>(i)] = mc.values[pick];
        ry[static_cast<size_t>(i)] = report.reference[pick];
      }
      bs.push_back(spearman(rx, ry));
      bp.push_back(pearson(rx, ry));
    }
    if (!bs.empty()) {
      mc.boot_s_mean = std::accumulate(bs.begin(), bs.end(), 0.0) / static_cast<double>(bs.size());
      mc.boot_p_mean = std::accumulate(bp.begin(), bp.end(), 0.0) / static_cast<double>(bp.size());
      mc.boot_s_std = sample_std(bs, mc.boot_s_mean);
      mc.boot_p_std = sample_std(bp, mc.boot_p_mean);
    }
    report.metrics.push_back(std::move(mc));
  }
  return report;
}

// ---- cluster-count detection ----

ClustersReport clusters_cmd(const EmpiricalMeasure& data, int k_max,
                            const std::string& metric, int L, uint64_t seed,
                            double relative_threshold, int threads) {
  if (k_max < 2) throw InputError("clusters_cmd: k_max must be >= 2");
  if (metric != "b1dgmsw" && metric != "bgmsw" && metric != "bw-exact")
    throw InputError("clusters_cmd: unknown metric '" + metric + "'");
  if (metric != "bw-exact" && L < 1) throw InputError("clusters_cmd: L must be >= 1");
  if (data.size() < k_max + 1)
    throw InputError("clusters_cmd: need at least k_max+1 points");
  if (!(relative_threshold > 0.0) || !(relative_threshold < 1.0))
    throw InputError("clusters_cmd: relative threshold must lie in (0,1)");

  std::vector<GaussianMixture> fits;
  fits.reserve(static_cast<size_t>(k_max + 1));
  for (int k = 1; k <= k_max + 1; ++k) fits.push_back(GaussianMixture{});
  parallel_for(threads, k_max + 1, [&](int i) {
    fits[static_cast<size_t>(i)] =
        fit_gmm_em(data, i + 1, derive_seed(seed, "gmm", static_cast<uint64_t>(i + 1)));
  });

  ClustersReport report;
  report.metric = metric;
  report.projections = metric == "bw-exact" ? 0 : L;
  report.seed = seed;
  for (int k = 1; k <= k_max; ++k) {
    const auto& a = fits[static_cast<size_t>(k - 1)];
    const auto& b = fits[static_cast<size_t>(k)];
    const uint64_t ms = derive_seed(seed, "consec", static_cast<uint64_t>(k));
    double dist;
    if (metric == "b1dgmsw")
      dist = b1dgmsw(a, b, L, ms).value;
    else if (metric == "bgmsw")
      dist = bgmsw(a, b, L, ms).value;
    else
      dist = mixture_bw_distance(a, b);
    report.ks.push_back(k);
    report.distances.push_back(dist);
  }

  const double max_dist = *std::max_element(report.distances.begin(), report.distances.end());
  report.threshold = relative_threshold * max_dist;
  report.suggested_k = 1;  // flat profile: nothing stands out beyond the first fit
  for (size_t i = 0; i < report.distances.size(); ++i) {
    if (report.distances[i] <= report.threshold) {
      report.suggested_k = report.ks[i];
      break;
    }
  }
  return report;
}

}  // namespace horo
