#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "horo/measures.hpp"
#include "horo/ot.hpp"

// Experiment drivers: correlation studies against the exact dataset distance,
// GMM fitting, cluster-count detection, and the synthetic generators they run
// on. Every stochastic choice is derived from one master seed through named
// substreams, so reports are bit-reproducible for a fixed seed and thread
// count does not change results.

namespace horo {

// Sample Pearson correlation. Throws InputError on length < 2, length
// mismatch, or a zero-variance argument.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Ranks with ties averaged (1-based; equal values share the mean of the
// positions they occupy).
std::vector<double> average_ranks(const std::vector<double>& v);

// Pearson correlation of the average-rank vectors.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Gaussian blobs: class means drawn as separation-scaled uniform directions,
// unit covariance around each. The center draws do not depend on separation,
// so datasets for different separations share their noise realization.
LabeledDataset make_blobs(int classes, int per_class, int dim, double separation,
                          uint64_t seed);

// Expectation-maximization fit with k-means++-style seeding. Covariance
// eigenvalues are floored at cov_floor after every M step. A component whose
// responsibility mass collapses is reseeded at the worst-fit point with the
// global covariance (the log-likelihood may dip at that iteration; otherwise
// it is non-decreasing). Stops when the weighted mean log-likelihood moves by
// at most tol, or after iters rounds. ll_trace, when given, receives the
// log-likelihood after every iteration.
GaussianMixture fit_gmm_em(const EmpiricalMeasure& data, int K, uint64_t seed,
                           int iters = 200, double tol = 1e-6,
                           std::vector<double>* ll_trace = nullptr);

struct BlobSpec {
  int classes = 5;
  int per_class = 600;
  int dim = 10;
  double separation = 3.0;
};

struct ExperimentConfig {
  std::string id = "correlation";
  std::string dataset_path;  // empty: use the generator below
  BlobSpec generator;
  std::vector<std::string> metrics{"swb1dg"};  // may include "otdd-exact"
  std::vector<int> proj_counts{500};           // one per metric, or one for all
  int pairs = 40;
  int sub_min = 80;  // per class, per side
  int sub_max = 100;
  int boot_sets = 10;
  int boot_size = 50;
  uint64_t seed = 0;
  int threads = 1;
  long lp_cap = kDefaultLpCap;
  std::string out;  // output path; empty means stdout only
};

struct MetricCorrelation {
  std::string metric;
  int projections = 0;        // 0 for the exact metric
  double rho_s = 0.0, rho_p = 0.0;
  double boot_s_mean = 0.0, boot_s_std = 0.0;
  double boot_p_mean = 0.0, boot_p_std = 0.0;
  std::vector<double> values;  // one distance per pair
};

struct CorrelationReport {
  std::vector<double> reference;  // exact dataset distance per pair
  std::vector<int> pair_sizes;    // per-class per-side subsample count
  std::vector<MetricCorrelation> metrics;
  uint64_t seed = 0;
};

// Materialize the configured base dataset (load the CSV path, or generate the
// blobs) for correlate_cmd.
LabeledDataset resolve_base_dataset(const ExperimentConfig& cfg);

// Draw seeded disjoint stratified subsample pairs from the base dataset,
// compute the exact dataset distance and every configured sliced metric per
// pair, correlate each metric column against the exact column, and bootstrap
// the correlations by resampling pairs with replacement.
CorrelationReport correlate_cmd(const LabeledDataset& base, const ExperimentConfig& cfg);

struct ClustersReport {
  std::string metric;
  int projections = 0;
  uint64_t seed = 0;
  std::vector<int> ks;             // 1..k_max
  std::vector<double> distances;   // D(fit_k, fit_{k+1})
  double threshold = 0.0;          // relative_threshold * max distance
  int suggested_k = 1;
};

// Fit mixtures for k = 1..k_max+1 and measure the metric between consecutive
// fits. Suggested K is the smallest k whose distance falls to or below
// relative_threshold times the largest consecutive distance; a flat profile
// (no distance stands out) suggests 1. metric is one of "b1dgmsw", "bgmsw",
// "bw-exact".
ClustersReport clusters_cmd(const EmpiricalMeasure& data, int k_max,
                            const std::string& metric, int L, uint64_t seed,
                            double relative_threshold = 0.1, int threads = 1);

}  // namespace horo
