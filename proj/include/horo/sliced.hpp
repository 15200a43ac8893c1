#pragma once
#include <cstdint>
#include <optional>
#include <vector>

#include "horo/busemann.hpp"
#include "horo/measures.hpp"
#include "horo/rays.hpp"
#include "horo/rng.hpp"

namespace horo {

// Monte-Carlo sliced distances. Projection l always uses the substream
// derived from (seed, "proj", l), and each estimator's draw order within a
// substream is fixed and documented on its draw_* helper; gradients and
// cross-checks replay the same draws. Results are bit-identical for any
// thread count: per-projection terms land in an indexed buffer that is
// reduced sequentially.

struct SlicedEstimate {
  double value = 0.0;
  int projections = 0;
  std::uint64_t seed = 0;
  std::vector<double> terms;  // squared 1D distances, one per projection

  double mean_sq() const;
  double std_error() const;  // delta-method standard error of value
};

struct SlicedOptions {
  int threads = 1;  // <= 0 picks the hardware concurrency
  // Test hook: overrides the hierarchical mixing draw with a fixed (a1, a2).
  std::optional<std::pair<double, double>> fixed_alpha;
};

// One shared direction + mixing + label-ray bundle.
struct ProjectionSpec {
  Eigen::VectorXd theta;          // unit feature direction
  double alpha1 = 1.0;            // feature weight
  double alpha2 = 0.0;            // label weight
  AnyRay ray;                     // label-embedding ray
  std::vector<int> lambdas;       // moment orders (sotdd only)
};

// Normalized standard Gaussian draw on the unit sphere.
Eigen::VectorXd sample_sphere(int d, RngStream& rng);

// alpha1 <theta, x_i> + alpha2 * label_proj[y_i - 1] with uniform weights.
Discrete1D project_labeled(const LabeledDataset& P, const ProjectionSpec& spec,
                           const std::vector<double>& label_proj);

// ---- per-projection draw helpers (order is contractual) ----

struct DrawSWB1DG {
  Eigen::VectorXd theta;  // d normals, normalized
  double a1, a2;          // then 2 normals, normalized
  RayDirac1D ray;         // then 1 uniform
};
DrawSWB1DG draw_swb1dg(int d, RngStream& rng, const SlicedOptions& opt);

struct DrawSWBG {
  Eigen::VectorXd theta;  // d normals, normalized
  double a1, a2;          // then 2 normals, normalized
  RayBW ray;              // then the bw ray draws in the reduced dimension
};
DrawSWBG draw_swbg(int d, int d_reduced, RngStream& rng, const SlicedOptions& opt);

struct DrawSOTDD {
  Eigen::VectorXd theta;  // d normals, normalized
  Eigen::VectorXd alpha;  // then k+1 normals, normalized
  std::vector<int> lambdas;  // then k zero-truncated Poisson draws (inversion)
};
DrawSOTDD draw_sotdd(int d, int k, int lambda_max, RngStream& rng);

// Zero-truncated Poisson(1) by cdf inversion, capped at lambda_max.
int sample_ztp(RngStream& rng, int lambda_max);

// ---- label-scalar helpers (shared with the flow gradients) ----

// Per-class cell weights of the normal quantile at the class sizes of P.
std::vector<std::vector<double>> class_normal_weights(const LabeledDataset& P);
// Busemann value of each projected class-conditional along a dirac-base ray.
std::vector<double> swb1dg_class_scalars(const LabeledDataset& P, const Eigen::VectorXd& theta,
                                         const RayDirac1D& ray,
                                         const std::vector<std::vector<double>>& weights);

// PCA onto the top principal directions of pre-pooled rows.
struct PcaReducer {
  Eigen::RowVectorXd mean;     // 1 x d
  Eigen::MatrixXd components;  // d x k, orthonormal columns, sign-fixed
  Eigen::VectorXd variances;   // non-increasing

  int out_dim() const { return static_cast<int>(components.cols()); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};
// Keeps at most d_reduced components, fewer if rank runs out (warns).
PcaReducer pca_reduce(const Eigen::MatrixXd& pooled, int d_reduced);
// Same reduction over the union of two row sets, accumulated so that
// swapping the arguments gives bit-identical results.
PcaReducer pca_reduce_pair(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int d_reduced);

// Moment Gaussians of each class in the reduced space.
std::vector<GaussianMeasure> reduced_class_gaussians(const LabeledDataset& P,
                                                     const PcaReducer& psi);
std::vector<double> swbg_class_scalars(const std::vector<GaussianMeasure>& class_gaussians,
                                       const RayBW& ray);

// M^lambda(mu) = integral of x^lambda / lambda! ; one row per class.
std::vector<std::vector<double>> sotdd_class_moments(const LabeledDataset& P,
                                                     const Eigen::VectorXd& theta,
                                                     const std::vector<int>& lambdas);

// ---- estimators ----

SlicedEstimate sw_vanilla(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int L,
                          std::uint64_t seed, const SlicedOptions& opt = {});
SlicedEstimate swb1dg(const LabeledDataset& P, const LabeledDataset& Q, int L, std::uint64_t seed,
                      const SlicedOptions& opt = {});
SlicedEstimate swbg(const LabeledDataset& P, const LabeledDataset& Q, int L, std::uint64_t seed,
                    int d_reduced = 10, const SlicedOptions& opt = {});
SlicedEstimate sotdd_baseline(const LabeledDataset& P, const LabeledDataset& Q, int L,
                              std::uint64_t seed, int k = 5, int lambda_max = 8,
                              const SlicedOptions& opt = {});
SlicedEstimate b1dgmsw(const GaussianMixture& P, const GaussianMixture& Q, int L,
                       std::uint64_t seed, const SlicedOptions& opt = {});
SlicedEstimate bgmsw(const GaussianMixture& P, const GaussianMixture& Q, int L,
                     std::uint64_t seed, const SlicedOptions& opt = {});

// Exact mixture-level Wasserstein with squared Gaussian transport groundcost
// (upper-bound reference for b1dgmsw).
double mixture_bw_distance(const GaussianMixture& a, const GaussianMixture& b);

}  // namespace horo
