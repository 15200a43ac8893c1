#pragma once
#include <string>
#include <vector>

#include "horo/measures.hpp"

namespace horo {

// Symmetric PSD square root via eigendecomposition, eigenvalues clamped at 0.
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& s);
// As above, but eigenvalues below -rel_tol * scale raise instead of clamping.
Eigen::MatrixXd sym_sqrt_checked(const Eigen::MatrixXd& s, double rel_tol = 1e-8);
// Inverse square root; raises on (near-)singular input.
Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& s);

double bw_distance_sq(const GaussianMeasure& a, const GaussianMeasure& b);
double bw_distance(const GaussianMeasure& a, const GaussianMeasure& b);

// Optimal-transport map between Gaussians: x -> target_mean + A (x - source_mean).
struct BWMap {
  Eigen::MatrixXd A;
  GaussianMeasure source, target;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};
BWMap bw_map(const GaussianMeasure& a, const GaussianMeasure& b);

// Interpolation with mean (1-t) m_a + t m_b and covariance M Sigma_a M,
// M = (1-t)I + tA. Defined for all t where M is nonsingular; strict mode
// additionally requires M positive definite when t is outside [0,1].
GaussianMeasure geodesic_bw(const GaussianMeasure& a, const GaussianMeasure& b, double t,
                            bool strict = false);

struct TransportPlan {
  struct Entry {
    int i, j;
    double mass;
  };
  std::vector<double> row_weights, col_weights;
  std::vector<Entry> entries;   // nonzero plan entries
  std::vector<int> assignment;  // row i -> column; non-empty only for permutation plans
  double cost = 0.0;
};

inline constexpr long kDefaultLpCap = 4000000;  // max rows*cols of a cost matrix

// Exact discrete OT. Uniform equal-size marginals are solved as an
// assignment (shortest augmenting paths); general weights by successive
// shortest paths with node potentials. Both are deterministic.
TransportPlan exact_ot_lp(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b, long max_entries = kDefaultLpCap);
TransportPlan exact_ot_lp(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                          const Eigen::MatrixXd& cost, long max_entries = kDefaultLpCap);

// Minimum-cost assignment on a square cost matrix; returns per-row column
// indices. total (if given) receives the optimal cost sum.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost, double* total = nullptr);

// C(i,j) = ||A_i - B_j||^2
Eigen::MatrixXd sq_euclidean_cost(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Squared W2 between empirical measures (exact LP; 1D inputs use the
// closed-form quantile distance).
double w2_empirical_sq(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                       long max_entries = kDefaultLpCap);

// Labeled-dataset distance with groundcost
//   ||x - x'||^2 + W2^2(class(x), class(x'))
// where the inner class-to-class distances are exact and cached per pair.
struct OtddResult {
  double value = 0.0;              // the distance (square root of LP optimum)
  Eigen::MatrixXd class_dist_sq;   // C_P x C_Q inner squared distances
  TransportPlan outer;
};
OtddResult otdd_exact_detail(const LabeledDataset& P, const LabeledDataset& Q,
                             long max_entries = kDefaultLpCap);
double otdd_exact(const LabeledDataset& P, const LabeledDataset& Q,
                  long max_entries = kDefaultLpCap);

// CSV triplets i,j,mass (header included).
void save_plan_csv(const TransportPlan& plan, const std::string& path);

}  // namespace horo
