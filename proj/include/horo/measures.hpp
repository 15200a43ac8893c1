#pragma once
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace horo {

// Weighted discrete measure on the real line, atoms sorted ascending.
struct Discrete1D {
  std::vector<double> values;   // non-decreasing
  std::vector<double> weights;  // positive, sum to 1
  std::vector<double> cum;      // cumulative weights; back() == 1 exactly

  // Uniform weights over (unsorted) samples.
  static Discrete1D from_samples(std::vector<double> xs);
  // General weights; (value, weight) pairs are sorted by value, weights
  // normalized to sum exactly to 1. Zero-weight atoms are dropped.
  static Discrete1D weighted(std::vector<double> xs, std::vector<double> ws);

  int size() const { return static_cast<int>(values.size()); }
  // Left-continuous generalized inverse CDF at u in (0,1].
  double quantile(double u) const;
  double mean() const;
};

struct Gaussian1D {
  double mean = 0.0;
  double sd = 1.0;  // > 0
  double quantile(double u) const;
};

// Weighted point cloud in R^d.
struct EmpiricalMeasure {
  Eigen::MatrixXd points;   // n x d
  Eigen::VectorXd weights;  // simplex

  static EmpiricalMeasure uniform(Eigen::MatrixXd pts);
  static EmpiricalMeasure weighted(Eigen::MatrixXd pts, Eigen::VectorXd ws);
  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

// Gaussian with SPD covariance. Construct through make() so the covariance
// gets symmetrized and, when near-singular, jittered to stay positive
// definite (the closed-form transport quantities need an invertible matrix).
struct GaussianMeasure {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  static GaussianMeasure make(Eigen::VectorXd mean, Eigen::MatrixXd cov);
  int dim() const { return static_cast<int>(mean.size()); }
  Gaussian1D as_1d() const;  // requires dim() == 1
};

struct GaussianMixture {
  std::vector<double> weights;  // simplex
  std::vector<GaussianMeasure> components;

  static GaussianMixture make(std::vector<double> ws, std::vector<GaussianMeasure> comps);
  int size() const { return static_cast<int>(components.size()); }
  int dim() const { return components.empty() ? 0 : components[0].dim(); }
};

// Feature matrix with integer labels 1..C (contiguous, every class non-empty).
struct LabeledDataset {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;   // values in 1..C
  int num_classes = 0;
  std::vector<std::vector<int>> class_index;  // class c-1 -> row indices

  // Remaps arbitrary integer labels to 1..C in order of first appearance.
  static LabeledDataset make(Eigen::MatrixXd features, std::vector<int> labels);
  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  int class_size(int y) const { return static_cast<int>(class_index.at(y - 1).size()); }
};

// ---- operations ----

double quantile_eval(const Discrete1D& m, double u);
double quantile_eval(const Gaussian1D& m, double u);

// Weighted mean and weighted population covariance (with jitter via make()).
GaussianMeasure gaussian_moments(const EmpiricalMeasure& m);

EmpiricalMeasure class_conditional(const LabeledDataset& d, int y);

// CSV with header f0,...,f{d-1},label; label column last, integer.
LabeledDataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const LabeledDataset& d, const std::string& path);

// JSON {"weights":[...],"means":[[...]],"covs":[[[...]]]}
GaussianMixture load_mixture_json(const std::string& path);
void save_mixture_json(const GaussianMixture& m, const std::string& path);

}  // namespace horo
