#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "horo/measures.hpp"
#include "horo/ot.hpp"
#include "horo/sliced.hpp"

namespace horo {

// Gradient descent over a cloud of labeled particles: the outer objective is
// a squared sliced distance between the particle dataset and a fixed target,
// and every particle moves along its own analytic gradient, rescaled by the
// particle and class counts so steps act on the space of dataset
// distributions rather than on raw coordinates.

enum class FlowMetric { sw, swb1dg, swbg, sotdd };

struct FlowState {
  // Class-major layout: row c*per_class + i is particle i of class c+1.
  Eigen::MatrixXd particles;
  Eigen::MatrixXd velocity;
  int classes = 0;
  int per_class = 0;
  int iteration = 0;

  // Requires every class of the source to hold the same number of points.
  static FlowState init(const LabeledDataset& source);
  int size() const { return classes * per_class; }
  int dim() const { return static_cast<int>(particles.cols()); }
  LabeledDataset dataset() const;
};

struct FlowConfig {
  double step = 1.0;
  double momentum = 0.9;
  int iterations = 1000;
  int projections = 64;
  FlowMetric metric = FlowMetric::swbg;
  std::uint64_t seed = 0;
  int threads = 1;
  int d_reduced = 10;       // swbg embedding dimension
  int moments = 5;          // sotdd moment slots
  int lambda_max = 8;       // sotdd moment-order cap
  int target_batch = 0;     // 0 = use the full target every iteration
  int eval_every = 0;       // 0 = skip exact coupling evaluations
  int snapshot_every = 0;   // 0 = no particle snapshots
  std::string out_dir;      // where snapshots go when enabled
  double divergence_factor = 1e6;
};

struct GradOptions {
  int threads = 1;
  int d_reduced = 10;
  int moments = 5;
  int lambda_max = 8;
};

struct SlicedGrad {
  Eigen::MatrixXd grad;       // same shape as the particles, already rescaled
  double objective_sq = 0.0;  // mean squared projected distance at the point
  double objective() const;
};

// Analytic gradient of the squared sliced estimate with respect to every
// particle, times classes*per_class. Per projection the sort permutations,
// the hierarchical mixing, and (for swbg) the shared reducer are frozen; the
// chain rule runs through the feature projections and the per-class label
// scalars. Draws replay the matching estimator's substreams exactly.
SlicedGrad sliced_particle_grad(FlowMetric metric, const FlowState& state,
                                const LabeledDataset& target, int L, std::uint64_t seed,
                                const GradOptions& opt = {});

// velocity <- momentum*velocity + grad; particles <- particles - step*velocity.
FlowState flow_step(const FlowState& state, const Eigen::MatrixXd& grad, const FlowConfig& cfg);

struct FlowRecord {
  int iteration = 0;
  double objective = 0.0;           // estimate at the pre-step state
  std::optional<double> wow;        // exact coupling distance when evaluated
};

struct FlowResult {
  FlowState state;
  std::vector<FlowRecord> records;
};

using FlowCallback = std::function<void(const FlowState&, const FlowRecord&)>;

// Iterates flow_step with fresh projection substreams each iteration.
// Aborts with CapacityError when the particle norm exceeds
// divergence_factor times the initial scale.
FlowResult run_flow(const LabeledDataset& source, const LabeledDataset& target,
                    const FlowConfig& cfg, const FlowCallback& on_iteration = nullptr);

enum class RingsMode { evenly, uniform };

// Concentric-circle dataset in the plane, one class per radius.
LabeledDataset rings_target(int n_per_class = 80, const std::vector<double>& radii = {1, 2, 3},
                            std::uint64_t seed = 0, RingsMode mode = RingsMode::evenly);

struct WowEval {
  double value = 0.0;    // root of the optimal outer cost
  TransportPlan outer;   // coupling between the class measures
};

// Exact nested transport: outer problem over classes with squared inner
// Wasserstein groundcosts between class-conditional feature measures.
WowEval wow_distance_eval(const LabeledDataset& P, const LabeledDataset& Q);
// Most-likely target class per source class under the outer plan.
std::vector<int> wow_class_match(const WowEval& eval, int source_classes);

// ---- trajectory output ----

void save_trajectory_csv(const std::vector<FlowRecord>& records, const std::string& path);
// Row-major float64 dump of the particles plus a JSON sidecar describing it.
void write_snapshot(const FlowState& state, const std::string& dir, int iteration);

// ---- mixture-parameter flow ----

// Symmetrize and raise every eigenvalue to at least `floor`.
Eigen::MatrixXd clip_eigs(const Eigen::MatrixXd& S, double floor);

enum class GmmMetric { b1dgmsw, bgmsw, bw_exact };

struct GMMFlowState {
  Eigen::VectorXd logits;                 // softmax gives the weights
  Eigen::MatrixXd means;                  // K x d
  std::vector<Eigen::MatrixXd> factors;   // covariance = F F^T per component
  double eig_floor = 1e-6;
  int iteration = 0;
  Eigen::VectorXd v_logits;
  Eigen::MatrixXd v_means;
  std::vector<Eigen::MatrixXd> v_factors;

  static GMMFlowState init(const GaussianMixture& m);
  int size() const { return static_cast<int>(logits.size()); }
  int dim() const { return static_cast<int>(means.cols()); }
  GaussianMixture mixture() const;  // weights on the simplex, eigenvalues floored
};

// One momentum step on (logits, means, factors) along central
// finite-difference gradients of the squared metric; common substreams for
// the +h and -h evaluations keep the Monte-Carlo noise out of the quotient.
GMMFlowState gmm_flow_step(const GMMFlowState& state, const GaussianMixture& target,
                           GmmMetric metric, const FlowConfig& cfg);

}  // namespace horo
