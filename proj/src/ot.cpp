#include "horo/ot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "horo/errors.hpp"
#include "horo/quantile.hpp"

namespace horo {

static Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& s) { return 0.5 * (s + s.transpose()); }

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(s));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd sym_sqrt_checked(const Eigen::MatrixXd& s, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(s));
  const Eigen::VectorXd& ev = es.eigenvalues();
  double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -rel_tol * scale)
    throw InputError("sym_sqrt_checked: matrix has a significantly negative eigenvalue");
  Eigen::VectorXd cl = ev.cwiseMax(0.0);
  return es.eigenvectors() * cl.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(s));
  const Eigen::VectorXd& ev = es.eigenvalues();
  double scale = std::max(1e-300, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() <= 1e-14 * scale) throw InputError("sym_inv_sqrt: matrix is singular");
  return es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

double bw_distance_sq(const GaussianMeasure& a, const GaussianMeasure& b) {
  if (a.dim() != b.dim()) throw InputError("bw_distance: dimension mismatch");
  const double dm = (a.mean - b.mean).squaredNorm();
  Eigen::MatrixXd ra = sym_sqrt(a.cov);
  Eigen::MatrixXd inner = symmetrize(ra * b.cov * ra);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
  double cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  double cov_part = a.cov.trace() + b.cov.trace() - 2.0 * cross;
  return dm + std::max(0.0, cov_part);
}

double bw_distance(const GaussianMeasure& a, const GaussianMeasure& b) {
  return std::sqrt(bw_distance_sq(a, b));
}

Eigen::VectorXd BWMap::apply(const Eigen::VectorXd& x) const {
  return target.mean + A * (x - source.mean);
}

BWMap bw_map(const GaussianMeasure& a, const GaussianMeasure& b) {
  if (a.dim() != b.dim()) throw InputError("bw_map: dimension mismatch");
  Eigen::MatrixXd ra = sym_sqrt(a.cov);
  Eigen::MatrixXd ira = sym_inv_sqrt(a.cov);
  Eigen::MatrixXd mid = sym_sqrt(symmetrize(ra * b.cov * ra));
  BWMap m;
  m.A = symmetrize(ira * mid * ira);
  m.source = a;
  m.target = b;
  double rel = (m.A * a.cov * m.A - b.cov).norm() / std::max(1.0, b.cov.norm());
  if (rel > 1e-8) throw InputError("bw_map: A Sigma_a A = Sigma_b failed to hold numerically");
  return m;
}

GaussianMeasure geodesic_bw(const GaussianMeasure& a, const GaussianMeasure& b, double t,
                            bool strict) {
  BWMap map = bw_map(a, b);
  const int d = a.dim();
  Eigen::MatrixXd M = (1.0 - t) * Eigen::MatrixXd::Identity(d, d) + t * map.A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  double scale = std::max(std::fabs(lo), std::fabs(hi));
  if (std::min(std::fabs(lo), std::fabs(hi)) < 1e-12 * std::max(1.0, scale))
    throw InputError("geodesic_bw: interpolation matrix is singular at t=" + std::to_string(t));
  if (strict && (t < 0.0 || t > 1.0) && lo <= 0.0)
    throw InputError("geodesic_bw: t=" + std::to_string(t) +
                     " leaves the positive-definite range");
  Eigen::VectorXd mean = (1.0 - t) * a.mean + t * b.mean;
  Eigen::MatrixXd cov = symmetrize(M * a.cov * M);
  return GaussianMeasure::make(std::move(mean), std::move(cov));
}

// Shortest-augmenting-path assignment with node potentials, O(n^3).
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost, double* total) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw InputError("solve_assignment: cost matrix must be square");
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), INF);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = INF;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n);
  double sum = 0.0;
  for (int j = 1; j <= n; ++j) {
    row_to_col[p[j] - 1] = j - 1;
    sum += cost(p[j] - 1, j - 1);
  }
  if (total) *total = sum;
  return row_to_col;
}

// Successive shortest paths with potentials on the dense bipartite graph.
// Each augmentation saturates a source or a sink, so there are at most
// n + m - 1 of them.
static TransportPlan mincost_flow(const Eigen::MatrixXd& cost_in, const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& b) {
  // Dijkstra-based successive shortest paths start from zero potentials, so
  // arc costs must be nonnegative. A uniform shift changes every feasible
  // plan's total by the same amount (all plans move total mass 1), leaving
  // the optimum unchanged; the reported cost uses the original matrix.
  const Eigen::MatrixXd cost =
      (cost_in.array() - std::min(0.0, cost_in.minCoeff())).matrix();
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  const double INF = std::numeric_limits<double>::infinity();
  Eigen::VectorXd ra = a, rb = b;
  Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(n, m);
  std::vector<double> pot(n + m, 0.0);
  double pot_sink = 0.0;  // potential of the implicit supersink
  std::vector<double> dist(n + m);
  std::vector<int> parent(n + m);
  std::vector<char> done(n + m);

  const double eps = 1e-13 * std::max(1.0, a.sum());
  int guard = 4 * (n + m) + 16;
  while (ra.sum() > eps && guard-- > 0) {
    std::fill(dist.begin(), dist.end(), INF);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (int i = 0; i < n; ++i)
      if (ra[i] > eps) dist[i] = 0.0;
    for (int it = 0; it < n + m; ++it) {
      int u = -1;
      double best = INF;
      for (int v = 0; v < n + m; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u < 0) break;
      done[u] = 1;
      if (u < n) {
        for (int j = 0; j < m; ++j) {
          double rc = cost(u, j) + pot[u] - pot[n + j];
          if (rc < 0.0) rc = 0.0;  // floating-point guard; reduced costs are >= 0
          if (dist[u] + rc < dist[n + j]) {
            dist[n + j] = dist[u] + rc;
            parent[n + j] = u;
          }
        }
      } else {
        int j = u - n;
        for (int i = 0; i < n; ++i) {
          if (flow(i, j) <= 0.0) continue;
          double rc = -cost(i, j) + pot[n + j] - pot[i];
          if (rc < 0.0) rc = 0.0;
          if (dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            parent[i] = u;
          }
        }
      }
    }
    // cheapest reachable sink with remaining demand, measured through the
    // implicit 0-cost sink->supersink arcs so their reduced costs stay valid
    int t = -1;
    double bestd = INF;
    for (int j = 0; j < m; ++j)
      if (rb[j] > eps && dist[n + j] < INF) {
        double score = dist[n + j] + pot[n + j] - pot_sink;
        if (score < bestd) {
          bestd = score;
          t = n + j;
        }
      }
    if (t < 0) throw InputError("exact_ot_lp: infeasible transportation instance");
    for (int v = 0; v < n + m; ++v)
      if (dist[v] < INF) pot[v] += dist[v];
    pot_sink += bestd;
    // bottleneck along the alternating path
    double delta = rb[t - n];
    for (int v = t; parent[v] >= 0; v = parent[v]) {
      int pv = parent[v];
      if (pv >= n) delta = std::min(delta, flow(v, pv - n));  // backward arc pv->v
    }
    int head = t;
    while (parent[head] >= 0) head = parent[head];
    delta = std::min(delta, ra[head]);
    for (int v = t; parent[v] >= 0; v = parent[v]) {
      int pv = parent[v];
      if (pv < n)
        flow(pv, v - n) += delta;  // forward arc source->sink
      else
        flow(v, pv - n) -= delta;  // backward arc sink->source
    }
    ra[head] -= delta;
    rb[t - n] -= delta;
  }
  if (ra.sum() > 1e-9 * std::max(1.0, a.sum()))
    throw InputError("exact_ot_lp: flow failed to converge");

  TransportPlan plan;
  plan.row_weights.assign(a.data(), a.data() + n);
  plan.col_weights.assign(b.data(), b.data() + m);
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (flow(i, j) > 0.0) {
        plan.entries.push_back({i, j, flow(i, j)});
        total += flow(i, j) * cost_in(i, j);
      }
  plan.cost = total;
  return plan;
}

TransportPlan exact_ot_lp(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b, long max_entries) {
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  if (cost.rows() != n || cost.cols() != m) throw InputError("exact_ot_lp: cost shape mismatch");
  if (n == 0 || m == 0) throw InputError("exact_ot_lp: empty marginal");
  if (!cost.allFinite()) throw InputError("exact_ot_lp: non-finite cost");
  if (static_cast<long>(n) * m > max_entries)
    throw CapacityError("exact_ot_lp: instance has " + std::to_string(static_cast<long>(n) * m) +
                        " entries, cap is " + std::to_string(max_entries) +
                        "; use a sliced estimator or subsample");
  if ((a.array() < 0).any() || (b.array() < 0).any())
    throw InputError("exact_ot_lp: negative marginal weight");
  if (std::fabs(a.sum() - 1.0) > 1e-9 || std::fabs(b.sum() - 1.0) > 1e-9)
    throw InputError("exact_ot_lp: marginals must sum to 1");

  const bool uniform_equal =
      n == m && (a.array() == 1.0 / n).all() && (b.array() == 1.0 / n).all();
  if (uniform_equal) {
    double total = 0.0;
    std::vector<int> asg = solve_assignment(cost, &total);
    TransportPlan plan;
    plan.row_weights.assign(a.data(), a.data() + n);
    plan.col_weights.assign(b.data(), b.data() + m);
    plan.assignment = asg;
    const double w = 1.0 / n;
    for (int i = 0; i < n; ++i) plan.entries.push_back({i, asg[i], w});
    plan.cost = total / n;
    return plan;
  }
  return mincost_flow(cost, a, b);
}

TransportPlan exact_ot_lp(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                          const Eigen::MatrixXd& cost, long max_entries) {
  return exact_ot_lp(cost, a.weights, b.weights, max_entries);
}

Eigen::MatrixXd sq_euclidean_cost(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.cols() != B.cols()) throw InputError("sq_euclidean_cost: dimension mismatch");
  Eigen::VectorXd na = A.rowwise().squaredNorm();
  Eigen::VectorXd nb = B.rowwise().squaredNorm();
  Eigen::MatrixXd C = -2.0 * A * B.transpose();
  C.colwise() += na;
  C.rowwise() += nb.transpose();
  return C.cwiseMax(0.0);
}

double w2_empirical_sq(const EmpiricalMeasure& a, const EmpiricalMeasure& b, long max_entries) {
  if (a.dim() != b.dim()) throw InputError("w2_empirical_sq: dimension mismatch");
  if (a.dim() == 1) {
    std::vector<double> xa(a.points.data(), a.points.data() + a.size());
    std::vector<double> xb(b.points.data(), b.points.data() + b.size());
    std::vector<double> wa(a.weights.data(), a.weights.data() + a.size());
    std::vector<double> wb(b.weights.data(), b.weights.data() + b.size());
    return w2_1d_sq(Discrete1D::weighted(std::move(xa), std::move(wa)),
                    Discrete1D::weighted(std::move(xb), std::move(wb)));
  }
  Eigen::MatrixXd cost = sq_euclidean_cost(a.points, b.points);
  return exact_ot_lp(cost, a.weights, b.weights, max_entries).cost;
}

OtddResult otdd_exact_detail(const LabeledDataset& P, const LabeledDataset& Q, long max_entries) {
  if (P.dim() != Q.dim()) throw InputError("otdd_exact: feature dimension mismatch");
  OtddResult res;
  res.class_dist_sq.resize(P.num_classes, Q.num_classes);
  for (int cp = 1; cp <= P.num_classes; ++cp) {
    EmpiricalMeasure mp = class_conditional(P, cp);
    for (int cq = 1; cq <= Q.num_classes; ++cq) {
      EmpiricalMeasure mq = class_conditional(Q, cq);
      res.class_dist_sq(cp - 1, cq - 1) = w2_empirical_sq(mp, mq, max_entries);
    }
  }
  Eigen::MatrixXd cost = sq_euclidean_cost(P.features, Q.features);
  if (static_cast<long>(P.size()) * Q.size() > max_entries)
    throw CapacityError("otdd_exact: outer problem exceeds the LP cap");
  for (int i = 0; i < P.size(); ++i)
    for (int j = 0; j < Q.size(); ++j)
      cost(i, j) += res.class_dist_sq(P.labels[i] - 1, Q.labels[j] - 1);
  Eigen::VectorXd wa = Eigen::VectorXd::Constant(P.size(), 1.0 / P.size());
  Eigen::VectorXd wb = Eigen::VectorXd::Constant(Q.size(), 1.0 / Q.size());
  res.outer = exact_ot_lp(cost, wa, wb, max_entries);
  res.value = std::sqrt(std::max(0.0, res.outer.cost));
  return res;
}

double otdd_exact(const LabeledDataset& P, const LabeledDataset& Q, long max_entries) {
  return otdd_exact_detail(P, Q, max_entries).value;
}

void save_plan_csv(const TransportPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("save_plan_csv: cannot open " + path);
  out.precision(17);
  out << "i,j,mass\n";
  for (const auto& e : plan.entries) out << e.i << "," << e.j << "," << e.mass << "\n";
  if (!out) throw InputError("save_plan_csv: write failure on " + path);
}

}  // namespace horo
