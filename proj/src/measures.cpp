#include "horo/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "horo/errors.hpp"
#include "horo/normal.hpp"

namespace horo {

using json = nlohmann::json;

static void check_finite(const std::vector<double>& xs, const char* what) {
  for (double x : xs)
    if (!std::isfinite(x)) throw InputError(std::string(what) + ": non-finite entry");
}

Discrete1D Discrete1D::from_samples(std::vector<double> xs) {
  if (xs.empty()) throw InputError("Discrete1D: empty sample set");
  check_finite(xs, "Discrete1D");
  std::sort(xs.begin(), xs.end());
  Discrete1D m;
  const int n = static_cast<int>(xs.size());
  m.values = std::move(xs);
  m.weights.assign(n, 1.0 / n);
  m.cum.resize(n);
  for (int i = 0; i < n; ++i) m.cum[i] = static_cast<double>(i + 1) / n;
  m.cum.back() = 1.0;
  return m;
}

Discrete1D Discrete1D::weighted(std::vector<double> xs, std::vector<double> ws) {
  if (xs.empty() || xs.size() != ws.size())
    throw InputError("Discrete1D: values/weights size mismatch or empty");
  check_finite(xs, "Discrete1D");
  double total = 0.0;
  for (double w : ws) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("Discrete1D: weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw InputError("Discrete1D: weights sum to zero");
  std::vector<int> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return xs[a] < xs[b]; });
  Discrete1D m;
  for (int i : order) {
    if (ws[i] <= 0.0) continue;
    m.values.push_back(xs[i]);
    m.weights.push_back(ws[i] / total);
  }
  if (m.values.empty()) throw InputError("Discrete1D: all weights zero");
  m.cum.resize(m.values.size());
  double acc = 0.0;
  for (size_t i = 0; i < m.weights.size(); ++i) {
    acc += m.weights[i];
    m.cum[i] = acc;
  }
  m.cum.back() = 1.0;
  return m;
}

double Discrete1D::quantile(double u) const {
  if (!(u > 0.0) || u > 1.0) throw InputError("quantile: u must be in (0,1]");
  // smallest index with cumulative weight >= u (left-continuous inverse CDF)
  auto it = std::lower_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) --it;
  return values[static_cast<size_t>(it - cum.begin())];
}

double Discrete1D::mean() const {
  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i) s += values[i] * weights[i];
  return s;
}

double Gaussian1D::quantile(double u) const {
  if (!(u > 0.0) || u > 1.0) throw InputError("quantile: u must be in (0,1]");
  if (sd == 0.0) return mean;  // degenerate limit (point mass)
  return mean + sd * norm_ppf(u);
}

double quantile_eval(const Discrete1D& m, double u) { return m.quantile(u); }
double quantile_eval(const Gaussian1D& m, double u) { return m.quantile(u); }

EmpiricalMeasure EmpiricalMeasure::uniform(Eigen::MatrixXd pts) {
  if (pts.rows() == 0) throw InputError("EmpiricalMeasure: empty point set");
  if (!pts.allFinite()) throw InputError("EmpiricalMeasure: non-finite point");
  EmpiricalMeasure m;
  m.weights = Eigen::VectorXd::Constant(pts.rows(), 1.0 / static_cast<double>(pts.rows()));
  m.points = std::move(pts);
  return m;
}

EmpiricalMeasure EmpiricalMeasure::weighted(Eigen::MatrixXd pts, Eigen::VectorXd ws) {
  if (pts.rows() == 0 || pts.rows() != ws.size())
    throw InputError("EmpiricalMeasure: points/weights mismatch or empty");
  if (!pts.allFinite() || !ws.allFinite()) throw InputError("EmpiricalMeasure: non-finite input");
  if ((ws.array() < 0.0).any()) throw InputError("EmpiricalMeasure: negative weight");
  double total = ws.sum();
  if (!(total > 0.0)) throw InputError("EmpiricalMeasure: weights sum to zero");
  EmpiricalMeasure m;
  m.points = std::move(pts);
  m.weights = ws / total;
  return m;
}

GaussianMeasure GaussianMeasure::make(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  const int d = static_cast<int>(mean.size());
  if (d == 0) throw InputError("GaussianMeasure: empty mean");
  if (cov.rows() != d || cov.cols() != d) throw InputError("GaussianMeasure: cov shape mismatch");
  if (!mean.allFinite() || !cov.allFinite()) throw InputError("GaussianMeasure: non-finite input");
  double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InputError("GaussianMeasure: covariance not symmetric");
  Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -1e-8 * scale) throw InputError("GaussianMeasure: covariance not PSD");
  if (min_eig < 1e-12) {
    // Jitter keeps the transport formulas defined for degenerate covariances.
    double tr = sym.trace();
    double eps = 1e-9 * (tr > 0.0 ? tr / d : 1.0);
    sym += eps * Eigen::MatrixXd::Identity(d, d);
  }
  GaussianMeasure g;
  g.mean = std::move(mean);
  g.cov = std::move(sym);
  return g;
}

Gaussian1D GaussianMeasure::as_1d() const {
  if (dim() != 1) throw InputError("as_1d: measure is not one-dimensional");
  return Gaussian1D{mean[0], std::sqrt(cov(0, 0))};
}

GaussianMixture GaussianMixture::make(std::vector<double> ws, std::vector<GaussianMeasure> comps) {
  if (ws.empty() || ws.size() != comps.size())
    throw InputError("GaussianMixture: weights/components mismatch or empty");
  double total = 0.0;
  for (double w : ws) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("GaussianMixture: weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw InputError("GaussianMixture: weights sum to zero");
  int d = comps[0].dim();
  for (const auto& c : comps)
    if (c.dim() != d) throw InputError("GaussianMixture: mixed component dimensions");
  for (auto& w : ws) w /= total;
  GaussianMixture m;
  m.weights = std::move(ws);
  m.components = std::move(comps);
  return m;
}

LabeledDataset LabeledDataset::make(Eigen::MatrixXd features, std::vector<int> labels) {
  if (features.rows() == 0) throw InputError("LabeledDataset: empty");
  if (static_cast<size_t>(features.rows()) != labels.size())
    throw InputError("LabeledDataset: features/labels size mismatch");
  if (!features.allFinite()) throw InputError("LabeledDataset: non-finite feature");
  LabeledDataset d;
  d.features = std::move(features);
  d.labels.resize(labels.size());
  std::vector<int> seen;  // original label -> position = new id - 1
  for (size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find(seen.begin(), seen.end(), labels[i]);
    int id;
    if (it == seen.end()) {
      seen.push_back(labels[i]);
      id = static_cast<int>(seen.size());
    } else {
      id = static_cast<int>(it - seen.begin()) + 1;
    }
    d.labels[i] = id;
  }
  d.num_classes = static_cast<int>(seen.size());
  d.class_index.assign(d.num_classes, {});
  for (size_t i = 0; i < d.labels.size(); ++i)
    d.class_index[d.labels[i] - 1].push_back(static_cast<int>(i));
  return d;
}

GaussianMeasure gaussian_moments(const EmpiricalMeasure& m) {
  const int d = m.dim();
  Eigen::VectorXd mean = m.points.transpose() * m.weights;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < m.size(); ++i) {
    Eigen::VectorXd c = m.points.row(i).transpose() - mean;
    cov.noalias() += m.weights[i] * c * c.transpose();
  }
  return GaussianMeasure::make(std::move(mean), std::move(cov));
}

EmpiricalMeasure class_conditional(const LabeledDataset& d, int y) {
  if (y < 1 || y > d.num_classes) throw InputError("class_conditional: unknown class id");
  const auto& rows = d.class_index[y - 1];
  Eigen::MatrixXd pts(rows.size(), d.dim());
  for (size_t i = 0; i < rows.size(); ++i) pts.row(i) = d.features.row(rows[i]);
  return EmpiricalMeasure::uniform(std::move(pts));
}

static std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

LabeledDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("load_dataset_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw InputError("load_dataset_csv: empty file " + path);
  auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "label")
    throw InputError("load_dataset_csv: header must be f0,...,f{d-1},label");
  const size_t ncol = header.size();
  const int d = static_cast<int>(ncol - 1);

  std::vector<double> feats;
  std::vector<int> labels;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto tok = split_csv_line(line);
    if (tok.size() != ncol)
      throw InputError("load_dataset_csv: row " + std::to_string(row) + " has " +
                       std::to_string(tok.size()) + " columns, expected " + std::to_string(ncol));
    for (int j = 0; j < d; ++j) {
      double v;
      try {
        size_t pos;
        v = std::stod(tok[j], &pos);
        if (pos != tok[j].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw InputError("load_dataset_csv: row " + std::to_string(row) +
                         ": cannot parse feature '" + tok[j] + "'");
      }
      if (!std::isfinite(v))
        throw InputError("load_dataset_csv: row " + std::to_string(row) + ": non-finite feature");
      feats.push_back(v);
    }
    try {
      size_t pos;
      long lv = std::stol(tok[d], &pos);
      if (pos != tok[d].size()) throw std::invalid_argument("trailing");
      labels.push_back(static_cast<int>(lv));
    } catch (const std::exception&) {
      throw InputError("load_dataset_csv: row " + std::to_string(row) + ": cannot parse label '" +
                       tok[d] + "'");
    }
  }
  if (labels.empty()) throw InputError("load_dataset_csv: no data rows in " + path);
  Eigen::MatrixXd X(labels.size(), d);
  for (size_t i = 0; i < labels.size(); ++i)
    for (int j = 0; j < d; ++j) X(i, j) = feats[i * d + j];
  return LabeledDataset::make(std::move(X), std::move(labels));
}

void save_dataset_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("save_dataset_csv: cannot open " + path);
  out.precision(17);
  for (int j = 0; j < ds.dim(); ++j) out << "f" << j << ",";
  out << "label\n";
  for (int i = 0; i < ds.size(); ++i) {
    for (int j = 0; j < ds.dim(); ++j) out << ds.features(i, j) << ",";
    out << ds.labels[i] << "\n";
  }
  if (!out) throw InputError("save_dataset_csv: write failure on " + path);
}

GaussianMixture load_mixture_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("load_mixture_json: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("load_mixture_json: parse error in " + path + ": " + e.what());
  }
  if (!j.contains("weights") || !j.contains("means") || !j.contains("covs"))
    throw InputError("load_mixture_json: need keys weights, means, covs");
  std::vector<double> ws;
  std::vector<GaussianMeasure> comps;
  try {
    ws = j["weights"].get<std::vector<double>>();
    auto means = j["means"].get<std::vector<std::vector<double>>>();
    auto covs = j["covs"].get<std::vector<std::vector<std::vector<double>>>>();
    if (means.size() != ws.size() || covs.size() != ws.size())
      throw InputError("load_mixture_json: weights/means/covs length mismatch");
    for (size_t k = 0; k < ws.size(); ++k) {
      int d = static_cast<int>(means[k].size());
      Eigen::VectorXd m(d);
      for (int i = 0; i < d; ++i) m[i] = means[k][i];
      Eigen::MatrixXd c(d, d);
      if (static_cast<int>(covs[k].size()) != d)
        throw InputError("load_mixture_json: cov shape mismatch");
      for (int i = 0; i < d; ++i) {
        if (static_cast<int>(covs[k][i].size()) != d)
          throw InputError("load_mixture_json: cov shape mismatch");
        for (int l = 0; l < d; ++l) c(i, l) = covs[k][i][l];
      }
      comps.push_back(GaussianMeasure::make(std::move(m), std::move(c)));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("load_mixture_json: bad structure: ") + e.what());
  }
  return GaussianMixture::make(std::move(ws), std::move(comps));
}

void save_mixture_json(const GaussianMixture& m, const std::string& path) {
  json j;
  j["weights"] = m.weights;
  auto& means = j["means"] = json::array();
  auto& covs = j["covs"] = json::array();
  for (const auto& c : m.components) {
    std::vector<double> mv(c.mean.data(), c.mean.data() + c.mean.size());
    means.push_back(mv);
    json cov = json::array();
    for (int i = 0; i < c.dim(); ++i) {
      std::vector<double> row(c.dim());
      for (int l = 0; l < c.dim(); ++l) row[l] = c.cov(i, l);
      cov.push_back(row);
    }
    covs.push_back(cov);
  }
  std::ofstream out(path);
  if (!out) throw InputError("save_mixture_json: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw InputError("save_mixture_json: write failure on " + path);
}

}  // namespace horo
