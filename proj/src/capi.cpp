#include "horo.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <json.hpp>
#include <string>

#include "horo/busemann.hpp"
#include "horo/errors.hpp"
#include "horo/flow.hpp"
#include "horo/harness.hpp"
#include "horo/measures.hpp"
#include "horo/ot.hpp"
#include "horo/rays.hpp"
#include "horo/sliced.hpp"

using nlohmann::json;

struct horo_dataset {
  horo::LabeledDataset data;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) return nullptr;
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

// every successful call clears the error; failures record it and map the
// exception class onto the shared status codes
template <class F>
int guarded(char** out_json, F&& fn) {
  if (out_json) *out_json = nullptr;
  try {
    json out = fn();
    if (out_json) {
      *out_json = dup_string(out.dump(2));
      if (!*out_json) {
        g_last_error = "out of memory";
        return HORO_ERR_CAPACITY;
      }
    }
    g_last_error.clear();
    return HORO_OK;
  } catch (const horo::CapacityError& e) {
    g_last_error = e.what();
    return HORO_ERR_CAPACITY;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HORO_ERR_INPUT;
  }
}

json parse_config(const char* config_json) {
  if (!config_json) throw horo::InputError("config string is null");
  return json::parse(config_json);
}

std::string config_hash(const json& cfg) {
  // FNV-1a over the canonical dump (object keys are stored sorted)
  const std::string s = cfg.dump();
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json repro_block(uint64_t seed, const json& cfg) {
  return {{"seed", seed}, {"version", horo_version()}, {"config_hash", config_hash(cfg)}};
}

// JSON has no representation for infinities; an unbounded interval endpoint
// comes out as null
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(); }

json interval_json(const horo::Interval& iv) {
  return {{"lo", finite_or_null(iv.lo)}, {"hi", finite_or_null(iv.hi)}};
}

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

Eigen::MatrixXd mat_from(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw horo::InputError("matrix: no rows");
  Eigen::MatrixXd m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw horo::InputError("matrix: ragged rows");
    for (size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<int>(i), static_cast<int>(k)) = rows[i][k];
  }
  return m;
}

horo::LabeledDataset dataset_from_spec(const json& spec) {
  if (!spec.is_object()) throw horo::InputError("dataset source must be an object");
  if (spec.contains("csv")) return horo::load_dataset_csv(spec.at("csv").get<std::string>());
  if (spec.contains("blobs")) {
    const json& b = spec.at("blobs");
    return horo::make_blobs(b.value("classes", 5), b.value("per_class", 600),
                            b.value("dim", 10), b.value("separation", 3.0),
                            b.value("seed", 0ULL));
  }
  if (spec.contains("rings")) {
    const json& r = spec.at("rings");
    std::vector<double> radii{1.0, 2.0, 3.0};
    if (r.contains("radii")) radii = r.at("radii").get<std::vector<double>>();
    const std::string mode = r.value("mode", "evenly");
    if (mode != "evenly" && mode != "uniform")
      throw horo::InputError("rings mode must be 'evenly' or 'uniform'");
    return horo::rings_target(r.value("per_class", 80), radii, r.value("seed", 0ULL),
                              mode == "evenly" ? horo::RingsMode::evenly
                                               : horo::RingsMode::uniform);
  }
  throw horo::InputError("dataset source needs one of csv/blobs/rings");
}

horo::GaussianMixture mixture_from_spec(const json& spec) {
  if (spec.is_object() && spec.contains("mixture"))
    return horo::load_mixture_json(spec.at("mixture").get<std::string>());
  throw horo::InputError("mixture source needs {\"mixture\": path}");
}

struct DistOptions {
  std::string metric;
  int L = 500;
  uint64_t seed = 0;
  int threads = 1;
  int d_reduced = 10;
  int moments = 5;
  int lambda_max = 8;
  long lp_cap = horo::kDefaultLpCap;
};

DistOptions parse_dist_options(const json& cfg) {
  DistOptions o;
  o.metric = cfg.value("metric", "swb1dg");
  o.L = cfg.value("L", 500);
  o.seed = cfg.value("seed", 0ULL);
  o.threads = cfg.value("threads", 1);
  o.d_reduced = cfg.value("d_reduced", 10);
  o.moments = cfg.value("moments", 5);
  o.lambda_max = cfg.value("lambda_max", 8);
  o.lp_cap = cfg.value("lp_cap", horo::kDefaultLpCap);
  return o;
}

bool is_mixture_metric(const std::string& m) {
  return m == "b1dgmsw" || m == "bgmsw" || m == "bw-exact";
}

// value + standard error + L actually used (0 for the exact metrics)
struct DistOutcome {
  double value = 0.0;
  double std_error = 0.0;
  int L = 0;
};

DistOutcome dataset_distance(const horo::LabeledDataset& A, const horo::LabeledDataset& B,
                             const DistOptions& o) {
  horo::SlicedOptions opt;
  opt.threads = o.threads;
  DistOutcome out;
  if (o.metric == "otdd-exact") {
    out.value = horo::otdd_exact(A, B, o.lp_cap);
    return out;
  }
  horo::SlicedEstimate est;
  if (o.metric == "sw")
    est = horo::sw_vanilla(horo::EmpiricalMeasure::uniform(A.features),
                           horo::EmpiricalMeasure::uniform(B.features), o.L, o.seed, opt);
  else if (o.metric == "swb1dg")
    est = horo::swb1dg(A, B, o.L, o.seed, opt);
  else if (o.metric == "swbg")
    est = horo::swbg(A, B, o.L, o.seed, o.d_reduced, opt);
  else if (o.metric == "sotdd")
    est = horo::sotdd_baseline(A, B, o.L, o.seed, o.moments, o.lambda_max, opt);
  else
    throw horo::InputError("unknown dataset metric '" + o.metric + "'");
  out.value = est.value;
  out.std_error = est.std_error();
  out.L = o.L;
  return out;
}

DistOutcome mixture_distance(const horo::GaussianMixture& a, const horo::GaussianMixture& b,
                             const DistOptions& o) {
  horo::SlicedOptions opt;
  opt.threads = o.threads;
  DistOutcome out;
  if (o.metric == "bw-exact") {
    out.value = horo::mixture_bw_distance(a, b);
    return out;
  }
  horo::SlicedEstimate est;
  if (o.metric == "b1dgmsw")
    est = horo::b1dgmsw(a, b, o.L, o.seed, opt);
  else if (o.metric == "bgmsw")
    est = horo::bgmsw(a, b, o.L, o.seed, opt);
  else
    throw horo::InputError("unknown mixture metric '" + o.metric + "'");
  out.value = est.value;
  out.std_error = est.std_error();
  out.L = o.L;
  return out;
}

json dist_report(const DistOutcome& out, const DistOptions& o, const json& cfg,
                 double wall_ms) {
  return {{"metric", o.metric},
          {"value", out.value},
          {"std_error", out.std_error},
          {"L", out.L},
          {"seed", o.seed},
          {"wall_time_ms", wall_ms},
          {"reproducibility", repro_block(o.seed, cfg)}};
}

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

horo::ExperimentConfig experiment_from_json(const json& cfg) {
  horo::ExperimentConfig ec;
  ec.id = cfg.value("id", ec.id);
  ec.dataset_path = cfg.value("dataset", std::string{});
  if (cfg.contains("generator")) {
    const json& g = cfg.at("generator");
    ec.generator.classes = g.value("classes", ec.generator.classes);
    ec.generator.per_class = g.value("per_class", ec.generator.per_class);
    ec.generator.dim = g.value("dim", ec.generator.dim);
    ec.generator.separation = g.value("separation", ec.generator.separation);
  }
  if (cfg.contains("metrics")) ec.metrics = cfg.at("metrics").get<std::vector<std::string>>();
  if (cfg.contains("proj_counts")) ec.proj_counts = cfg.at("proj_counts").get<std::vector<int>>();
  ec.pairs = cfg.value("pairs", ec.pairs);
  ec.sub_min = cfg.value("sub_min", ec.sub_min);
  ec.sub_max = cfg.value("sub_max", ec.sub_max);
  ec.boot_sets = cfg.value("boot_sets", ec.boot_sets);
  ec.boot_size = cfg.value("boot_size", ec.boot_size);
  ec.seed = cfg.value("seed", 0ULL);
  ec.threads = cfg.value("threads", ec.threads);
  ec.lp_cap = cfg.value("lp_cap", ec.lp_cap);
  ec.out = cfg.value("out", std::string{});
  return ec;
}

horo::FlowMetric flow_metric_from(const std::string& name) {
  if (name == "sw") return horo::FlowMetric::sw;
  if (name == "swb1dg") return horo::FlowMetric::swb1dg;
  if (name == "swbg") return horo::FlowMetric::swbg;
  if (name == "sotdd") return horo::FlowMetric::sotdd;
  throw horo::InputError("unknown flow metric '" + name + "'");
}

horo::Discrete1D discrete_target_from(const json& t) {
  const auto values = t.at("samples").get<std::vector<double>>();
  if (t.contains("weights"))
    return horo::Discrete1D::weighted(values, t.at("weights").get<std::vector<double>>());
  return horo::Discrete1D::from_samples(values);
}

}  // namespace

extern "C" {

const char* horo_version(void) { return HORO_VERSION_STRING; }

const char* horo_last_error(void) { return g_last_error.c_str(); }

void horo_string_free(char* s) { std::free(s); }

int horo_dataset_load_csv(const char* path, horo_dataset** out) {
  if (!out) {
    g_last_error = "out parameter is null";
    return HORO_ERR_INPUT;
  }
  *out = nullptr;
  try {
    if (!path) throw horo::InputError("path is null");
    auto* d = new horo_dataset{horo::load_dataset_csv(path)};
    *out = d;
    g_last_error.clear();
    return HORO_OK;
  } catch (const horo::CapacityError& e) {
    g_last_error = e.what();
    return HORO_ERR_CAPACITY;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HORO_ERR_INPUT;
  }
}

int horo_dataset_blobs(int classes, int per_class, int dim, double separation,
                       unsigned long long seed, horo_dataset** out) {
  if (!out) {
    g_last_error = "out parameter is null";
    return HORO_ERR_INPUT;
  }
  *out = nullptr;
  try {
    auto* d = new horo_dataset{horo::make_blobs(classes, per_class, dim, separation, seed)};
    *out = d;
    g_last_error.clear();
    return HORO_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HORO_ERR_INPUT;
  }
}

int horo_dataset_info(const horo_dataset* d, char** out_json) {
  return guarded(out_json, [&]() -> json {
    if (!d) throw horo::InputError("dataset handle is null");
    json sizes = json::array();
    for (int c = 1; c <= d->data.num_classes; ++c) sizes.push_back(d->data.class_size(c));
    return {{"rows", d->data.features.rows()},
            {"dim", d->data.dim()},
            {"classes", d->data.num_classes},
            {"class_sizes", sizes}};
  });
}

void horo_dataset_free(horo_dataset* d) { delete d; }

int horo_dist_datasets(const horo_dataset* a, const horo_dataset* b,
                       const char* options_json, char** out_json) {
  return guarded(out_json, [&]() -> json {
    if (!a || !b) throw horo::InputError("dataset handle is null");
    const json cfg = options_json ? json::parse(options_json) : json::object();
    const DistOptions o = parse_dist_options(cfg);
    if (is_mixture_metric(o.metric))
      throw horo::InputError("metric '" + o.metric + "' needs mixture sources");
    const auto t0 = std::chrono::steady_clock::now();
    const DistOutcome out = dataset_distance(a->data, b->data, o);
    return dist_report(out, o, cfg, ms_since(t0));
  });
}

int horo_dist(const char* config_json, char** out_json) {
  return guarded(out_json, [&]() -> json {
    const json cfg = parse_config(config_json);
    const DistOptions o = parse_dist_options(cfg);
    if (!cfg.contains("a") || !cfg.contains("b"))
      throw horo::InputError("dist config needs 'a' and 'b' sources");
    const auto t0 = std::chrono::steady_clock::now();
    DistOutcome out;
    if (is_mixture_metric(o.metric))
      out = mixture_distance(mixture_from_spec(cfg.at("a")), mixture_from_spec(cfg.at("b")), o);
    else
      out = dataset_distance(dataset_from_spec(cfg.at("a")), dataset_from_spec(cfg.at("b")), o);
    return dist_report(out, o, cfg, ms_since(t0));
  });
}

int horo_correlate(const char* config_json, char** out_json) {
  return guarded(out_json, [&]() -> json {
    const json cfg = parse_config(config_json);
    const horo::ExperimentConfig ec = experiment_from_json(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const horo::LabeledDataset base = horo::resolve_base_dataset(ec);
    const horo::CorrelationReport rep = horo::correlate_cmd(base, ec);
    json metrics = json::array();
    for (const auto& mc : rep.metrics) {
      metrics.push_back({{"metric", mc.metric},
                         {"projections", mc.projections},
                         {"rho_s", mc.rho_s},
                         {"rho_p", mc.rho_p},
                         {"bootstrap",
                          {{"s_mean", mc.boot_s_mean},
                           {"s_std", mc.boot_s_std},
                           {"p_mean", mc.boot_p_mean},
                           {"p_std", mc.boot_p_std}}},
                         {"values", mc.values}});
    }
    return {{"id", ec.id},
            {"pairs", ec.pairs},
            {"pair_sizes", rep.pair_sizes},
            {"reference", rep.reference},
            {"metrics", metrics},
            {"wall_time_ms", ms_since(t0)},
            {"reproducibility", repro_block(ec.seed, cfg)}};
  });
}

int horo_flow(const char* config_json, char** out_json) {
  return guarded(out_json, [&]() -> json {
    const json cfg = parse_config(config_json);
    if (!cfg.contains("source") || !cfg.contains("target"))
      throw horo::InputError("flow config needs 'source' and 'target'");
    const horo::LabeledDataset source = dataset_from_spec(cfg.at("source"));
    const horo::LabeledDataset target = dataset_from_spec(cfg.at("target"));

    horo::FlowConfig fc;
    fc.metric = flow_metric_from(cfg.value("metric", "swbg"));
    fc.step = cfg.value("step", fc.step);
    fc.momentum = cfg.value("momentum", fc.momentum);
    fc.iterations = cfg.value("iterations", fc.iterations);
    fc.projections = cfg.value("projections", fc.projections);
    fc.seed = cfg.value("seed", 0ULL);
    fc.threads = cfg.value("threads", fc.threads);
    fc.d_reduced = cfg.value("d_reduced", fc.d_reduced);
    fc.moments = cfg.value("moments", fc.moments);
    fc.lambda_max = cfg.value("lambda_max", fc.lambda_max);
    fc.target_batch = cfg.value("target_batch", fc.target_batch);
    fc.eval_every = cfg.value("eval_every", fc.eval_every);
    fc.snapshot_every = cfg.value("snapshot_every", fc.snapshot_every);
    fc.out_dir = cfg.value("out_dir", fc.out_dir);
    const bool want_wow = cfg.value("final_wow", true);
    const bool include_records = cfg.value("include_records", false);
    const std::string traj_path = cfg.value("trajectory_csv", std::string{});

    const auto t0 = std::chrono::steady_clock::now();
    const double initial_wow =
        want_wow ? horo::wow_distance_eval(source, target).value : 0.0;
    const horo::FlowResult res = horo::run_flow(source, target, fc);
    const double final_wow =
        want_wow ? horo::wow_distance_eval(res.state.dataset(), target).value : 0.0;
    if (!traj_path.empty()) horo::save_trajectory_csv(res.records, traj_path);

    json out = {{"metric", cfg.value("metric", "swbg")},
                {"iterations", res.state.iteration},
                {"initial_objective", res.records.empty() ? 0.0 : res.records.front().objective},
                {"final_objective", res.records.empty() ? 0.0 : res.records.back().objective},
                {"wall_time_ms", ms_since(t0)},
                {"reproducibility", repro_block(fc.seed, cfg)}};
    if (want_wow) {
      out["initial_wow"] = initial_wow;
      out["final_wow"] = final_wow;
    }
    if (!traj_path.empty()) out["trajectory_csv"] = traj_path;
    if (include_records) {
      json recs = json::array();
      for (const auto& r : res.records) {
        json jr = {{"iteration", r.iteration}, {"objective", r.objective}};
        if (r.wow) jr["wow"] = *r.wow;
        recs.push_back(std::move(jr));
      }
      out["records"] = std::move(recs);
    }
    return out;
  });
}

int horo_clusters(const char* config_json, char** out_json) {
  return guarded(out_json, [&]() -> json {
    const json cfg = parse_config(config_json);
    if (!cfg.contains("data")) throw horo::InputError("clusters config needs 'data'");
    const horo::LabeledDataset data = dataset_from_spec(cfg.at("data"));
    const auto t0 = std::chrono::steady_clock::now();
    const horo::ClustersReport rep = horo::clusters_cmd(
        horo::EmpiricalMeasure::uniform(data.features), cfg.value("k_max", 6),
        cfg.value("metric", "b1dgmsw"), cfg.value("L", 256), cfg.value("seed", 0ULL),
        cfg.value("threshold", 0.1), cfg.value("threads", 1));
    return {{"metric", rep.metric},
            {"projections", rep.projections},
            {"ks", rep.ks},
            {"distances", rep.distances},
            {"threshold", rep.threshold},
            {"suggested_k", rep.suggested_k},
            {"wall_time_ms", ms_since(t0)},
            {"reproducibility", repro_block(rep.seed, cfg)}};
  });
}

int horo_ray_check(const char* config_json, char** out_json) {
  return guarded(out_json, [&]() -> json {
    const json cfg = parse_config(config_json);
    if (!cfg.contains("ray")) throw horo::InputError("ray-check config needs 'ray'");
    const json& r = cfg.at("ray");
    const std::string type = r.value("type", "");
    json out = {{"type", type}, {"reproducibility", repro_block(0, cfg)}};

    if (type == "empirical1d") {
      horo::Discrete1D a, b;
      if (r.contains("weights0"))
        a = horo::Discrete1D::weighted(r.at("values0").get<std::vector<double>>(),
                                       r.at("weights0").get<std::vector<double>>());
      else
        a = horo::Discrete1D::from_samples(r.at("values0").get<std::vector<double>>());
      if (r.contains("weights1"))
        b = horo::Discrete1D::weighted(r.at("values1").get<std::vector<double>>(),
                                       r.at("weights1").get<std::vector<double>>());
      else
        b = horo::Discrete1D::from_samples(r.at("values1").get<std::vector<double>>());
      const bool ok = horo::is_ray_1d(a, b);
      out["is_ray"] = ok;
      if (ok) out["speed"] = horo::Ray1DEmpirical::make(a, b).speed;
      return out;
    }
    if (type == "gaussian1d") {
      const double s0 = r.at("s0").get<double>(), s1 = r.at("s1").get<double>();
      if (!(s0 > 0.0) || !(s1 > 0.0))
        throw horo::InputError("ray-check: gaussian1d scales must be positive");
      const bool ok = horo::is_ray_1d_gaussian(s0, s1);
      out["is_ray"] = ok;
      out["extension"] = interval_json(horo::ray_extension_interval_1d_gaussian(s0, s1));
      if (ok) {
        const auto ray = horo::Ray1DGaussian::make(r.at("m0").get<double>(), s0,
                                                   r.at("m1").get<double>(), s1);
        out["speed"] = ray.speed();
      }
      return out;
    }
    if (type == "dirac1d") {
      const double m1 = r.at("m1").get<double>(), s1 = r.at("s1").get<double>();
      if (!std::isfinite(m1) || !(s1 >= 0.0))
        throw horo::InputError("ray-check: dirac1d needs finite m1 and s1 >= 0");
      // scale can only grow away from a point mass, so any nondegenerate
      // endpoint spans a ray
      out["is_ray"] = std::hypot(m1, s1) > 0.0;
      if (std::hypot(m1, s1) > 0.0) out["speed"] = std::hypot(m1, s1);
      return out;
    }
    if (type == "bw") {
      const Eigen::MatrixXd cov0 = mat_from(r.at("cov0"));
      const Eigen::MatrixXd cov1 = mat_from(r.at("cov1"));
      const bool ok = horo::is_ray_bw(cov0, cov1);
      out["is_ray"] = ok;
      if (ok) {
        const auto ray = horo::RayBW::make(
            horo::GaussianMeasure::make(vec_from(r.at("m0")), cov0),
            horo::GaussianMeasure::make(vec_from(r.at("m1")), cov1));
        out["speed"] = ray.speed;
        out["extension"] = interval_json(horo::ray_extension_interval_bw(ray));
      }
      return out;
    }
    throw horo::InputError("ray-check: unknown ray type '" + type + "'");
  });
}

int horo_busemann(const char* config_json, char** out_json) {
  return guarded(out_json, [&]() -> json {
    const json cfg = parse_config(config_json);
    if (!cfg.contains("ray") || !cfg.contains("target"))
      throw horo::InputError("busemann config needs 'ray' and 'target'");
    const horo::AnyRay ray = horo::ray_from_json(cfg.at("ray"));
    const json& t = cfg.at("target");

    json out = {{"speed", horo::ray_speed(ray)},
                {"reproducibility", repro_block(0, cfg)}};

    if (t.contains("samples")) {
      const horo::Discrete1D nu = discrete_target_from(t);
      if (const auto* re = std::get_if<horo::Ray1DEmpirical>(&ray)) {
        const auto proj = horo::busemann_project(*re, nu);
        out["value"] = proj.busemann;
        out["t"] = proj.t;
        out["on_ray"] = proj.on_ray;
      } else if (const auto* rg = std::get_if<horo::Ray1DGaussian>(&ray)) {
        out["value"] = horo::busemann_1d(*rg, nu);
      } else if (const auto* rd = std::get_if<horo::RayDirac1D>(&ray)) {
        out["value"] = horo::busemann_1d(*rd, nu);
      } else {
        throw horo::InputError("busemann: a bw ray needs a gaussian target");
      }
      return out;
    }
    if (t.contains("gaussian1d")) {
      const json& g = t.at("gaussian1d");
      const horo::Gaussian1D nu{g.at("m").get<double>(), g.at("s").get<double>()};
      if (!(nu.sd > 0.0) || !std::isfinite(nu.mean))
        throw horo::InputError("busemann: gaussian1d target needs finite m and s > 0");
      if (const auto* rg = std::get_if<horo::Ray1DGaussian>(&ray)) {
        const auto proj = horo::busemann_project(*rg, nu);
        out["value"] = proj.busemann;
        out["t"] = proj.t;
        out["on_ray"] = proj.on_ray;
      } else if (const auto* rd = std::get_if<horo::RayDirac1D>(&ray)) {
        out["value"] = horo::busemann_1d_gaussian(*rd, nu);
      } else if (const auto* re = std::get_if<horo::Ray1DEmpirical>(&ray)) {
        out["value"] = horo::busemann_1d(*re, nu);
      } else {
        throw horo::InputError("busemann: a bw ray needs a gaussian target");
      }
      return out;
    }
    if (t.contains("gaussian")) {
      const json& g = t.at("gaussian");
      const auto nu =
          horo::GaussianMeasure::make(vec_from(g.at("mean")), mat_from(g.at("cov")));
      const auto* rb = std::get_if<horo::RayBW>(&ray);
      if (!rb) throw horo::InputError("busemann: a full gaussian target needs a bw ray");
      const auto proj = horo::busemann_project(*rb, nu);
      out["value"] = proj.busemann;
      out["t"] = proj.t;
      out["on_ray"] = proj.on_ray;
      return out;
    }
    throw horo::InputError("busemann: target needs samples, gaussian1d, or gaussian");
  });
}

}  // extern "C"
