// Command-line front end over the C API. Every subcommand assembles a JSON
// config (from flags, optionally layered over --config FILE) and prints the
// JSON report, or a flat CSV rendering of its core table with --format csv.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "horo.h"

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

// inline JSON (starts with '{') passes through; otherwise treat as a path
json json_or_file(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return json::parse(arg);
  return load_json_file(arg);
}

json source_from_arg(const std::string& arg, bool mixture_metric) {
  if (!arg.empty() && arg.front() == '{') return json::parse(arg);
  if (mixture_metric) return json{{"mixture", arg}};
  return json{{"csv", arg}};
}

bool is_mixture_metric(const std::string& m) {
  return m == "b1dgmsw" || m == "bgmsw" || m == "bw-exact";
}

std::string num(const json& j, const char* key) {
  return j.contains(key) ? json(j.at(key)).dump() : "";
}

void csv_comment_header(std::ostream& os, const json& rep) {
  if (rep.contains("reproducibility")) {
    const json& r = rep.at("reproducibility");
    os << "# version=" << r.value("version", "") << " seed=" << num(r, "seed")
       << " config_hash=" << r.value("config_hash", "") << "\n";
  }
}

std::string render_csv(const std::string& cmd, const json& rep) {
  std::ostringstream os;
  csv_comment_header(os, rep);
  if (cmd == "dist") {
    os << "metric,value,std_error,L\n";
    os << rep.value("metric", "") << "," << num(rep, "value") << ","
       << num(rep, "std_error") << "," << num(rep, "L") << "\n";
  } else if (cmd == "correlate") {
    os << "metric,projections,rho_s,rho_p,boot_s_mean,boot_s_std,boot_p_mean,boot_p_std\n";
    for (const auto& m : rep.at("metrics"))
      os << m.value("metric", "") << "," << num(m, "projections") << ","
         << num(m, "rho_s") << "," << num(m, "rho_p") << "," << num(m, "boot_s_mean")
         << "," << num(m, "boot_s_std") << "," << num(m, "boot_p_mean") << ","
         << num(m, "boot_p_std") << "\n";
  } else if (cmd == "flow") {
    if (rep.contains("records")) {
      os << "iteration,objective,wow\n";
      for (const auto& r : rep.at("records"))
        os << num(r, "iteration") << "," << num(r, "objective") << "," << num(r, "wow")
           << "\n";
    } else {
      os << "iterations,initial_objective,final_objective,initial_wow,final_wow\n";
      os << num(rep, "iterations") << "," << num(rep, "initial_objective") << ","
         << num(rep, "final_objective") << "," << num(rep, "initial_wow") << ","
         << num(rep, "final_wow") << "\n";
    }
  } else if (cmd == "clusters") {
    os << "# suggested_k=" << num(rep, "suggested_k")
       << " threshold=" << num(rep, "threshold") << "\n";
    os << "k,distance\n";
    const auto& ks = rep.at("ks");
    const auto& ds = rep.at("distances");
    for (size_t i = 0; i < ks.size(); ++i)
      os << json(ks[i]).dump() << "," << json(ds[i]).dump() << "\n";
  } else {
    return rep.dump(2) + "\n";  // no tabular form for this command
  }
  return os.str();
}

struct OutputOptions {
  std::string out;
  std::string format = "json";
};

void add_output_options(CLI::App* sub, OutputOptions& oo, bool csv_capable = true) {
  sub->add_option("-o,--out", oo.out, "write the report to this file instead of stdout");
  if (csv_capable)
    sub->add_option("--format", oo.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

// run a C-API command, render and deliver the report, map status to exit code
int deliver(const std::string& cmd, int (*fn)(const char*, char**), const json& cfg,
            const OutputOptions& oo) {
  char* out = nullptr;
  const int status = fn(cfg.dump().c_str(), &out);
  if (status != HORO_OK) {
    std::cerr << "horo " << cmd << ": " << horo_last_error() << "\n";
    horo_string_free(out);
    return status;
  }
  std::string text;
  if (oo.format == "csv")
    text = render_csv(cmd, json::parse(out));
  else
    text = std::string(out) + "\n";
  horo_string_free(out);
  if (oo.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(oo.out);
    if (!f) {
      std::cerr << "horo " << cmd << ": cannot write " << oo.out << "\n";
      return HORO_ERR_INPUT;
    }
    f << text;
  }
  return 0;
}

// overlay a flag's value onto the config only when the user actually gave it
template <class T>
void overlay(json& cfg, const CLI::Option* opt, const char* key, const T& value) {
  if (opt && opt->count() > 0) cfg[key] = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distances, rays, and horofunctions for labeled datasets and "
               "Gaussian mixtures on Wasserstein space"};
  app.require_subcommand(1);
  app.set_version_flag("--version", horo_version());

  std::string config_path;

  // ---- dist ----
  auto* dist = app.add_subcommand("dist", "distance between two datasets or mixtures");
  std::string d_a, d_b, d_metric = "swb1dg";
  int d_L = 500, d_threads = 1, d_dred = 10, d_moments = 5, d_lmax = 8;
  long d_lpcap = 4000000;
  std::uint64_t d_seed = 0;
  OutputOptions d_out;
  dist->add_option("a", d_a, "first source: CSV path, mixture JSON path, or inline source object");
  dist->add_option("b", d_b, "second source");
  auto* d_metric_o = dist->add_option("-m,--metric", d_metric,
                                      "sw|swb1dg|swbg|sotdd|otdd-exact|b1dgmsw|bgmsw|bw-exact")
                         ->capture_default_str();
  auto* d_L_o = dist->add_option("-L,--projections", d_L, "projection count")->capture_default_str();
  auto* d_seed_o = dist->add_option("--seed", d_seed, "RNG seed")->capture_default_str();
  auto* d_thr_o = dist->add_option("--threads", d_threads, "worker threads")->capture_default_str();
  auto* d_dred_o = dist->add_option("--d-reduced", d_dred, "projected dimension for swbg")
                       ->capture_default_str();
  auto* d_mom_o = dist->add_option("--moments", d_moments, "moment count for sotdd")
                      ->capture_default_str();
  auto* d_lmax_o = dist->add_option("--lambda-max", d_lmax, "series cutoff for sotdd")
                       ->capture_default_str();
  auto* d_cap_o = dist->add_option("--lp-cap", d_lpcap, "max cost-matrix entries for otdd-exact")
                      ->capture_default_str();
  dist->add_option("-c,--config", config_path, "JSON config file (flags override its keys)");
  add_output_options(dist, d_out);

  // ---- correlate ----
  auto* corr = app.add_subcommand("correlate",
                                  "rank sliced metrics against the exact dataset distance "
                                  "over random subsampled pairs");
  std::string c_dataset;
  int c_classes = 5, c_per = 600, c_dim = 10, c_pairs = 40, c_submin = 80, c_submax = 100;
  int c_bsets = 10, c_bsize = 50, c_threads = 1;
  double c_sep = 3.0;
  long c_lpcap = 4000000;
  std::uint64_t c_seed = 0;
  std::vector<std::string> c_metrics{"swb1dg"};
  std::vector<int> c_projs{500};
  OutputOptions c_out;
  auto* c_data_o = corr->add_option("--dataset", c_dataset, "base dataset CSV");
  auto* c_cls_o = corr->add_option("--classes", c_classes, "generated classes")->capture_default_str();
  auto* c_per_o = corr->add_option("--per-class", c_per, "points per generated class")
                      ->capture_default_str();
  auto* c_dim_o = corr->add_option("--dim", c_dim, "generated dimension")->capture_default_str();
  auto* c_sep_o = corr->add_option("--separation", c_sep, "generated class separation")
                      ->capture_default_str();
  auto* c_met_o = corr->add_option("--metrics", c_metrics, "metrics to correlate")
                      ->delimiter(',')
                      ->capture_default_str();
  auto* c_prj_o = corr->add_option("--proj-counts", c_projs,
                                   "projection counts (one, or one per metric)")
                      ->delimiter(',')
                      ->capture_default_str();
  auto* c_pairs_o = corr->add_option("--pairs", c_pairs, "subsampled pairs")->capture_default_str();
  auto* c_smin_o = corr->add_option("--sub-min", c_submin, "min per-class per-side subsample")
                       ->capture_default_str();
  auto* c_smax_o = corr->add_option("--sub-max", c_submax, "max per-class per-side subsample")
                       ->capture_default_str();
  auto* c_bs_o = corr->add_option("--boot-sets", c_bsets, "bootstrap resamples")
                     ->capture_default_str();
  auto* c_bn_o = corr->add_option("--boot-size", c_bsize, "pairs per bootstrap resample")
                     ->capture_default_str();
  auto* c_seed_o = corr->add_option("--seed", c_seed, "RNG seed")->capture_default_str();
  auto* c_thr_o = corr->add_option("--threads", c_threads, "worker threads")->capture_default_str();
  auto* c_cap_o = corr->add_option("--lp-cap", c_lpcap, "max cost-matrix entries for the reference")
                      ->capture_default_str();
  corr->add_option("-c,--config", config_path, "JSON config file (flags override its keys)");
  add_output_options(corr, c_out);

  // ---- flow ----
  auto* flow = app.add_subcommand("flow", "gradient flow of a labeled dataset toward a target");
  std::string f_source, f_target, f_metric = "swbg", f_outdir, f_traj;
  int f_iters = 1000, f_L = 64, f_threads = 1, f_dred = 10, f_moments = 5, f_lmax = 8;
  int f_batch = 0, f_eval = 0, f_snap = 0;
  double f_step = 1.0, f_momentum = 0.9;
  std::uint64_t f_seed = 0;
  bool f_nowow = false, f_records = false;
  OutputOptions f_out;
  flow->add_option("source", f_source, "moving dataset: CSV path or inline source object");
  flow->add_option("target", f_target, "target dataset");
  auto* f_met_o = flow->add_option("-m,--metric", f_metric, "sw|swb1dg|swbg|sotdd")
                      ->capture_default_str();
  auto* f_step_o = flow->add_option("--step", f_step, "step size")->capture_default_str();
  auto* f_mom_o = flow->add_option("--momentum", f_momentum, "momentum coefficient")
                      ->capture_default_str();
  auto* f_it_o = flow->add_option("--iterations", f_iters, "iteration count")->capture_default_str();
  auto* f_L_o = flow->add_option("-L,--projections", f_L, "projections per iteration")
                    ->capture_default_str();
  auto* f_seed_o = flow->add_option("--seed", f_seed, "RNG seed")->capture_default_str();
  auto* f_thr_o = flow->add_option("--threads", f_threads, "worker threads")->capture_default_str();
  auto* f_dred_o = flow->add_option("--d-reduced", f_dred, "projected dimension for swbg")
                       ->capture_default_str();
  auto* f_fm_o = flow->add_option("--moments", f_moments, "moment count for sotdd")
                     ->capture_default_str();
  auto* f_lm_o = flow->add_option("--lambda-max", f_lmax, "series cutoff for sotdd")
                     ->capture_default_str();
  auto* f_tb_o = flow->add_option("--target-batch", f_batch,
                                  "subsample this many target rows per class each iteration")
                     ->capture_default_str();
  auto* f_ev_o = flow->add_option("--eval-every", f_eval,
                                  "evaluate the exact nested distance every k iterations")
                     ->capture_default_str();
  auto* f_sn_o = flow->add_option("--snapshot-every", f_snap,
                                  "write particle snapshots every k iterations")
                     ->capture_default_str();
  auto* f_od_o = flow->add_option("--out-dir", f_outdir, "snapshot directory");
  auto* f_tj_o = flow->add_option("--trajectory-csv", f_traj, "write per-iteration records here");
  flow->add_flag("--no-wow", f_nowow, "skip the exact nested distance at the endpoints");
  flow->add_flag("--records", f_records, "include per-iteration records in the report");
  flow->add_option("-c,--config", config_path, "JSON config file (flags override its keys)");
  add_output_options(flow, f_out);

  // ---- clusters ----
  auto* clus = app.add_subcommand("clusters",
                                  "suggest a cluster count from consecutive mixture-fit distances");
  std::string k_data, k_metric = "b1dgmsw";
  int k_max = 6, k_L = 256, k_threads = 1;
  double k_threshold = 0.1;
  std::uint64_t k_seed = 0;
  OutputOptions k_out;
  clus->add_option("data", k_data, "dataset: CSV path or inline source object");
  auto* k_kmax_o = clus->add_option("--k-max", k_max, "largest candidate cluster count")
                       ->capture_default_str();
  auto* k_met_o = clus->add_option("-m,--metric", k_metric, "b1dgmsw|bgmsw|bw-exact")
                      ->capture_default_str();
  auto* k_L_o = clus->add_option("-L,--projections", k_L, "projection count")->capture_default_str();
  auto* k_seed_o = clus->add_option("--seed", k_seed, "RNG seed")->capture_default_str();
  auto* k_thr_o = clus->add_option("--threads", k_threads, "worker threads")->capture_default_str();
  auto* k_th_o = clus->add_option("--threshold", k_threshold,
                                  "drop fraction of the largest consecutive distance")
                     ->capture_default_str();
  clus->add_option("-c,--config", config_path, "JSON config file (flags override its keys)");
  add_output_options(clus, k_out);

  // ---- ray-check ----
  auto* rayc = app.add_subcommand("ray-check",
                                  "test whether a pair of measures spans a geodesic ray");
  std::string r_ray;
  OutputOptions r_out;
  rayc->add_option("ray", r_ray, "ray JSON (inline or a file path)");
  rayc->add_option("-c,--config", config_path, "JSON config file with a 'ray' key");
  add_output_options(rayc, r_out, /*csv_capable=*/false);

  // ---- busemann ----
  auto* buse = app.add_subcommand("busemann", "horofunction value of a target along a ray");
  std::string b_ray, b_target;
  OutputOptions b_out;
  buse->add_option("--ray", b_ray, "ray JSON (inline or a file path)");
  buse->add_option("--target", b_target, "target JSON (inline or a file path)");
  buse->add_option("-c,--config", config_path, "JSON config file with 'ray' and 'target'");
  add_output_options(buse, b_out, /*csv_capable=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg = config_path.empty() ? json::object() : load_json_file(config_path);

    if (dist->parsed()) {
      overlay(cfg, d_metric_o, "metric", d_metric);
      const std::string metric = cfg.value("metric", d_metric);
      if (!d_a.empty()) cfg["a"] = source_from_arg(d_a, is_mixture_metric(metric));
      if (!d_b.empty()) cfg["b"] = source_from_arg(d_b, is_mixture_metric(metric));
      overlay(cfg, d_L_o, "L", d_L);
      overlay(cfg, d_seed_o, "seed", d_seed);
      overlay(cfg, d_thr_o, "threads", d_threads);
      overlay(cfg, d_dred_o, "d_reduced", d_dred);
      overlay(cfg, d_mom_o, "moments", d_moments);
      overlay(cfg, d_lmax_o, "lambda_max", d_lmax);
      overlay(cfg, d_cap_o, "lp_cap", d_lpcap);
      return deliver("dist", horo_dist, cfg, d_out);
    }
    if (corr->parsed()) {
      overlay(cfg, c_data_o, "dataset", c_dataset);
      if (c_cls_o->count() || c_per_o->count() || c_dim_o->count() || c_sep_o->count()) {
        json g = cfg.value("generator", json::object());
        overlay(g, c_cls_o, "classes", c_classes);
        overlay(g, c_per_o, "per_class", c_per);
        overlay(g, c_dim_o, "dim", c_dim);
        overlay(g, c_sep_o, "separation", c_sep);
        cfg["generator"] = g;
      }
      overlay(cfg, c_met_o, "metrics", c_metrics);
      overlay(cfg, c_prj_o, "proj_counts", c_projs);
      overlay(cfg, c_pairs_o, "pairs", c_pairs);
      overlay(cfg, c_smin_o, "sub_min", c_submin);
      overlay(cfg, c_smax_o, "sub_max", c_submax);
      overlay(cfg, c_bs_o, "boot_sets", c_bsets);
      overlay(cfg, c_bn_o, "boot_size", c_bsize);
      overlay(cfg, c_seed_o, "seed", c_seed);
      overlay(cfg, c_thr_o, "threads", c_threads);
      overlay(cfg, c_cap_o, "lp_cap", c_lpcap);
      return deliver("correlate", horo_correlate, cfg, c_out);
    }
    if (flow->parsed()) {
      if (!f_source.empty()) cfg["source"] = source_from_arg(f_source, false);
      if (!f_target.empty()) cfg["target"] = source_from_arg(f_target, false);
      overlay(cfg, f_met_o, "metric", f_metric);
      overlay(cfg, f_step_o, "step", f_step);
      overlay(cfg, f_mom_o, "momentum", f_momentum);
      overlay(cfg, f_it_o, "iterations", f_iters);
      overlay(cfg, f_L_o, "projections", f_L);
      overlay(cfg, f_seed_o, "seed", f_seed);
      overlay(cfg, f_thr_o, "threads", f_threads);
      overlay(cfg, f_dred_o, "d_reduced", f_dred);
      overlay(cfg, f_fm_o, "moments", f_moments);
      overlay(cfg, f_lm_o, "lambda_max", f_lmax);
      overlay(cfg, f_tb_o, "target_batch", f_batch);
      overlay(cfg, f_ev_o, "eval_every", f_eval);
      overlay(cfg, f_sn_o, "snapshot_every", f_snap);
      overlay(cfg, f_od_o, "out_dir", f_outdir);
      overlay(cfg, f_tj_o, "trajectory_csv", f_traj);
      if (f_nowow) cfg["final_wow"] = false;
      if (f_records) cfg["include_records"] = true;
      return deliver("flow", horo_flow, cfg, f_out);
    }
    if (clus->parsed()) {
      if (!k_data.empty()) cfg["data"] = source_from_arg(k_data, false);
      overlay(cfg, k_kmax_o, "k_max", k_max);
      overlay(cfg, k_met_o, "metric", k_metric);
      overlay(cfg, k_L_o, "L", k_L);
      overlay(cfg, k_seed_o, "seed", k_seed);
      overlay(cfg, k_thr_o, "threads", k_threads);
      overlay(cfg, k_th_o, "threshold", k_threshold);
      return deliver("clusters", horo_clusters, cfg, k_out);
    }
    if (rayc->parsed()) {
      if (!r_ray.empty()) cfg["ray"] = json_or_file(r_ray);
      return deliver("ray-check", horo_ray_check, cfg, r_out);
    }
    if (buse->parsed()) {
      if (!b_ray.empty()) cfg["ray"] = json_or_file(b_ray);
      if (!b_target.empty()) cfg["target"] = json_or_file(b_target);
      return deliver("busemann", horo_busemann, cfg, b_out);
    }
  } catch (const json::exception& e) {
    std::cerr << "horo: bad JSON: " << e.what() << "\n";
    return HORO_ERR_INPUT;
  } catch (const std::exception& e) {
    std::cerr << "horo: " << e.what() << "\n";
    return HORO_ERR_INPUT;
  }
  return 0;
}
