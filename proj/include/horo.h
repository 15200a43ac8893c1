#ifndef HORO_H
#define HORO_H

/*
 * C interface to the horo library. Every command takes a JSON configuration
 * string and hands back a freshly allocated JSON report string through
 * out_json; release it with horo_string_free. Return value is a status code:
 *
 *   0  success
 *   2  invalid input (bad JSON, unknown metric, malformed measure, ...)
 *   3  a configured resource cap was exceeded (e.g. exact-LP size)
 *
 * On failure *out_json is set to NULL and horo_last_error() describes the
 * problem for the calling thread.
 *
 * Dataset sources inside configs are objects of one of the forms
 *   {"csv": "path"}                                  load a dataset CSV
 *   {"blobs": {"classes":5,"per_class":600,"dim":10,
 *              "separation":3.0,"seed":0}}           synthetic Gaussian blobs
 *   {"rings": {"per_class":80,"radii":[1,2,3],
 *              "seed":0,"mode":"evenly"}}            concentric class rings
 *   {"mixture": "path"}                              Gaussian-mixture JSON
 * Mixture sources are only valid for the mixture metrics.
 */

#ifdef __cplusplus
extern "C" {
#endif

enum {
  HORO_OK = 0,
  HORO_ERR_INPUT = 2,
  HORO_ERR_CAPACITY = 3
};

/* Semantic version of the library. Static storage; do not free. */
const char* horo_version(void);

/* Message for the most recent failure on the calling thread (empty when the
 * last call succeeded). Static storage; do not free. */
const char* horo_last_error(void);

/* Release a string returned through an out_json parameter. NULL is fine. */
void horo_string_free(char* s);

/* ---- datasets as opaque handles ---- */

typedef struct horo_dataset horo_dataset;

int horo_dataset_load_csv(const char* path, horo_dataset** out);
int horo_dataset_blobs(int classes, int per_class, int dim, double separation,
                       unsigned long long seed, horo_dataset** out);
/* {"rows":..,"dim":..,"classes":..,"class_sizes":[..]} */
int horo_dataset_info(const horo_dataset* d, char** out_json);
void horo_dataset_free(horo_dataset* d);

/* Distance between two dataset handles. options_json:
 *   {"metric":"swb1dg","L":500,"seed":0,"threads":1,
 *    "d_reduced":10,"moments":5,"lambda_max":8,"lp_cap":4000000}
 * metric is one of "sw", "swb1dg", "swbg", "sotdd", "otdd-exact".
 * Report: {"metric","value","std_error","L","seed","wall_time_ms",
 *          "reproducibility":{"seed","version","config_hash"}}. */
int horo_dist_datasets(const horo_dataset* a, const horo_dataset* b,
                       const char* options_json, char** out_json);

/* ---- JSON-config commands (the CLI subcommands) ---- */

/* {"metric":..., "a": <source>, "b": <source>, ...options as above}.
 * Dataset metrics: sw, swb1dg, swbg, sotdd, otdd-exact.
 * Mixture metrics: b1dgmsw, bgmsw, bw-exact. */
int horo_dist(const char* config_json, char** out_json);

/* {"dataset": "path"} or {"generator": {...blobs...}}, plus
 * "metrics":["swb1dg",...], "proj_counts":[500], "pairs":40,
 * "sub_min":80, "sub_max":100, "boot_sets":10, "boot_size":50,
 * "seed":0, "threads":1, "lp_cap":4000000. */
int horo_correlate(const char* config_json, char** out_json);

/* {"source": <source>, "target": <source>, "metric":"swbg", "step":1.0,
 * "momentum":0.9, "iterations":1000, "projections":64, "seed":0,
 * "threads":1, "d_reduced":10, "moments":5, "lambda_max":8,
 * "target_batch":0, "eval_every":0, "snapshot_every":0, "out_dir":"",
 * "trajectory_csv":"", "final_wow":true, "include_records":false}. */
int horo_flow(const char* config_json, char** out_json);

/* {"data": <source>, "k_max":6, "metric":"b1dgmsw", "L":256, "seed":0,
 * "threads":1, "threshold":0.1}. Labels of the data source are ignored;
 * metric is "b1dgmsw", "bgmsw", or "bw-exact". */
int horo_clusters(const char* config_json, char** out_json);

/* {"ray": {"type":"gaussian1d","m0":..,"s0":..,"m1":..,"s1":..}} and the
 * other ray types "empirical1d" (values0/weights0/values1/weights1),
 * "dirac1d" (m1,s1), "bw" (m0,cov0,m1,cov1). Reports whether the pair spans
 * a geodesic ray, with speed and extension interval when it does; an
 * unbounded interval endpoint is reported as null. */
int horo_ray_check(const char* config_json, char** out_json);

/* {"ray": <ray as above, must validate>, "target": one of
 *   {"samples":[...]} | {"samples":[...],"weights":[...]}
 *   {"gaussian1d":{"m":..,"s":..}}
 *   {"gaussian":{"mean":[...],"cov":[[...]]}}}
 * Reports the speed-normalized horofunction value, and the ray-projection
 * parameter when the ray/target combination supports it. */
int horo_busemann(const char* config_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* HORO_H */
