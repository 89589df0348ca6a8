#ifndef WFSCHED_H
#define WFSCHED_H

/* C interface to the wfsched scheduling library.
 *
 * Objects are opaque handles released with the matching *_free call.
 * Every function returning wfs_status leaves a message retrievable with
 * wfs_last_error() on failure (per thread). Strings handed out by the
 * library are owned by the caller and released with wfs_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(WFS_BUILDING_LIBRARY)
#    define WFS_API __declspec(dllexport)
#  else
#    define WFS_API __declspec(dllimport)
#  endif
#else
#  define WFS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wfs_status {
  WFS_OK = 0,
  WFS_ERR_INVALID_ARGUMENT = 1,
  WFS_ERR_PARSE = 2,       /* malformed JSON / XML or schema violation */
  WFS_ERR_WORKFLOW = 3,    /* cycle, dangling edge, duplicate id, ... */
  WFS_ERR_PLATFORM = 4,
  WFS_ERR_INTERNAL = 5
} wfs_status;

typedef struct wfs_workflow wfs_workflow;
typedef struct wfs_platform wfs_platform;
typedef struct wfs_schedule wfs_schedule;

WFS_API const char* wfs_version(void);
WFS_API const char* wfs_last_error(void);
WFS_API void wfs_string_free(char* s);

/* ---- platform ---------------------------------------------------------- */

WFS_API wfs_status wfs_platform_from_json(const char* json, wfs_platform** out);
WFS_API wfs_status wfs_platform_to_json(const wfs_platform* p, char** out);
WFS_API wfs_status wfs_platform_generate(uint64_t seed, wfs_platform** out);
WFS_API void wfs_platform_free(wfs_platform* p);

/* ---- workflow ---------------------------------------------------------- */

WFS_API wfs_status wfs_workflow_from_json(const char* json, wfs_workflow** out);
/* Pegasus DAX; runtimes in seconds are converted with reference_mips. */
WFS_API wfs_status wfs_workflow_from_dax(const char* xml, const wfs_platform* p, const char* name,
                                         double deadline_factor, double reliability, double reference_mips,
                                         wfs_workflow** out);
/* Layered random DAG. */
WFS_API wfs_status wfs_workflow_generate(uint64_t seed, const wfs_platform* p, size_t tasks, size_t layers,
                                         double edge_probability, size_t max_fanout, double deadline_factor,
                                         double reliability, wfs_workflow** out);
WFS_API wfs_status wfs_workflow_to_json(const wfs_workflow* w, char** out);
WFS_API wfs_status wfs_workflow_set_deadline_factor(wfs_workflow* w, const wfs_platform* p, double df);
WFS_API wfs_status wfs_workflow_remove_deadline(wfs_workflow* w, const wfs_platform* p);
WFS_API wfs_status wfs_workflow_set_reliability(wfs_workflow* w, double reliability);
WFS_API size_t wfs_workflow_size(const wfs_workflow* w);
WFS_API void wfs_workflow_free(wfs_workflow* w);

/* ---- static scheduling ------------------------------------------------- */

typedef struct wfs_schedule_summary {
  double energy;
  double reliability;
  double makespan;
  int feasible;
  char algorithm[8];  /* as requested */
  char resolved[8];   /* lef / ldd after asmfr dispatch */
  char reason[64];    /* empty when feasible */
} wfs_schedule_summary;

/* algorithm: "bcp", "lef", "ldd" or "asmfr". A rejected workflow is not an
 * error: the call succeeds and the summary reports feasible = 0. */
WFS_API wfs_status wfs_schedule_run(const wfs_workflow* w, const wfs_platform* p, const char* algorithm,
                                    double threshold, wfs_schedule** out);
WFS_API wfs_status wfs_schedule_summary_get(const wfs_schedule* s, wfs_schedule_summary* out);
WFS_API wfs_status wfs_schedule_to_json(const wfs_schedule* s, char** out);
/* Independent constraint check; all_pass receives 1 or 0. */
WFS_API wfs_status wfs_schedule_check(const wfs_schedule* s, int* all_pass, char** report_json);
WFS_API void wfs_schedule_free(wfs_schedule* s);

/* ---- dynamic execution ------------------------------------------------- */

typedef struct wfs_sim_config {
  uint64_t seed;
  double fraction;        /* mean of actual / worst-case time */
  size_t trials;          /* Monte-Carlo trials, 0 to skip */
  int failure_injection;
  int worst_case;         /* every task takes exactly its worst-case time */
  const char* reschedule; /* "none", "lef", "ldd" or "selected" (default) */
  double threshold;
} wfs_sim_config;

WFS_API void wfs_sim_config_init(wfs_sim_config* cfg);

typedef struct wfs_sim_summary {
  double realized_energy;
  double static_energy;
  double makespan;
  int deadline_met;
  int success;
  size_t reschedules;
  size_t accepted_reschedules;
  double reliability_estimate; /* Monte-Carlo; only when trials > 0 */
  double reliability_lower;
  double reliability_upper;
} wfs_sim_summary;

/* Runs the rolling-horizon engine from a feasible schedule. trace_jsonl
 * may be NULL. */
WFS_API wfs_status wfs_simulate(const wfs_schedule* s, const wfs_sim_config* cfg, wfs_sim_summary* summary,
                                char** trace_jsonl);
WFS_API wfs_status wfs_monte_carlo(const wfs_schedule* s, uint64_t seed, size_t trials, double* estimate,
                                   double* lower, double* upper);

/* One CSV row (optionally preceded by the header) for a single run.
 * algorithm is a static algorithm name or "dy". */
WFS_API wfs_status wfs_report_row(const wfs_workflow* w, const wfs_platform* p, const char* algorithm, uint64_t seed,
                                  size_t trials, double fraction, double threshold, int with_header, char** csv);

/* ---- exact oracle ------------------------------------------------------ */

typedef enum wfs_oracle_status {
  WFS_ORACLE_OPTIMAL = 0,
  WFS_ORACLE_INFEASIBLE = 1,
  WFS_ORACLE_BUDGET_EXCEEDED = 2
} wfs_oracle_status;

/* node_budget = 0 and max_tasks = 0 select the defaults. */
WFS_API wfs_status wfs_oracle_run(const wfs_workflow* w, const wfs_platform* p, uint64_t node_budget,
                                  size_t max_tasks, int prune, wfs_oracle_status* status, double* energy,
                                  char** result_json);

/* ---- sweeps ------------------------------------------------------------ */

/* spec_json keys: workflows (array of workflow documents), platform,
 * algorithms, param ("df", "rw", "tasks", "th"), grid, seeds, trials,
 * fraction, threshold, df, rw, generator, workers, timing. */
WFS_API wfs_status wfs_sweep_run(const char* spec_json, char** csv, char** aggregate_csv);

#ifdef __cplusplus
}
#endif

#endif
