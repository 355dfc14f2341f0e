/* Glider navigation toolkit: C interface.
 *
 * Every function returning gn_status leaves a message retrievable with
 * gn_last_error() on failure (per thread). Strings handed out through
 * char** parameters are owned by the caller and released with
 * gn_string_free(). Handles are opaque and released with their *_free
 * function; passing NULL to a free function is a no-op.
 */
#ifndef GLIDERNAV_H
#define GLIDERNAV_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(GLIDERNAV_BUILDING)
#    define GN_API __declspec(dllexport)
#  else
#    define GN_API __declspec(dllimport)
#  endif
#else
#  define GN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gn_status {
  GN_OK = 0,
  GN_ERR_INVALID = 1,  /* bad argument (NULL handle, ...) */
  GN_ERR_CONFIG = 2,   /* gn_last_error_key() names the field */
  GN_ERR_CONNECT = 3,  /* dockserver unreachable or connection lost */
  GN_ERR_BLOCKED = 4,  /* planner found no path */
  GN_ERR_AUTH = 5,     /* dockserver rejected the token */
  GN_ERR_PARSE = 6,
  GN_ERR_RANGE = 7,
  GN_ERR_DOMAIN = 8,   /* flow queried outside its domain */
  GN_ERR_IO = 9,
  GN_ERR_INTERNAL = 10
} gn_status;

GN_API const char* gn_version(void);
GN_API const char* gn_last_error(void);
/* Offending config key of the last GN_ERR_CONFIG, or "". */
GN_API const char* gn_last_error_key(void);
GN_API void gn_string_free(char* s);

/* ---- positions */

/* "3118.0N, -8008.0E": NMEA DDMM.M tokens with hemisphere letters. */
GN_API gn_status gn_parse_latlon(const char* text, double* lat, double* lon);
GN_API gn_status gn_format_latlon(double lat, double lon, char** out);

/* ---- configuration */

typedef struct gn_config gn_config;

GN_API gn_status gn_config_load(const char* path, gn_config** out);
/* base_dir anchors relative paths; NULL means the working directory. */
GN_API gn_status gn_config_parse(const char* text, const char* base_dir, gn_config** out);
GN_API void gn_config_free(gn_config* cfg);
GN_API const char* gn_config_output_dir(const gn_config* cfg);
GN_API const char* gn_config_hash(const gn_config* cfg);

/* ---- simulated missions */

typedef enum gn_sim_status {
  GN_SIM_ARRIVED = 0,
  GN_SIM_DURATION_ELAPSED = 1,
  GN_SIM_TRANSITS_DONE = 2,
  GN_SIM_DOMAIN_EXIT = 3
} gn_sim_status;

typedef struct gn_sim_summary {
  gn_sim_status status;
  size_t dives;
  int transits;
  double final_distance_m;
  double elapsed_s;
} gn_sim_summary;

/* Runs the closed loop. out_dir may be NULL (no files); report_json may be NULL. */
GN_API gn_status gn_run_sim(const gn_config* cfg, const char* out_dir, gn_sim_summary* summary,
                            char** report_json);

/* ---- remote missions */

typedef struct gn_remote gn_remote;
typedef void (*gn_log_fn)(const char* message, void* user);

/* Real-time pilot loop against the configured dockserver. Resumes from the
 * configured checkpoint when present. */
GN_API gn_status gn_remote_create(const gn_config* cfg, gn_remote** out);
/* Alerts and per-event notices. */
GN_API void gn_remote_set_log(gn_remote* r, gn_log_fn fn, void* user);
GN_API gn_status gn_remote_poll_once(gn_remote* r);
/* Blocks until gn_remote_stop(); returns GN_ERR_AUTH on a rejected token. */
GN_API gn_status gn_remote_run(gn_remote* r);
/* Safe to call from another thread or a signal handler. */
GN_API void gn_remote_stop(gn_remote* r);
GN_API long long gn_remote_processed_events(const gn_remote* r);
GN_API int gn_remote_resumed(const gn_remote* r);
GN_API void gn_remote_free(gn_remote* r);

/* ---- planning and analysis */

/* Writes `lat,lon,cumulative_time` CSV. GN_ERR_BLOCKED when no path exists. */
GN_API gn_status gn_plan(const gn_config* cfg, double start_lat, double start_lon, double goal_lat,
                         double goal_lon, char** csv, double* total_time_s);

/* Comparison of the SURF records in events_path against the configured model.
 * alerts receives one line per strong-flow alert:
 * "<t> <glider_speed> <fused_speed> <model_speed>". Any output may be NULL. */
GN_API gn_status gn_flowcmp(const gn_config* cfg, const char* events_path, char** csv, char** svg,
                            char** alerts, size_t* n_alerts);

/* ---- flow fields */

typedef struct gn_flow gn_flow;

/* "uniform <u> <v>", "tide <A> <T> <phase>", "gyre <lat> <lon> <omega> <r_max>", "file <path>". */
GN_API gn_status gn_flow_create(const char* spec, gn_flow** out);
GN_API void gn_flow_free(gn_flow* f);
GN_API gn_status gn_flow_sample(const gn_flow* f, double lat, double lon, double t, double* u, double* v);
GN_API gn_status gn_flow_write_grid(const gn_flow* f, double lat0, double lon0, double dlat, double dlon,
                                    size_t ny, size_t nx, double t0, double dt, size_t nt, const char* path);

/* ---- mock dockserver */

typedef struct gn_mock_server gn_mock_server;

/* endpoint "host:port"; port 0 picks a free one. */
GN_API gn_status gn_mock_server_start(const char* root, const char* endpoint, const char* token, int latency_ms,
                                      gn_mock_server** out);
GN_API int gn_mock_server_port(const gn_mock_server* s);
GN_API void gn_mock_server_stop(gn_mock_server* s);

#ifdef __cplusplus
}
#endif

#endif /* GLIDERNAV_H */
