#ifndef NONHOLO_H
#define NONHOLO_H

#include <stdint.h>

#if defined(_WIN32)
#if defined(NONHOLO_BUILDING)
#define NH_API __declspec(dllexport)
#else
#define NH_API __declspec(dllimport)
#endif
#else
#define NH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one; on failure the message and,
   for parse errors, the 1-based source location are kept per thread. */
typedef enum nh_status {
  NH_OK = 0,
  NH_ORDER_UNSUPPORTED = 1,
  NH_EVALUATION_FAILURE,
  NH_DEGENERATE_VBLOCK,
  NH_ZERO_SECTION,
  NH_SINGULAR_HESSIAN,
  NH_SIGNATURE_MISMATCH,
  NH_SINGULAR_METRIC,
  NH_NOT_SASAKI,
  NH_NONPOSITIVE_FACTOR,
  NH_WRONG_SIGNATURE,
  NH_WRONG_DIMENSION,
  NH_ROLE_MISMATCH,
  NH_SYMMETRY_VIOLATION,
  NH_INCOMPATIBLE_BACKGROUND,
  NH_ZERO_PI,
  NH_STEP_FAILURE,
  NH_PARSE_ERROR,
  NH_VALIDATION_ERROR,
  NH_SUITE_INAPPLICABLE,
  NH_IO_ERROR,
  NH_INVALID_ARGUMENT,
  NH_INTERNAL = 99
} nh_status;

typedef struct nh_scenario nh_scenario;
typedef struct nh_report nh_report;

/* One check record; the strings stay valid while the report lives. */
typedef struct nh_check_info {
  const char* id;
  const char* anchor;
  double residual;
  double tol;
  int pass;
  int points;
  double ms;
} nh_check_info;

NH_API const char* nh_version(void);
NH_API const char* nh_status_name(nh_status status);
/* Message of the last failed call on this thread, "" if none. */
NH_API const char* nh_last_error(void);
/* Source location of the last NH_PARSE_ERROR on this thread, 0 otherwise. */
NH_API int nh_last_error_line(void);
NH_API int nh_last_error_column(void);

/* Strings returned through char** out-parameters are owned by the caller. */
NH_API void nh_string_free(char* s);

/* Catalog names separated by '\n'. */
NH_API nh_status nh_catalog_names(char** out);

/* A catalog name first, otherwise a file path. */
NH_API nh_status nh_scenario_load(const char* name_or_path, nh_scenario** out);
NH_API nh_status nh_scenario_parse(const char* json_text, nh_scenario** out);
NH_API void nh_scenario_free(nh_scenario* s);
NH_API const char* nh_scenario_name(const nh_scenario* s);
NH_API int nh_scenario_dim(const nh_scenario* s);

/* suite: frames, connections, conformal, spin, twistor or all. tol_scale
   multiplies every tolerance. Deterministic in (scenario, suite, seed, points)
   apart from timings. */
NH_API nh_status nh_suite_run(const nh_scenario* s, const char* suite, uint64_t seed, int points, double tol_scale,
                              nh_report** out);
/* Jet derivatives of every scenario expression against finite differences. */
NH_API nh_status nh_crosscheck(const nh_scenario* s, uint64_t seed, int points, double tol_scale, nh_report** out);

NH_API void nh_report_free(nh_report* r);
NH_API const char* nh_report_scenario(const nh_report* r);
NH_API int nh_report_check_count(const nh_report* r);
NH_API nh_status nh_report_check(const nh_report* r, int index, nh_check_info* out);
/* 1 when every check passed (also for an empty report), 0 otherwise. */
NH_API int nh_report_all_passed(const nh_report* r);
/* format: "json" or "text". */
NH_API nh_status nh_report_format(const nh_report* r, const char* format, char** out);
/* path "-" writes to stdout. */
NH_API nh_status nh_report_write(const nh_report* r, const char* format, const char* path);
NH_API nh_status nh_report_parse(const char* json_text, nh_report** out);

#ifdef __cplusplus
}
#endif

#endif
