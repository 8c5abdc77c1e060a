#ifndef UAVRELAY_H
#define UAVRELAY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define UAVR_API __declspec(dllexport)
#elif defined(__GNUC__)
#define UAVR_API __attribute__((visibility("default")))
#else
#define UAVR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uavr_status {
    UAVR_OK = 0,
    UAVR_E_PARSE = 1,
    UAVR_E_VALIDATION = 2,
    UAVR_E_INVALID_ARGUMENT = 3,
    UAVR_E_IO = 4,
    UAVR_E_INTERNAL = 5
} uavr_status;

typedef enum uavr_algorithm {
    UAVR_ALG_JMSTP = 0,
    UAVR_ALG_RANDOM = 1,
    UAVR_ALG_CELLULAR = 2
} uavr_algorithm;

typedef struct uavr_scenario uavr_scenario;
typedef struct uavr_episode uavr_episode;

typedef struct uavr_episode_metrics {
    double sum_rate;
    double jain;        /* NaN when every rate is zero */
    double avg_speed;
    double scheduled_ues;
    double relay_ues;
    size_t n_slots;
} uavr_episode_metrics;

typedef struct uavr_ici_ratios {
    double cellular_db;
    double relay_db;
} uavr_ici_ratios;

/* Message of the most recent failure on the calling thread, "" if none. */
UAVR_API const char* uavr_last_error(void);

/* Strings returned by the library are released with this. */
UAVR_API void uavr_string_free(char* s);

UAVR_API uavr_status uavr_scenario_from_json(const char* json, uavr_scenario** out);
UAVR_API uavr_status uavr_scenario_from_file(const char* path, uavr_scenario** out);
UAVR_API void uavr_scenario_free(uavr_scenario* s);
UAVR_API uavr_status uavr_scenario_to_json(const uavr_scenario* s, char** out);

/* Checks a config. On UAVR_E_VALIDATION or UAVR_E_PARSE, *report (if non-null)
   receives one violation per line. */
UAVR_API uavr_status uavr_validate_json(const char* json, char** report);

UAVR_API uavr_status uavr_run_episode(const uavr_scenario* s, uavr_algorithm alg, uavr_episode** out);
UAVR_API void uavr_episode_free(uavr_episode* e);
UAVR_API uavr_status uavr_episode_metrics_get(const uavr_episode* e, uavr_episode_metrics* out);
UAVR_API uavr_status uavr_episode_csv(const uavr_episode* e, char** out);
UAVR_API uavr_status uavr_episode_summary_json(const uavr_episode* e, char** out);
/* Number of constraint violations over all slots; messages go to *report if non-null. */
UAVR_API uavr_status uavr_episode_audit(const uavr_episode* e, size_t* violations, char** report);

/* Sweeps one axis (p_ue_max, d_max, p_uav_max, e_max) for every algorithm in
   algs. threads = 0 picks the hardware concurrency. *csv receives the table. */
UAVR_API uavr_status uavr_sweep(const char* config_json, const char* axis, const double* values, size_t n_values,
                                size_t seeds, const uavr_algorithm* algs, size_t n_algs, size_t threads, char** csv);

/* Reference ICI ratios under the documented occupancy assumption. */
UAVR_API uavr_status uavr_ici_check(uavr_ici_ratios* out);
/* Human-readable sensitivity table over occupancy assumptions. */
UAVR_API uavr_status uavr_ici_report(char** out);

#ifdef __cplusplus
}
#endif

#endif
