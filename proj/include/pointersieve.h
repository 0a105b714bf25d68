#ifndef POINTERSIEVE_H
#define POINTERSIEVE_H

/* C interface to the pointer-sieve toolkit. Everything runs through an
 * opaque config handle: build one (defaults or JSON), override fields,
 * run the experiment it names. Functions return PS_OK or an error code;
 * ps_last_error() holds the matching message for the calling thread. */

#include <stdint.h>

#ifndef PS_API
#define PS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ps_status {
  PS_OK = 0,
  PS_INVALID_ARGUMENT = 1,
  PS_DIMENSION = 2,
  PS_STATE_INVALID = 3,
  PS_TRUNCATION = 4,
  PS_STEP_SIZE = 5,
  PS_LEAKAGE = 6,
  PS_NUMERIC = 7,
  PS_CONFIG = 8,
  PS_VALIDATION_FAILED = 9,
  PS_INTERNAL = 10
} ps_status;

typedef struct ps_config ps_config;

PS_API const char* ps_version(void);

/* Message for the most recent failure on this thread; empty, never NULL. */
PS_API const char* ps_last_error(void);

/* experiment: fig1, fig2, fig3, sieve, trajectory or validate. */
PS_API ps_status ps_config_default(const char* experiment, ps_config** out);
PS_API ps_status ps_config_parse(const char* json_text, ps_config** out);
PS_API ps_status ps_config_to_json(const ps_config* cfg, char** json_out);
PS_API const char* ps_config_experiment(const ps_config* cfg);
PS_API void ps_config_free(ps_config* cfg);

/* Field setters, used for command-line overrides. Range checks happen when
 * the config is run, not here; only NULL handles are rejected early. */
PS_API ps_status ps_config_set_experiment(ps_config* cfg, const char* name);
PS_API ps_status ps_config_set_seed(ps_config* cfg, uint64_t seed);
PS_API ps_status ps_config_set_n_traj(ps_config* cfg, long long n_traj);
PS_API ps_status ps_config_set_dt(ps_config* cfg, double dt);
PS_API ps_status ps_config_set_eta(ps_config* cfg, double eta);
PS_API ps_status ps_config_set_r(ps_config* cfg, double R);
PS_API ps_status ps_config_set_phi(ps_config* cfg, double phi);
PS_API ps_status ps_config_set_omega(ps_config* cfg, double omega);
PS_API ps_status ps_config_set_threads(ps_config* cfg, int threads);
PS_API ps_status ps_config_set_grid(ps_config* cfg, int grid);
PS_API ps_status ps_config_set_quick(ps_config* cfg, int quick);
PS_API ps_status ps_config_set_out(ps_config* cfg, const char* path);

/* Runs the experiment the config names. On success *csv_out (when not NULL)
 * receives the primary CSV table, to be released with ps_string_free. When
 * the config carries an output path the table is also written there; fig3
 * writes the flip-rate table to a second file with an _flips suffix. */
PS_API ps_status ps_run(const ps_config* cfg, char** csv_out);

/* Acceptance battery (quick = fast deterministic subset). *report_out (when
 * not NULL) receives the report text whenever the battery completes, which
 * includes the PS_VALIDATION_FAILED verdict; *all_passed (when not NULL)
 * gets 1 or 0. threads <= 0 means one. */
PS_API ps_status ps_validate(uint64_t seed, int quick, int threads,
                             char** report_out, int* all_passed);

PS_API void ps_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* POINTERSIEVE_H */
