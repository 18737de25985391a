#ifndef LOOKBACK_LOOKBACK_H
#define LOOKBACK_LOOKBACK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LBK_API __declspec(dllexport)
#else
#define LBK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Return codes. CONFIG and NUMERIC match the CLI exit codes. */
typedef enum lbk_status {
    LBK_OK = 0,
    LBK_ERR_ARGUMENT = 1,
    LBK_ERR_CONFIG = 2,
    LBK_ERR_NUMERIC = 3,
    LBK_ERR_IO = 4,
    LBK_ERR_INTERNAL = 5
} lbk_status;

typedef struct lbk_config lbk_config;

/* Message for the last failing call on this thread; never NULL. */
LBK_API const char* lbk_last_error(void);

LBK_API int lbk_config_load(const char* path, lbk_config** out);
LBK_API int lbk_config_parse(const char* text, lbk_config** out);
LBK_API void lbk_config_free(lbk_config* cfg);

LBK_API int lbk_config_set_seed(lbk_config* cfg, uint64_t seed);
LBK_API int lbk_config_set_paths(lbk_config* cfg, uint64_t paths);
LBK_API int lbk_config_set_inner(lbk_config* cfg, uint64_t inner);
LBK_API int lbk_config_set_workers(lbk_config* cfg, unsigned workers);
LBK_API int lbk_config_set_steps(lbk_config* cfg, uint64_t n_steps);
/* "gaver" | "talbot" */
LBK_API int lbk_config_set_method(lbk_config* cfg, const char* method);
/* "closed" | "nested" | "both" */
LBK_API int lbk_config_set_mode(lbk_config* cfg, const char* mode);
/* "theorem" | "raw" */
LBK_API int lbk_config_set_sign(lbk_config* cfg, const char* sign);
LBK_API int lbk_config_set_clamp(lbk_config* cfg, int clamp);
/* "bridge" | "discrete" */
LBK_API int lbk_config_set_monitoring(lbk_config* cfg, const char* monitoring);
/* payoff: "fixed" | "floating"; a NaN strike keeps the configured one. */
LBK_API int lbk_config_set_payoff(lbk_config* cfg, const char* payoff, double strike);
LBK_API int lbk_config_set_discount_rate(lbk_config* cfg, double rate);

/* 16 hex digits plus terminator. */
LBK_API int lbk_config_hash(const lbk_config* cfg, char out[17]);
/* Canonical JSON echo; writes at most cap bytes including the terminator and
   stores the full length in *needed. */
LBK_API int lbk_config_echo(const lbk_config* cfg, char* buf, size_t cap, size_t* needed);
/* Number of validation warnings; each is retrievable by index. */
LBK_API int lbk_config_warnings(const lbk_config* cfg, size_t* count);
LBK_API const char* lbk_config_warning(const lbk_config* cfg, size_t index);

typedef struct lbk_constants {
    double alpha1;
    double alpha2;
    double alpha3;
    double alpha;
    double identity_residual;
    int model; /* 0 cox, 1 hawkes */
} lbk_constants;

LBK_API int lbk_constants_compute(const lbk_config* cfg, lbk_constants* out);

/* fn: "one_over_s" | "one_over_s_plus_1" | "one_over_s2" */
LBK_API int lbk_invert_laplace(const char* fn, double t, const char* method, int order, double* out);

typedef struct lbk_simulate_summary {
    double max_value;
    double final_x;
    double final_lambda;
    uint64_t events;
} lbk_simulate_summary;

/* Writes path.csv and events.csv for outer path `path_id`. */
LBK_API int lbk_simulate(const lbk_config* cfg, const char* out_dir, uint64_t path_id, lbk_simulate_summary* out);

typedef struct lbk_price_result {
    double price;
    double se;
    double rate;
    uint64_t n_paths;
} lbk_price_result;

LBK_API int lbk_price(const lbk_config* cfg, lbk_price_result* out);

typedef struct lbk_co_summary {
    double ef_hat;
    double ef_se;
    double resid_mean;
    double resid_se;
    double resid_var;
    double resid_var_alt;
    double corr;
    double psi_discrepancy;
    uint64_t n_paths;
} lbk_co_summary;

/* Writes clark_ocone.csv and clark_ocone_summary.json. */
LBK_API int lbk_verify_clark_ocone(const lbk_config* cfg, const char* out_dir, lbk_co_summary* out);

/* Writes first_passage.csv over the configured threshold grid. */
LBK_API int lbk_first_passage(const lbk_config* cfg, const char* out_dir, uint64_t* rows);

/* Writes hedge.csv along outer path `path_id`. */
LBK_API int lbk_hedge(const lbk_config* cfg, const char* out_dir, uint64_t path_id, uint64_t* rows);

#ifdef __cplusplus
}
#endif

#endif
