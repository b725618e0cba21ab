#ifndef PHOTONPRESS_H
#define PHOTONPRESS_H

#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum PpStatus {
  PP_STATUS_OK = 0,
  PP_STATUS_NULL_POINTER = 1,
  PP_STATUS_INVALID_ARGUMENT = 2,
  PP_STATUS_DIMENSION = 3,
  PP_STATUS_IO = 4,
  PP_STATUS_PARSE = 5,
  PP_STATUS_INVALID_TEMPLATE = 6,
  PP_STATUS_PROXY_MISMATCH = 7,
  PP_STATUS_NON_FINITE = 8,
  PP_STATUS_BELOW_SURFACE = 9,
  PP_STATUS_NOT_DIFFERENTIABLE = 10,
  PP_STATUS_OTHER = 11,
  PP_STATUS_PANIC = 12,
} PpStatus;

/**
 * Trained force and torque proxy.
 */
typedef struct PpProxy PpProxy;

/**
 * Loaded optimization scenario.
 */
typedef struct PpScenario PpScenario;

/**
 * Parametric spacecraft design.
 */
typedef struct PpTemplate PpTemplate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *pp_version(void);

/**
 * Copy the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL,
 * or 0 when the last call succeeded.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t pp_last_error_message(char *buf, size_t len);

/**
 * Built-in template by name (`box-wing`, `shape-family`, `reflectance-cube`,
 * `absorber-plate`, `cube`, `mirror-plate`).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum PpStatus pp_template_library(const char *name, struct PpTemplate **out);

/**
 * Template from a JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PpStatus pp_template_load(const char *path, struct PpTemplate **out);

/**
 * Number of design parameters; 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live template handle.
 */
size_t pp_template_n_params(const struct PpTemplate *t);

/**
 * Lower and upper bound of every design parameter, interleaved
 * (`lo0, hi0, lo1, hi1, ...`); `len` must be twice the parameter count.
 *
 * # Safety
 * `t` must be a live template handle; `out` must hold `len` doubles.
 */
enum PpStatus pp_template_bounds(const struct PpTemplate *t, double *out, size_t len);

/**
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void pp_template_free(struct PpTemplate *t);

/**
 * Monte-Carlo force [N] and torque [N m] on the design `theta` lit from
 * body-frame direction `omega` (pointing towards the sun) at `irradiance`
 * W/m². Deterministic for a given `seed`.
 *
 * # Safety
 * `t` must be a live handle; `theta` must hold `n_theta` doubles; `omega`,
 * `force` and `torque` must each hold 3 doubles.
 */
enum PpStatus pp_estimate_force_torque(const struct PpTemplate *t,
                                       const double *theta,
                                       size_t n_theta,
                                       const double *omega,
                                       double irradiance,
                                       size_t samples,
                                       uint64_t seed,
                                       double *force,
                                       double *torque);

/**
 * Proxy weights from a JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PpStatus pp_proxy_load(const char *path, struct PpProxy **out);

/**
 * Fails with `ProxyMismatch` unless the proxy was trained on `t`.
 *
 * # Safety
 * Both handles must be live.
 */
enum PpStatus pp_proxy_check_template(const struct PpProxy *p, const struct PpTemplate *t);

/**
 * # Safety
 * `p` must be null or a live proxy handle.
 */
size_t pp_proxy_n_params(const struct PpProxy *p);

/**
 * Predicted body-frame force and torque at the proxy's reference irradiance.
 *
 * # Safety
 * `p` must be live; `omega`, `force`, `torque` hold 3 doubles each and
 * `theta` holds `n_theta`.
 */
enum PpStatus pp_proxy_evaluate(const struct PpProxy *p,
                                const double *omega,
                                const double *theta,
                                size_t n_theta,
                                double *force,
                                double *torque);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void pp_proxy_free(struct PpProxy *p);

/**
 * Scenario JSON; relative references resolve against the file's directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PpStatus pp_scenario_load(const char *path, struct PpScenario **out);

/**
 * Number of free parameters.
 *
 * # Safety
 * `s` must be null or a live scenario handle.
 */
size_t pp_scenario_n_params(const struct PpScenario *s);

/**
 * The scenario's starting parameters.
 *
 * # Safety
 * `s` must be live; `x` must hold `n` doubles.
 */
enum PpStatus pp_scenario_initial(const struct PpScenario *s, double *x, size_t n);

/**
 * Total loss over all cases at parameters `x`.
 *
 * # Safety
 * `s` must be live; `x` must hold `n` doubles; `loss` must be writable.
 */
enum PpStatus pp_scenario_loss(const struct PpScenario *s, const double *x, size_t n, double *loss);

/**
 * Loss and its adjoint gradient with respect to `x`.
 *
 * # Safety
 * `s` must be live; `x` and `grad` must hold `n` doubles; `loss` must be writable.
 */
enum PpStatus pp_scenario_gradient(const struct PpScenario *s,
                                   const double *x,
                                   size_t n,
                                   double *loss,
                                   double *grad);

/**
 * Run the scenario's optimizer; writes the best parameters and loss.
 *
 * # Safety
 * `s` must be live; `x_best` must hold `n` doubles; `loss` must be writable.
 */
enum PpStatus pp_scenario_optimize(const struct PpScenario *s,
                                   double *x_best,
                                   size_t n,
                                   double *loss);

/**
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void pp_scenario_free(struct PpScenario *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOTONPRESS_H */
