/*
 * coplan — collaboration planning and offloading simulation.
 *
 * C surface over the planning engine: load or parse a scenario, compute
 * allocation plans, run the deterministic simulation, sweep the tradeoff
 * weight, or dispatch the bundled command line. All handles are opaque and
 * owned by the caller through the matching *_close call. Functions that can
 * fail return a coplan_status; on any non-OK status, coplan_last_error()
 * describes the problem for the calling thread.
 */
#ifndef COPLAN_H
#define COPLAN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define COPLAN_API __declspec(dllexport)
#else
#define COPLAN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum coplan_status {
  COPLAN_OK = 0,
  COPLAN_USAGE_ERROR = 2,
  COPLAN_INFEASIBLE = 3,
  COPLAN_CONFIG_ERROR = 4,
  COPLAN_IO_ERROR = 5,
  COPLAN_INTERNAL_ERROR = 6
} coplan_status;

typedef struct coplan_scenario coplan_scenario;
typedef struct coplan_plan coplan_plan;
typedef struct coplan_sim coplan_sim;
typedef struct coplan_sweep coplan_sweep;

/* Library version, e.g. "0.1.0". */
COPLAN_API const char* coplan_version(void);

/* Message for the last failing call on this thread; empty after success. */
COPLAN_API const char* coplan_last_error(void);

/* ---- scenarios ---------------------------------------------------------- */

COPLAN_API coplan_status coplan_scenario_open(const char* path,
                                              coplan_scenario** out);
COPLAN_API coplan_status coplan_scenario_parse(const char* json_text,
                                               coplan_scenario** out);
COPLAN_API void coplan_scenario_close(coplan_scenario* scenario);

COPLAN_API coplan_status coplan_scenario_set_seed(coplan_scenario* scenario,
                                                  uint64_t seed);
/* Pass INFINITY for the time-first mode on divisible tasks. */
COPLAN_API coplan_status coplan_scenario_set_gamma(coplan_scenario* scenario,
                                                   double gamma);
COPLAN_API coplan_status coplan_scenario_set_transfer_augmentation(
    coplan_scenario* scenario, int enabled);
COPLAN_API size_t coplan_scenario_device_count(const coplan_scenario* scenario);

/* ---- allocation plans --------------------------------------------------- */

/* Optimal plan per the scenario's task, gamma and options. Infeasible
 * constraint systems return COPLAN_INFEASIBLE and no handle. */
COPLAN_API coplan_status coplan_plan_compute(const coplan_scenario* scenario,
                                             coplan_plan** out);
/* Naive even-split comparison plan; budget violations are reported on the
 * handle rather than rejected. */
COPLAN_API coplan_status coplan_plan_even_split(const coplan_scenario* scenario,
                                                coplan_plan** out);
COPLAN_API void coplan_plan_close(coplan_plan* plan);

COPLAN_API size_t coplan_plan_device_count(const coplan_plan* plan);
/* Pointers stay valid until the plan handle is closed; NULL on bad index. */
COPLAN_API const char* coplan_plan_device_id(const coplan_plan* plan,
                                             size_t index);
COPLAN_API double coplan_plan_share_mb(const coplan_plan* plan, size_t index);
COPLAN_API double coplan_plan_sensitive_share_mb(const coplan_plan* plan,
                                                 size_t index);
COPLAN_API double coplan_plan_completion_time_s(const coplan_plan* plan);
COPLAN_API double coplan_plan_energy_j(const coplan_plan* plan);
COPLAN_API double coplan_plan_payment(const coplan_plan* plan);
COPLAN_API double coplan_plan_objective(const coplan_plan* plan);
COPLAN_API int coplan_plan_is_baseline(const coplan_plan* plan);
COPLAN_API size_t coplan_plan_violation_count(const coplan_plan* plan);
COPLAN_API const char* coplan_plan_violation(const coplan_plan* plan,
                                             size_t index);
COPLAN_API coplan_status coplan_plan_write_csv(const coplan_plan* plan,
                                               const char* path);

/* ---- simulation --------------------------------------------------------- */

/* Runs discovery, planning, delegation, compute, gathering and recovery.
 * When planning is infeasible the call still produces a handle (carrying the
 * discovery trace and the binding constraint) and returns COPLAN_INFEASIBLE.
 */
COPLAN_API coplan_status coplan_simulate(const coplan_scenario* scenario,
                                         coplan_sim** out);
COPLAN_API void coplan_sim_close(coplan_sim* sim);

COPLAN_API const char* coplan_sim_status(const coplan_sim* sim);
/* NULL when the run was feasible. */
COPLAN_API const char* coplan_sim_binding_constraint(const coplan_sim* sim);
COPLAN_API double coplan_sim_completion_time_s(const coplan_sim* sim);
COPLAN_API double coplan_sim_mobile_energy_j(const coplan_sim* sim);
COPLAN_API double coplan_sim_initiator_energy_j(const coplan_sim* sim);
COPLAN_API double coplan_sim_discovery_energy_j(const coplan_sim* sim);
COPLAN_API double coplan_sim_payment(const coplan_sim* sim);
COPLAN_API size_t coplan_sim_event_count(const coplan_sim* sim);
COPLAN_API int coplan_sim_has_gains(const coplan_sim* sim);
COPLAN_API double coplan_sim_combined_gain(const coplan_sim* sim);
COPLAN_API coplan_status coplan_sim_write_trace_csv(const coplan_sim* sim,
                                                    const char* path);
COPLAN_API coplan_status coplan_sim_write_report_json(const coplan_sim* sim,
                                                      const char* path);

/* ---- tradeoff sweeps ---------------------------------------------------- */

/* One plan per gamma; gammas must be non-negative and non-decreasing. */
COPLAN_API coplan_status coplan_sweep_run(const coplan_scenario* scenario,
                                          const double* gammas, size_t count,
                                          coplan_sweep** out);
COPLAN_API void coplan_sweep_close(coplan_sweep* sweep);
COPLAN_API size_t coplan_sweep_point_count(const coplan_sweep* sweep);
COPLAN_API double coplan_sweep_gamma(const coplan_sweep* sweep, size_t index);
COPLAN_API double coplan_sweep_time_s(const coplan_sweep* sweep, size_t index);
COPLAN_API double coplan_sweep_energy_j(const coplan_sweep* sweep,
                                        size_t index);
COPLAN_API double coplan_sweep_payment(const coplan_sweep* sweep,
                                       size_t index);
COPLAN_API coplan_status coplan_sweep_write_csv(const coplan_sweep* sweep,
                                                const char* path);

/* ---- command line ------------------------------------------------------- */

/* Full CLI dispatch; argv excludes the program name. Returns the process
 * exit code (0 ok, 2 usage, 3 infeasible, 4 config/input). */
COPLAN_API int coplan_run_command(int argc, const char* const* argv);

#ifdef __cplusplus
}
#endif

#endif /* COPLAN_H */
