#ifndef EUVAC_H
#define EUVAC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum EuvacStatus {
  EuvacStatus_Ok = 0,
  EuvacStatus_InvalidArgument = 1,
  EuvacStatus_NumericalError = 2,
  EuvacStatus_NullPointer = 3,
} EuvacStatus;

/**
 * Opaque discrete flow field (density and momentum on a uniform
 * space-time grid).
 */
typedef struct EuvacField EuvacField;

/**
 * Feasible scaling-exponent window. `kappa_hi`/`nu_hi` are `INFINITY`
 * when unbounded; `q_tilde` is meaningful only when `q_tilde_defined` is
 * nonzero.
 */
typedef struct EuvacExponentWindow {
  double kappa_lo;
  double kappa_hi;
  double nu_lo;
  double nu_hi;
  double p_exp;
  double q_tilde;
  int32_t q_tilde_defined;
  int32_t feasible;
} EuvacExponentWindow;

/**
 * Toolkit version as a static NUL-terminated string.
 */
const char *euvac_version(void);

/**
 * Pressure `kappa * rho^gamma`.
 */
enum EuvacStatus euvac_pressure(double kappa, double gamma, double rho, double *out);

/**
 * Pressure potential `kappa/(gamma-1) * rho^gamma`.
 */
enum EuvacStatus euvac_pressure_potential(double kappa, double gamma, double rho, double *out);

/**
 * Sound speed `sqrt(p'(rho))`.
 */
enum EuvacStatus euvac_sound_speed(double kappa, double gamma, double rho, double *out);

/**
 * Threshold the vacuum-integrability exponent must exceed for the given
 * `(gamma, beta)`.
 */
enum EuvacStatus euvac_theta_threshold(double gamma, double beta, double *out);

/**
 * Solves the explicit feasible window for the scaling exponents.
 */
enum EuvacStatus euvac_solve_window(double gamma,
                                    double alpha,
                                    double beta,
                                    double theta,
                                    double q,
                                    struct EuvacExponentWindow *out);

/**
 * Evaluates the seven scaling inequalities at `(kappa_exp, nu)`. Writes
 * the seven slacks into `slacks_out` (length at least 7) and the overall
 * verdict into `pass_out`.
 *
 * # Safety
 * `slacks_out` must point to at least 7 writable doubles.
 */
enum EuvacStatus euvac_verify_full_system(double gamma,
                                          double alpha,
                                          double beta,
                                          double theta,
                                          double q,
                                          double kappa_exp,
                                          double nu,
                                          double *slacks_out,
                                          int32_t *pass_out);

/**
 * Creates a field from caller-owned buffers (`n_frames * n_cells` entries
 * each, frame-major). `geometry`: 0 planar, 1 radial. Returns null on
 * invalid input.
 *
 * # Safety
 * `rho` and `mom` must point to `n_frames * n_cells` readable doubles.
 */
struct EuvacField *euvac_field_create(int32_t geometry,
                                      double x_min,
                                      double x_max,
                                      uintptr_t n_cells,
                                      double t_start,
                                      double t_end,
                                      uintptr_t n_frames,
                                      const double *rho,
                                      const double *mom);

/**
 * Destroys a field handle.
 *
 * # Safety
 * `field` must be a handle from this library, not yet freed.
 */
void euvac_field_free(struct EuvacField *field);

/**
 * Total mass of one frame (radial measure included).
 *
 * # Safety
 * `field` must be a live handle.
 */
enum EuvacStatus euvac_field_frame_mass(const struct EuvacField *field,
                                        uintptr_t frame,
                                        double *out);

/**
 * Total-energy admissibility margin `min_tau [E(0) - E(tau)]`.
 *
 * # Safety
 * `field` must be a live handle.
 */
enum EuvacStatus euvac_energy_margin(const struct EuvacField *field,
                                     double kappa,
                                     double gamma,
                                     double rho_max,
                                     double *out);

/**
 * Relative energy between two fields on the same grid at frame time `t`.
 *
 * # Safety
 * Both handles must be live.
 */
enum EuvacStatus euvac_relative_energy(const struct EuvacField *weak,
                                       const struct EuvacField *strong,
                                       double kappa,
                                       double gamma,
                                       double rho_max,
                                       double t,
                                       double *out);

/**
 * Mollifies a field with the space-time bump kernel at radius `eps`,
 * returning a new handle through `out`.
 *
 * # Safety
 * `field` must be a live handle; `out` writable.
 */
enum EuvacStatus euvac_mollify(const struct EuvacField *field, double eps, struct EuvacField **out);

/**
 * Finite-difference Besov seminorm of one component over the default
 * dyadic shift set. `component`: 0 density, 1 momentum, 2 velocity.
 *
 * # Safety
 * `field` must be a live handle.
 */
enum EuvacStatus euvac_besov_seminorm(const struct EuvacField *field,
                                      int32_t component,
                                      double alpha,
                                      double q,
                                      double *out);

/**
 * One-sided Lipschitz (expansion-rate) estimate at frame time `t`.
 *
 * # Safety
 * `field` must be a live handle.
 */
enum EuvacStatus euvac_estimate_lambda(const struct EuvacField *field, double t, double *out);

/**
 * Runs the finite-volume solver on Riemann data and returns the field
 * handle through `out` (planar grid, Rusanov flux, CFL 0.45).
 *
 * # Safety
 * `out` must be writable.
 */
enum EuvacStatus euvac_simulate_riemann(double kappa,
                                        double gamma,
                                        double rho_max,
                                        double rho_l,
                                        double u_l,
                                        double rho_r,
                                        double u_r,
                                        double x_min,
                                        double x_max,
                                        uintptr_t n_cells,
                                        double t_end,
                                        uintptr_t n_frames,
                                        struct EuvacField **out);

#endif  /* EUVAC_H */
