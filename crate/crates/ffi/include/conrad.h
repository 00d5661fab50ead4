#ifndef CONRAD_H
#define CONRAD_H

/* Generated by cbindgen from conrad-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum ConradStatus {
  CONRAD_STATUS_OK = 0,
  CONRAD_STATUS_NULL_POINTER = 1,
  CONRAD_STATUS_INVALID_ARGUMENT = 2,
  CONRAD_STATUS_HYPOTHESIS = 3,
  CONRAD_STATUS_NUMERICAL = 4,
  CONRAD_STATUS_IO = 5,
  CONRAD_STATUS_FORMAT = 6,
  CONRAD_STATUS_UTF8 = 7,
  CONRAD_STATUS_PANIC = 8,
} ConradStatus;

typedef struct ConradField ConradField;

typedef struct ConradPhantom ConradPhantom;

typedef struct ConradSinogram ConradSinogram;

// Voxel grid geometry; `origin` is the lower box corner, voxel centers sit
// at `origin + (i + 1/2) * spacing`.
typedef struct ConradGridSpec {
  double origin[3];
  double spacing[3];
  uint64_t dims[3];
} ConradGridSpec;

// Uniform cone lattice: `u_count` vertices over `[u_min, u_max]`,
// `beta_count` axis angles over `[0, 2 pi)`, `s_count` openings over
// `[-1, 1]` inclusive.
typedef struct ConradLatticeSpec {
  double u_min;
  double u_max;
  size_t u_count;
  size_t beta_count;
  size_t s_count;
} ConradLatticeSpec;

// Quadrature resolutions; non-positive values select library defaults.
typedef struct ConradQuadSpec {
  size_t circle_nodes;
  double ray_step;
  double plane_step;
  double chord_step;
  size_t sphere_t;
  size_t sphere_phi;
} ConradQuadSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message (NUL terminated) into `buf` and returns the
// full message length in bytes excluding the NUL. `buf` may be null to query
// the length only.
size_t conrad_last_error_message(char *buf, size_t len);

// Crate version as a static NUL-terminated string.
const char *conrad_version(void);

// Parses a phantom from JSON of the form
// `{"primitives": [{"type": "ball", "center": [0,2,0], "radius": 0.5, "amplitude": 1.0}, ...]}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid pointer.
enum ConradStatus conrad_phantom_from_json(const char *json, struct ConradPhantom **out);

// Evaluates the phantom at a point.
//
// # Safety
// `phantom` and `out` must be valid pointers.
enum ConradStatus conrad_phantom_eval(const struct ConradPhantom *phantom,
                                      double x,
                                      double y,
                                      double z,
                                      double *out);

// # Safety
// `phantom` must come from `conrad_phantom_from_json` and not be freed twice.
void conrad_phantom_free(struct ConradPhantom *phantom);

// Samples the phantom at the voxel centers of `grid`.
//
// # Safety
// `phantom` and `out` must be valid pointers.
enum ConradStatus conrad_rasterize(const struct ConradPhantom *phantom,
                                   struct ConradGridSpec grid,
                                   struct ConradField **out);

// Reads a field container file.
//
// # Safety
// `path` must be NUL-terminated; `out` must be valid.
enum ConradStatus conrad_field_read(const char *path, struct ConradField **out);

// Writes a field container file.
//
// # Safety
// `field` must be a live handle; `path` must be NUL-terminated.
enum ConradStatus conrad_field_write(const struct ConradField *field, const char *path);

// Grid geometry of a field handle.
//
// # Safety
// All pointers must be valid.
enum ConradStatus conrad_field_grid(const struct ConradField *field, struct ConradGridSpec *out);

// Borrowed pointer to the voxel values (x fastest); length via
// `conrad_field_len`. Valid until the handle is freed.
//
// # Safety
// `field` must be a live handle.
const double *conrad_field_data(const struct ConradField *field);

// # Safety
// `field` must be a live handle.
size_t conrad_field_len(const struct ConradField *field);

// # Safety
// `field` must come from this library and not be freed twice.
void conrad_field_free(struct ConradField *field);

// Forward-projects a phantom onto a uniform cone lattice.
//
// # Safety
// `phantom` and `out` must be valid pointers.
enum ConradStatus conrad_project_phantom(const struct ConradPhantom *phantom,
                                         struct ConradLatticeSpec lattice,
                                         struct ConradQuadSpec quad,
                                         struct ConradSinogram **out);

// Forward-projects a voxel field (trilinear between centers).
//
// # Safety
// `field` and `out` must be valid pointers.
enum ConradStatus conrad_project_field(const struct ConradField *field,
                                       struct ConradLatticeSpec lattice,
                                       struct ConradQuadSpec quad,
                                       struct ConradSinogram **out);

// Weighted ray transform `Pf(u, direction)` of a phantom.
//
// # Safety
// `phantom`, `direction` (3 doubles) and `out` must be valid pointers.
enum ConradStatus conrad_weighted_ray(const struct ConradPhantom *phantom,
                                      double u,
                                      const double *direction,
                                      struct ConradQuadSpec quad,
                                      double *out);

// Writes a sinogram as `u,beta,s,value` CSV with 17 significant digits.
//
// # Safety
// `sino` must be a live handle; `path` must be NUL-terminated.
enum ConradStatus conrad_sinogram_write_csv(const struct ConradSinogram *sino, const char *path);

// Reads a sinogram CSV produced by this library.
//
// # Safety
// `path` must be NUL-terminated; `out` must be valid.
enum ConradStatus conrad_sinogram_read_csv(const char *path, struct ConradSinogram **out);

// Lattice shape `(u_count, beta_count, s_count)`.
//
// # Safety
// `sino` must be live; `out` must point to 3 u64 slots.
enum ConradStatus conrad_sinogram_shape(const struct ConradSinogram *sino, uint64_t *out);

// One lattice value by index.
//
// # Safety
// `sino` and `out` must be valid pointers.
enum ConradStatus conrad_sinogram_value(const struct ConradSinogram *sino,
                                        size_t iu,
                                        size_t ib,
                                        size_t is,
                                        double *out);

// # Safety
// `sino` must come from this library and not be freed twice.
void conrad_sinogram_free(struct ConradSinogram *sino);

// Runs the full pipeline (per-vertex filtered backprojection, then conjugate
// gradient least squares) on a sinogram. `disk_nodes` is the disk sampling
// per axis; `max_iters`/`tol` bound the solver; `rank_check` != 0 verifies
// the discrete ray operator first.
//
// # Safety
// `sino` and `out` must be valid pointers.
enum ConradStatus conrad_reconstruct(const struct ConradSinogram *sino,
                                     struct ConradGridSpec grid,
                                     size_t disk_nodes,
                                     struct ConradQuadSpec quad,
                                     size_t max_iters,
                                     double tol,
                                     int32_t rank_check,
                                     struct ConradField **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONRAD_H */
