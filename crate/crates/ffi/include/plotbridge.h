#ifndef PLOTBRIDGE_H
#define PLOTBRIDGE_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PbStatus {
  PB_STATUS_OK = 0,
  PB_STATUS_NULL_ARGUMENT = 1,
  PB_STATUS_INVALID_UTF8 = 2,
  PB_STATUS_DATA = 3,
  PB_STATUS_SCRIPT = 4,
  PB_STATUS_RENDER = 5,
  PB_STATUS_QUERY = 6,
  PB_STATUS_PANIC = 99,
} PbStatus;

typedef struct PbDataSource PbDataSource;

/**
 * A parallel-coordinates index together with the data it was built on.
 */
typedef struct PbIndex PbIndex;

typedef struct PbRowSet PbRowSet;

typedef struct PbDualPoint {
  /**
   * Non-zero when the line has slope 1; `x`, `y` then hold the direction.
   */
  int32_t ideal;
  double x;
  double y;
} PbDualPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *pb_last_error(void);

/**
 * Library version as a static string.
 */
const char *pb_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void pb_string_free(char *s);

/**
 * Parses CSV text with a header row.
 *
 * # Safety
 * `csv` and `name` must be nul-terminated; `out` must be writable.
 */
enum PbStatus pb_datasource_from_csv(const char *csv, const char *name, struct PbDataSource **out);

/**
 * Decodes the wire JSON form.
 *
 * # Safety
 * `json` must be nul-terminated; `out` must be writable.
 */
enum PbStatus pb_datasource_from_json(const char *json, struct PbDataSource **out);

/**
 * Encodes to the wire JSON form.
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum PbStatus pb_datasource_to_json(const struct PbDataSource *data, char **out);

/**
 * # Safety
 * `data` must be null or a live handle.
 */
size_t pb_datasource_n_rows(const struct PbDataSource *data);

/**
 * # Safety
 * `data` must be null or a live handle.
 */
size_t pb_datasource_n_cols(const struct PbDataSource *data);

/**
 * # Safety
 * `data` must be null or a handle from this library, freed once.
 */
void pb_datasource_free(struct PbDataSource *data);

/**
 * Compiles a GoG script against `data` and renders it as SVG.
 *
 * # Safety
 * `script` must be nul-terminated, `data` live, `out_svg` writable.
 */
enum PbStatus pb_render_script(const char *script,
                               const struct PbDataSource *data,
                               uint32_t width,
                               uint32_t height,
                               char **out_svg);

/**
 * Builds a parallel-coordinates index over the named quantitative columns.
 *
 * # Safety
 * `axes` must point to `n_axes` nul-terminated strings; `data` must be live.
 */
enum PbStatus pb_index_build(const struct PbDataSource *data,
                             const char *const *axes,
                             size_t n_axes,
                             double spacing,
                             struct PbIndex **out);

/**
 * # Safety
 * `index` must be null or a handle from this library, freed once.
 */
void pb_index_free(struct PbIndex *index);

/**
 * Rows with `lo <= value <= hi` on `axis`, in data units.
 *
 * # Safety
 * `index` must be live; `out` writable.
 */
enum PbStatus pb_index_axis_interval(const struct PbIndex *index,
                                     size_t axis,
                                     double lo,
                                     double hi,
                                     struct PbRowSet **out);

/**
 * Rows whose segment in band `pair` crosses `x` within `[ylo, yhi]`
 * (normalized units).
 *
 * # Safety
 * `index` must be live; `out` writable.
 */
enum PbStatus pb_index_brush_segment(const struct PbIndex *index,
                                     size_t pair,
                                     double x,
                                     double ylo,
                                     double yhi,
                                     struct PbRowSet **out);

/**
 * Rows whose segment slope in band `pair` lies in `[lo, hi]`.
 *
 * # Safety
 * `index` must be live; `out` writable.
 */
enum PbStatus pb_index_slope(const struct PbIndex *index,
                             size_t pair,
                             double lo,
                             double hi,
                             struct PbRowSet **out);

/**
 * Renders the indexed data on its axes. Rows in `highlight` (may be null)
 * are drawn as one selection group.
 *
 * # Safety
 * `index` must be live, `highlight` null or live, `out_svg` writable.
 */
enum PbStatus pb_index_render_svg(const struct PbIndex *index,
                                  const struct PbRowSet *highlight,
                                  uint32_t width,
                                  uint32_t height,
                                  char **out_svg);

/**
 * # Safety
 * `rows` must be null or live.
 */
size_t pb_rowset_len(const struct PbRowSet *rows);

/**
 * Ascending row indices; `pb_rowset_len` entries, valid while `rows` lives.
 *
 * # Safety
 * `rows` must be null or live.
 */
const size_t *pb_rowset_data(const struct PbRowSet *rows);

/**
 * # Safety
 * `rows` must be null or a handle from this library, freed once.
 */
void pb_rowset_free(struct PbRowSet *rows);

/**
 * Point where the segments induced by `y = slope * x + intercept` meet,
 * for axes `spacing` apart.
 *
 * # Safety
 * `out` must be writable.
 */
enum PbStatus pb_dual_point(double slope,
                            double intercept,
                            double spacing,
                            struct PbDualPoint *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLOTBRIDGE_H */
