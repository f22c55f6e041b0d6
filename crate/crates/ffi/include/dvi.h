#ifndef DVI_H
#define DVI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  DVI_FUSION_MODE_ADAPTIVE = 0,
  DVI_FUSION_MODE_ALWAYS = 1,
  DVI_FUSION_MODE_NEVER = 2,
} DviFusionMode;

typedef enum {
  DVI_INDEX_MODE_HDNC = 0,
  DVI_INDEX_MODE_TOC_ONLY = 1,
  DVI_INDEX_MODE_FULLTEXT_ONLY = 2,
} DviIndexMode;

typedef enum {
  DVI_STATUS_OK = 0,
  DVI_STATUS_NULL_POINTER = 1,
  DVI_STATUS_INVALID_INPUT = 2,
  DVI_STATUS_ADAPTER = 3,
  DVI_STATUS_IO = 4,
  DVI_STATUS_PARSE = 5,
  DVI_STATUS_INVALID_UTF8 = 6,
  DVI_STATUS_PANIC = 7,
} DviStatus;

/**
 * An index bundle together with its postings.
 */
typedef struct DviIndex DviIndex;

/**
 * A loaded or generated corpus manifest.
 */
typedef struct DviManifest DviManifest;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dvi_version(void);

/**
 * Message of the last failed call on this thread, or NULL if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *dvi_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void dvi_string_free(char *s);

/**
 * Loads a line-delimited manifest from `path`.
 *
 * # Safety
 * `path` must be a valid C string and `out` a valid pointer.
 */
DviStatus dvi_manifest_load(const char *path, DviManifest **out);

/**
 * Parses manifest text held in memory.
 *
 * # Safety
 * `text` and `corpus_id` must be valid C strings and `out` a valid pointer.
 */
DviStatus dvi_manifest_parse(const char *text, const char *corpus_id, DviManifest **out);

/**
 * Generates a synthetic corpus from a JSON spec.
 *
 * # Safety
 * `spec_json` must be a valid C string and `out` a valid pointer.
 */
DviStatus dvi_manifest_synth(const char *spec_json, uint64_t seed, DviManifest **out);

/**
 * # Safety
 * `m` must be a valid manifest handle.
 */
size_t dvi_manifest_page_count(const DviManifest *m);

/**
 * # Safety
 * `m` must be a valid manifest handle.
 */
size_t dvi_manifest_query_count(const DviManifest *m);

/**
 * # Safety
 * `m` must be NULL or a handle from this library that has not been freed.
 */
void dvi_manifest_free(DviManifest *m);

/**
 * Runs drawing-number clustering and writes the hierarchy summary as JSON.
 *
 * # Safety
 * `m` must be a valid manifest handle and `out_json` a valid pointer.
 */
DviStatus dvi_hdnc_inspect_json(const DviManifest *m, char **out_json);

/**
 * Builds an index. `ocr_threshold` must lie in [0, 1].
 *
 * # Safety
 * `m` must be a valid manifest handle and `out` a valid pointer.
 */
DviStatus dvi_index_build(const DviManifest *m,
                          DviIndexMode mode,
                          DviFusionMode fusion,
                          double ocr_threshold,
                          bool exclude_toc_page,
                          DviIndex **out);

/**
 * # Safety
 * `path` must be a valid C string and `out` a valid pointer.
 */
DviStatus dvi_index_load(const char *path, DviIndex **out);

/**
 * # Safety
 * `idx` must be a valid index handle and `path` a valid C string.
 */
DviStatus dvi_index_save(const DviIndex *idx, const char *path);

/**
 * # Safety
 * `idx` must be a valid index handle.
 */
size_t dvi_index_document_count(const DviIndex *idx);

/**
 * # Safety
 * `idx` must be NULL or a handle from this library that has not been freed.
 */
void dvi_index_free(DviIndex *idx);

/**
 * Top-`k` BM25 hits as a JSON array of `{rank, page_id, score}`.
 *
 * # Safety
 * `idx` must be a valid index handle, `query` a valid C string and
 * `out_json` a valid pointer.
 */
DviStatus dvi_search_json(const DviIndex *idx, const char *query, size_t k, char **out_json);

/**
 * Locates pages for `question` and hands them to the VLM named by `vlm`
 * (`mock:oracle`, `mock:lossy:<c>`, `mock:fixed:<text>`, `cmd`, `http`).
 * Mock VLMs take their answer key from `m`, which may be NULL otherwise.
 * Returns `DVI_STATUS_ADAPTER` when the VLM call fails.
 *
 * # Safety
 * `idx` must be a valid index handle, `m` NULL or a valid manifest handle,
 * `question` and `vlm` valid C strings and `out_json` a valid pointer.
 */
DviStatus dvi_ask_json(const DviIndex *idx,
                       const DviManifest *m,
                       const char *question,
                       const char *vlm,
                       size_t k,
                       uint64_t seed,
                       char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DVI_H */
