#ifndef CRASP_KIT_H
#define CRASP_KIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CraspStatus {
  CRASP_STATUS_OK = 0,
  CRASP_STATUS_NULL_ARGUMENT = 1,
  CRASP_STATUS_INVALID_UTF8 = 2,
  CRASP_STATUS_PARSE_ERROR = 3,
  CRASP_STATUS_EVAL_ERROR = 4,
  CRASP_STATUS_AMBIGUOUS_NEXT = 5,
  CRASP_STATUS_UNKNOWN_TASK = 6,
  CRASP_STATUS_INVALID_INSTANCE = 7,
  CRASP_STATUS_PANIC = 8,
} CraspStatus;

/*
 A parsed and validated program. Opaque to C.
 */
typedef struct CraspProgram CraspProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failure on this thread, or NULL. The pointer stays
 valid until the next call into this library on the same thread.
 */
const char *crasp_last_error(void);

/*
 Library version as a static string.
 */
const char *crasp_version(void);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed already.
 */
void crasp_string_free(char *s);

/*
 Parses and validates program text. On success `*out` receives a handle
 to release with [`crasp_program_free`].

 # Safety
 `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CraspStatus crasp_program_parse(const char *text, struct CraspProgram **out);

/*
 # Safety
 `p` must be NULL or a handle from [`crasp_program_parse`] not yet freed.
 */
void crasp_program_free(struct CraspProgram *p);

/*
 Number of operations in the compiled program.

 # Safety
 `p` must be a live handle.
 */
uintptr_t crasp_program_op_count(const struct CraspProgram *p);

/*
 Feeds whitespace-separated `input` and reports the next token. `*out`
 receives the token, or NULL when the program halts.

 # Safety
 `p` must be a live handle, `input` a NUL-terminated string, `out` writable.
 */
enum CraspStatus crasp_program_next_token(const struct CraspProgram *p,
                                          const char *input,
                                          char **out);

/*
 Feeds `input`, then generates until the program halts or `max_steps`
 tokens have been emitted. `*out` receives the space-separated tokens.

 # Safety
 As for [`crasp_program_next_token`].
 */
enum CraspStatus crasp_program_generate(const struct CraspProgram *p,
                                        const char *input,
                                        uintptr_t max_steps,
                                        char **out);

/*
 Expected answer of a retrieval task (UL, UR, NLFirst, ...) for a
 whitespace-separated `context` and a single `query` token.

 # Safety
 All pointers must be NUL-terminated strings except `out`, which must be writable.
 */
enum CraspStatus crasp_oracle_retrieval(const char *task,
                                        const char *context,
                                        const char *query,
                                        char **out);

/*
 Expected output of a copy task (UF, UB, NF, NB) for a
 whitespace-separated `source`.

 # Safety
 As for [`crasp_oracle_retrieval`].
 */
enum CraspStatus crasp_oracle_copy(const char *task, const char *source, char **out);

/*
 Aligns whitespace-separated `output` against `source` and writes the
 transition report as JSON to `*out`.

 # Safety
 As for [`crasp_oracle_retrieval`].
 */
enum CraspStatus crasp_analyze(const char *source,
                               const char *output,
                               int32_t match_score,
                               int32_t mismatch_score,
                               int32_t gap_score,
                               char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRASP_KIT_H */
