#ifndef CONSIDERATE_H
#define CONSIDERATE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every API call.
 */
typedef enum CrsgStatus {
  /**
   * The call succeeded.
   */
  CrsgStatus_Ok = 0,
  /**
   * A required pointer argument was NULL.
   */
  CrsgStatus_NullArgument = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  CrsgStatus_Utf8 = 2,
  /**
   * Input text failed to parse or violated a model invariant.
   */
  CrsgStatus_Parse = 3,
  /**
   * A precondition of the operation did not hold.
   */
  CrsgStatus_Contract = 4,
  /**
   * An exhaustive search exceeded its budget; the answer is unknown.
   */
  CrsgStatus_Budget = 5,
  /**
   * A bug inside the library (including a caught panic).
   */
  CrsgStatus_Internal = 6,
} CrsgStatus;

/**
 * An instance together with its social graph (opaque).
 */
typedef struct CrsgInstance CrsgInstance;

/**
 * An assignment of players to resources (opaque).
 */
typedef struct CrsgState CrsgState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL if the last
 * call succeeded. The pointer is valid until the next failing call on the
 * same thread; do not free it.
 */
const char *crsg_last_error(void);

/**
 * Parses an instance (with optional edge lines) from text into `out`.
 *
 * # Safety
 * `text` must point to a NUL-terminated string; `out` must point to
 * writable storage for one pointer.
 */
enum CrsgStatus crsg_instance_parse(const char *text, struct CrsgInstance **out);

/**
 * Releases an instance handle. NULL is ignored.
 *
 * # Safety
 * `handle` must be NULL or a pointer returned by [`crsg_instance_parse`]
 * that has not been freed yet.
 */
void crsg_instance_free(struct CrsgInstance *handle);

/**
 * Number of players, or 0 when `handle` is NULL.
 *
 * # Safety
 * `handle` must be NULL or a live instance handle.
 */
size_t crsg_instance_players(const struct CrsgInstance *handle);

/**
 * Number of resources, or 0 when `handle` is NULL.
 *
 * # Safety
 * `handle` must be NULL or a live instance handle.
 */
size_t crsg_instance_resources(const struct CrsgInstance *handle);

/**
 * Serializes the instance (players, resources, delay tables, edges) back
 * to its text form.
 *
 * # Safety
 * `handle` must be a live instance handle; `out` must point to writable
 * storage for one pointer. Free the result with [`crsg_string_free`].
 */
enum CrsgStatus crsg_instance_format(const struct CrsgInstance *handle, char **out);

/**
 * Parses a `state ...` line against an instance into `out`.
 *
 * # Safety
 * `handle` must be a live instance handle; `text` must point to a
 * NUL-terminated string; `out` must point to writable storage for one
 * pointer.
 */
enum CrsgStatus crsg_state_parse(const struct CrsgInstance *handle,
                                 const char *text,
                                 struct CrsgState **out);

/**
 * Releases a state handle. NULL is ignored.
 *
 * # Safety
 * `handle` must be NULL or a pointer returned by this library that has not
 * been freed yet.
 */
void crsg_state_free(struct CrsgState *handle);

/**
 * Serializes a state to its single-line text form.
 *
 * # Safety
 * `handle` must be a live state handle; `out` must point to writable
 * storage for one pointer. Free the result with [`crsg_string_free`].
 */
enum CrsgStatus crsg_state_format(const struct CrsgState *handle, char **out);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string pointer returned by this library that has
 * not been freed yet.
 */
void crsg_string_free(char *s);

/**
 * Runs the constructive solver and writes the resulting state handle to
 * `out`. The result is a Nash equilibrium admitting no weak considerate
 * improving clique move.
 *
 * # Safety
 * `handle` must be a live instance handle; `out` must point to writable
 * storage for one pointer.
 */
enum CrsgStatus crsg_solve(const struct CrsgInstance *handle, struct CrsgState **out);

/**
 * Writes 1 to `out` when no single player can strictly improve, else 0.
 *
 * # Safety
 * `instance` and `state` must be live handles; `out` must point to
 * writable storage for one `int32_t`.
 */
enum CrsgStatus crsg_is_nash(const struct CrsgInstance *instance,
                             const struct CrsgState *state,
                             int32_t *out);

/**
 * Writes 1 to `out` when no clique of the social graph has a weak
 * considerate improving move, else 0. Returns `Budget` (leaving `out`
 * untouched) if the exhaustive search exceeds the given caps; pass 0 for
 * either cap to use its default.
 *
 * # Safety
 * `instance` and `state` must be live handles; `out` must point to
 * writable storage for one `int32_t`.
 */
enum CrsgStatus crsg_is_clique_stable(const struct CrsgInstance *instance,
                                      const struct CrsgState *state,
                                      size_t max_cliques,
                                      size_t max_deviations,
                                      int32_t *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CONSIDERATE_H */
