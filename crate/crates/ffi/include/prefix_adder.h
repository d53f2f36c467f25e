#ifndef PREFIX_ADDER_H
#define PREFIX_ADDER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PaEmitStyle {
  PA_EMIT_STYLE_FLAT = 0,
  PA_EMIT_STYLE_HIERARCHICAL = 1,
} PaEmitStyle;

typedef enum PaStatus {
  PA_STATUS_OK = 0,
  PA_STATUS_NULL_POINTER = 1,
  PA_STATUS_INVALID_ARGUMENT = 2,
  PA_STATUS_INVALID_NETWORK = 3,
  PA_STATUS_STRUCTURAL = 4,
  PA_STATUS_PARSE = 5,
  PA_STATUS_IO = 6,
  PA_STATUS_PANIC = 7,
} PaStatus;

typedef enum PaTopology {
  PA_TOPOLOGY_BRENT_KUNG = 0,
  PA_TOPOLOGY_KOGGE_STONE = 1,
  PA_TOPOLOGY_SKLANSKY = 2,
  PA_TOPOLOGY_HAN_CARLSON = 3,
  PA_TOPOLOGY_RIPPLE_SERIAL = 4,
} PaTopology;

/**
 * Opaque gate netlist.
 */
typedef struct PaNetlist PaNetlist;

/**
 * Opaque prefix network.
 */
typedef struct PaNetwork PaNetwork;

typedef struct PaOperatorCounts {
  size_t black;
  size_t gray;
  size_t buffer;
} PaOperatorCounts;

typedef struct PaDelayModel {
  double xor_delay;
  double and_delay;
  double or_delay;
  double buffer_delay;
  double fanout_penalty_alpha;
} PaDelayModel;

typedef struct PaAreaWeights {
  double and_area;
  double or_area;
  double xor_area;
  double buf_area;
} PaAreaWeights;

typedef struct PaGateCounts {
  size_t and_gates;
  size_t or_gates;
  size_t xor_gates;
  size_t buf_gates;
} PaGateCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * Valid until the next call on the same thread.
 */
const char *pa_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pa_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void pa_string_free(char *s);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum PaStatus pa_network_build(enum PaTopology topology, size_t width, struct PaNetwork **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum PaStatus pa_network_from_json(const char *json, struct PaNetwork **out);

/**
 * # Safety
 * `net` must be null or a handle from this library not yet freed.
 */
void pa_network_free(struct PaNetwork *net);

/**
 * # Safety
 * `net` must be a live handle; `out` must be valid for writes.
 */
enum PaStatus pa_network_to_json(const struct PaNetwork *net, char **out);

/**
 * Width in bits, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t pa_network_width(const struct PaNetwork *net);

/**
 * # Safety
 * `net` must be a live handle; `out` must be valid for writes.
 */
enum PaStatus pa_network_depth(const struct PaNetwork *net, size_t *out);

/**
 * # Safety
 * `net` must be a live handle; `out` must be valid for writes.
 */
enum PaStatus pa_network_counts(const struct PaNetwork *net, struct PaOperatorCounts *out);

/**
 * # Safety
 * `net` must be a live handle; `out` must be valid for writes.
 */
enum PaStatus pa_network_max_fanout(const struct PaNetwork *net, size_t *out);

/**
 * Adds two operands of up to 64 bits through the network.
 *
 * # Safety
 * `net` must be a live handle; `sum` and `cout` must be valid for writes.
 */
enum PaStatus pa_evaluate(const struct PaNetwork *net,
                          uint64_t a,
                          uint64_t b,
                          bool cin,
                          uint64_t *sum,
                          bool *cout);

/**
 * Exhaustive check (widths up to 12); writes the number of wrong vectors.
 *
 * # Safety
 * `net` must be a live handle; `mismatches` must be valid for writes.
 */
enum PaStatus pa_verify_exhaustive(const struct PaNetwork *net, uint64_t *mismatches);

/**
 * Seeded random check; writes the number of wrong vectors.
 *
 * # Safety
 * `net` must be a live handle; `mismatches` must be valid for writes.
 */
enum PaStatus pa_verify_random(const struct PaNetwork *net,
                               uint64_t count,
                               uint64_t seed,
                               uint64_t *mismatches);

/**
 * Default delay model, for callers that want to tweak one field.
 */
struct PaDelayModel pa_delay_model_default(void);

struct PaAreaWeights pa_area_weights_default(void);

/**
 * `model` may be null for the default model.
 *
 * # Safety
 * `net` must be a live handle; `model` null or readable; `out` writable.
 */
enum PaStatus pa_estimate_delay(const struct PaNetwork *net,
                                const struct PaDelayModel *model,
                                double *out);

/**
 * `weights` may be null for the default weights.
 *
 * # Safety
 * `net` must be a live handle; `weights` null or readable; `out` writable.
 */
enum PaStatus pa_estimate_area(const struct PaNetwork *net,
                               const struct PaAreaWeights *weights,
                               double *out);

/**
 * # Safety
 * `net` must be a live handle; `out` must be valid for writes.
 */
enum PaStatus pa_netlist_expand(const struct PaNetwork *net, struct PaNetlist **out);

/**
 * # Safety
 * `netlist` must be null or a handle from this library not yet freed.
 */
void pa_netlist_free(struct PaNetlist *netlist);

/**
 * # Safety
 * `netlist` must be a live handle; `out` must be valid for writes.
 */
enum PaStatus pa_netlist_gate_counts(const struct PaNetlist *netlist, struct PaGateCounts *out);

/**
 * Structural Verilog for the netlist as module `module_name`.
 *
 * # Safety
 * `netlist` must be a live handle, `module_name` a NUL-terminated string
 * and `out` valid for writes.
 */
enum PaStatus pa_emit_verilog(const struct PaNetlist *netlist,
                              enum PaEmitStyle style,
                              const char *module_name,
                              char **out);

/**
 * Self-checking testbench for the seven-row 32-bit reference sequence.
 *
 * # Safety
 * `dut` must be a NUL-terminated string and `out` valid for writes.
 */
enum PaStatus pa_emit_reference_testbench(const char *dut, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PREFIX_ADDER_H */
