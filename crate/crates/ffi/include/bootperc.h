/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef BOOTPERC_H
#define BOOTPERC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Returned by [`bp_run_time_of`] for cells that are never infected.
 */
#define BP_NEVER 4294967295

typedef enum BpStatus {
  BP_STATUS_OK = 0,
  BP_STATUS_INPUT = 1,
  BP_STATUS_UNSUPPORTED_TOPOLOGY = 2,
  BP_STATUS_DOMAIN = 3,
  BP_STATUS_BUDGET = 4,
  BP_STATUS_INVARIANT = 5,
  BP_STATUS_IO = 6,
  BP_STATUS_NULL_POINTER = 7,
  BP_STATUS_PANIC = 8,
} BpStatus;

typedef enum BpTopology {
  BP_TOPOLOGY_GRID = 0,
  BP_TOPOLOGY_TORUS = 1,
} BpTopology;

typedef struct BpCellSet BpCellSet;

typedef struct BpLattice BpLattice;

typedef struct BpRunRecord BpRunRecord;

typedef struct BpWitness BpWitness;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *bp_last_error(void);

void bp_string_free(char *s);

/**
 * `r = 0` selects the default threshold `r = d`.
 */
enum BpStatus bp_lattice_new(uint32_t d,
                             uint32_t n,
                             enum BpTopology topology,
                             uint32_t r,
                             struct BpLattice **out);

void bp_lattice_free(struct BpLattice *lattice);

/**
 * Number of cells n^d, or 0 for a NULL handle.
 */
uint64_t bp_lattice_cell_count(const struct BpLattice *lattice);

enum BpStatus bp_cellset_new(const struct BpLattice *lattice, struct BpCellSet **out);

/**
 * Builds a construction by name: `hyperplanes`, `shifted`, `diagonal2d`,
 * `boundary`, `torus3` or `level:K`.
 */
enum BpStatus bp_construction(uint32_t d, uint32_t n, const char *name, struct BpCellSet **out);

void bp_cellset_free(struct BpCellSet *set);

/**
 * Inserts a cell given by `len` 1-based coordinates.
 */
enum BpStatus bp_cellset_insert(struct BpCellSet *set, const uint32_t *coords, size_t len);

enum BpStatus bp_cellset_contains(const struct BpCellSet *set,
                                  const uint32_t *coords,
                                  size_t len,
                                  bool *out);

/**
 * Number of cells in the set, or 0 for a NULL handle.
 */
uint64_t bp_cellset_len(const struct BpCellSet *set);

/**
 * Perimeter of a set on a grid lattice.
 */
enum BpStatus bp_perimeter(const struct BpLattice *lattice,
                           const struct BpCellSet *set,
                           uint64_t *out);

/**
 * Runs the process from `initial` on `lattice`. The set must have the
 * lattice's d and n; its topology and threshold are taken from the lattice.
 */
enum BpStatus bp_run(const struct BpLattice *lattice,
                     const struct BpCellSet *initial,
                     bool audit,
                     bool trace,
                     struct BpRunRecord **out);

void bp_run_free(struct BpRunRecord *record);

/**
 * Last round in which a cell was infected (0 for a closed set).
 */
uint32_t bp_run_final_time(const struct BpRunRecord *record);

bool bp_run_percolates(const struct BpRunRecord *record);

uint64_t bp_run_infected_count(const struct BpRunRecord *record);

/**
 * Infection round of a cell, or `BP_NEVER`.
 */
enum BpStatus bp_run_time_of(const struct BpRunRecord *record,
                             const uint32_t *coords,
                             size_t len,
                             uint32_t *out);

enum BpStatus bp_run_to_json(const struct BpRunRecord *record, char **out);

/**
 * Exhaustive search for the smallest percolating set of size at most
 * `max_size`. Writes the optimum (or `BP_NEVER` if none exists) and, when
 * `witness` is non-NULL, a new handle to the first optimal set found (NULL
 * if none). `budget = 0` selects the default budget.
 */
enum BpStatus bp_search_min_size(const struct BpLattice *lattice,
                                 uint32_t max_size,
                                 uint64_t budget,
                                 uint32_t parallelism,
                                 uint32_t *optimum,
                                 struct BpCellSet **witness);

/**
 * Builds the witness DAG of a cell in strip `s` of `[n]^d`.
 */
enum BpStatus bp_witness_build(uint32_t d,
                               uint32_t n,
                               uint32_t s,
                               const uint32_t *coords,
                               size_t len,
                               struct BpWitness **out);

void bp_witness_free(struct BpWitness *w);

/**
 * Longest root-to-leaf path, in edges.
 */
uint32_t bp_witness_depth(const struct BpWitness *w);

/**
 * Distinct labels in the DAG.
 */
uint64_t bp_witness_node_count(const struct BpWitness *w);

enum BpStatus bp_witness_to_json(const struct BpWitness *w, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOOTPERC_H */
