/* Copyright 2026 The tmark Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the tmark core: Turing-machine simulation, keyed sparse-set
 * signatures, behavior-preserving machine combination, infection checking,
 * byte-level scanning, brute-force decomposition and the batch experiments.
 *
 * Conventions:
 *   - Every fallible function returns a tmk_status; TMK_OK is 0.
 *   - On failure, tmk_last_error() returns a message for the calling thread,
 *     valid until that thread's next failing call.
 *   - Out-parameters are written only on success (except where documented).
 *   - Strings returned through char** are heap-allocated; release them with
 *     tmk_string_free. Handles are released with their _free function.
 *   - All randomness is seeded: functions that need entropy take an explicit
 *     even-length hex seed string. Equal seeds give equal results.
 */

#ifndef TMARK_TMARK_H
#define TMARK_TMARK_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TMK_API __declspec(dllexport)
#else
#define TMK_API __attribute__((visibility("default")))
#endif

typedef enum tmk_status {
    TMK_OK = 0,
    TMK_ERR_PARSE = 1,    /* malformed text input */
    TMK_ERR_VALIDATE = 2, /* machine fails structural validation */
    TMK_ERR_ARG = 3,      /* bad argument or unsupported request */
    TMK_ERR_IO = 4,       /* file system failure */
    TMK_ERR_INTERNAL = 5, /* unexpected failure */
    TMK_ALREADY_INFECTED = 10, /* infect refused: host already checks infected */
    TMK_INDETERMINATE = 11,    /* verdict undecidable: every probe timed out */
    TMK_REFUSED = 12           /* decompose refused: candidate space over cap */
} tmk_status;

typedef enum tmk_run_status {
    TMK_RUN_HALTED = 0,
    TMK_RUN_BUDGET_EXCEEDED = 1,
    TMK_RUN_STUCK = 2
} tmk_run_status;

typedef struct tmk_machine tmk_machine;
typedef struct tmk_key tmk_key;

/* ------------------------------------------------------------------ misc */

TMK_API const char* tmk_version(void);

/* Message from the calling thread's most recent failing call ("" if none). */
TMK_API const char* tmk_last_error(void);

TMK_API void tmk_string_free(char* s);

/* -------------------------------------------------------------- machines */

/* Parses the ".tm" text format and validates the machine. */
TMK_API tmk_status tmk_machine_parse(const char* text, const char* name, tmk_machine** out);
TMK_API tmk_status tmk_machine_load(const char* path, tmk_machine** out);
TMK_API tmk_status tmk_machine_save(const tmk_machine* m, const char* path);
TMK_API tmk_status tmk_machine_write(const tmk_machine* m, char** out_text);
TMK_API void tmk_machine_free(tmk_machine* m);

/* States, transitions and work-track count of the (already validated)
 * machine. Any out-pointer may be NULL. */
TMK_API tmk_status tmk_machine_stats(const tmk_machine* m, int* out_states,
                                     long long* out_transitions, int* out_work_tracks);

/* Runs the machine on a {0,1} input string. Writes the run status, the
 * output-tape contents (success and failure alike: empty on non-halting
 * runs) and the step count. out_output may be NULL. */
TMK_API tmk_status tmk_machine_run(const tmk_machine* m, const char* input,
                                   unsigned long long budget, tmk_run_status* out_status,
                                   char** out_output, unsigned long long* out_steps);

/* ------------------------------------------------------------------ keys */

/* Deterministically derives a key from a hex seed. n0 >= 2 is the length at
 * and below which the keyed set is empty. */
TMK_API tmk_status tmk_key_derive(const char* seed_hex, int n0, tmk_key** out);
TMK_API tmk_status tmk_key_load(const char* path, tmk_key** out);
TMK_API tmk_status tmk_key_save(const tmk_key* key, const char* path);
TMK_API tmk_status tmk_key_write(const tmk_key* key, char** out_text);
TMK_API void tmk_key_free(tmk_key* key);
TMK_API tmk_status tmk_key_n0(const tmk_key* key, int* out_n0);

/* The unique keyed set element of length n (requires n > n0). */
TMK_API tmk_status tmk_key_element_at(const tmk_key* key, int n, char** out_element);

/* Membership test for an arbitrary {0,1} string (never fails on binary
 * input; writes 0 or 1). */
TMK_API tmk_status tmk_key_member(const tmk_key* key, const char* x, int* out_member);

/* Response bit for a set member; TMK_ERR_ARG on non-members. */
TMK_API tmk_status tmk_key_response_bit(const tmk_key* key, const char* x, int* out_bit);

/* ---------------------------------------------------------------- corpus */

/* The index-th machine of the seeded host corpus: a uniformly drawn total
 * DFA with a state count in [min_states, max_states], compiled to a 3-tape
 * scanner. Pure function of (seed, index). */
TMK_API tmk_status tmk_corpus_machine(const char* seed_hex, int index, int min_states,
                                      int max_states, tmk_machine** out);

/* ------------------------------------------------- combination/infection */

/* Builds the key's marker machine: recognizes the set elements with lengths
 * in [n_min, n_max] and answers their response bits, "?" elsewhere.
 * state_cap <= 0 selects the default cap. */
TMK_API tmk_status tmk_marker_build(const tmk_key* key, int n_min, int n_max, int state_cap,
                                    tmk_machine** out);

/* Combines a host with a marker (both must be 3-tape scanners) into one
 * machine computing the marker-wins selection of their outputs. If
 * out_record_json is non-NULL it receives the audit record (seed, hashes,
 * tuple permutation, opaque symbol names) as JSON. */
TMK_API tmk_status tmk_combine(const tmk_machine* host, const tmk_machine* marker,
                               const char* seed_hex, tmk_machine** out,
                               char** out_record_json);

/* Reduced-layout combination used by the brute-force decomposition
 * experiments; phases in [1, 4]. */
TMK_API tmk_status tmk_mini_combine(const tmk_machine* host, const tmk_machine* marker,
                                    int phases, const char* seed_hex, tmk_machine** out,
                                    char** out_record_json);

/* Guarded embedding: runs the infection check on the host first and refuses
 * with TMK_ALREADY_INFECTED / TMK_INDETERMINATE (writing no machine), else
 * combines the host with the key's marker over the window [n_min, n_max].
 * The checker reads probe lengths n0+1 .. k0-1 from the key's n0 and the
 * given k0; z is the band half-width in standard deviations. */
TMK_API tmk_status tmk_infect(const tmk_machine* host, const tmk_key* key, int n_min,
                              int n_max, int k0, double z, unsigned long long budget,
                              const char* seed_hex, tmk_machine** out,
                              char** out_record_json);

/* Statistical infection check. Writes the flag, the indeterminate marker
 * (every probe timed out) and, if the pointers are non-NULL, the verdict as
 * the compact JSON object
 *   {"trials":..,"hits":..,"timeouts":..,"band":[lo,hi],"infected":..}
 * plus a probe-by-probe trace array. */
TMK_API tmk_status tmk_check(const tmk_machine* m, const tmk_key* key, int k0, double z,
                             unsigned long long budget, int* out_infected,
                             int* out_indeterminate, char** out_verdict_json,
                             char** out_probes_json);

/* -------------------------------------------------------------- analysis */

/* Byte-level n-gram scan: loads every "*.tm" machine under infected_dir and
 * clean_dir (sorted by name), serializes them structurally and reports
 * whether some n-gram is common to all infected samples yet absent from
 * every clean one. Writes a JSON report and the found flag. */
TMK_API tmk_status tmk_scan_dirs(const char* infected_dir, const char* clean_dir, int n,
                                 char** out_report_json, int* out_found);

/* Brute-force decomposition of a reduced-layout combined machine against its
 * host. Enumerates every bijection between the machine's opaque work symbols
 * and the phase-tagged layout tuples; returns TMK_REFUSED when the factorial
 * candidate space exceeds max_candidates (0 selects the default cap). The
 * JSON report lists candidates tried, consistent candidates and the
 * recovered marker behavior. */
TMK_API tmk_status tmk_decompose_mini(const tmk_machine* m, const tmk_machine* host,
                                      int phases, unsigned long long max_candidates,
                                      unsigned long long budget, char** out_report_json);

/* ----------------------------------------------------------- experiments */

/* Comma-joined list of experiment names. */
TMK_API tmk_status tmk_experiment_list(char** out_names_csv);

/* Runs a named experiment from flat "key = value" config text (must define
 * "seed"). Writes every report file (CSV + summary JSON) under out_dir if it
 * is non-NULL, and the summary JSON / overall pass flag through the
 * remaining out-parameters when they are non-NULL. Reports are byte-stable:
 * equal config gives equal files. */
TMK_API tmk_status tmk_experiment_run(const char* name, const char* config_text,
                                      const char* out_dir, char** out_summary_json,
                                      int* out_pass);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TMARK_TMARK_H */
