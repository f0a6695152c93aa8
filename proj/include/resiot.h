/*
 * resiot: edge-offloaded security functions over a simulated device fabric.
 *
 * C interface to the shared library. All functions return resiot_status;
 * RESIOT_OK is 0. On failure, resiot_last_error() returns a thread-local
 * message describing the most recent failing call.
 *
 * Buffer convention: output buffers take the capacity in *len and leave the
 * number of bytes written there. When the buffer is too small the call
 * returns RESIOT_ERR_BUFFER and *len holds the required size.
 */
#ifndef RESIOT_H
#define RESIOT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum resiot_status {
    RESIOT_OK = 0,
    RESIOT_ERR_USAGE = 1,
    RESIOT_ERR_IO = 2,
    RESIOT_ERR_PARSE = 3,
    RESIOT_ERR_VALIDATION = 4,
    RESIOT_ERR_CRYPTO = 5,
    RESIOT_ERR_POLICY = 6,      /* ABE policy unsatisfied */
    RESIOT_ERR_EXPECTATION = 7, /* scenario ran, some run missed its expected outcome */
    RESIOT_ERR_BUFFER = 8,
    RESIOT_ERR_INTERNAL = 9
} resiot_status;

const char* resiot_version(void);
const char* resiot_last_error(void);

/* ---------------------------------------------------------------------------
 * Command layer: file-based operations the CLI is built on.
 * timings_spec is "paper", "host" (measure this machine now), or a path to a
 * timings JSON file; NULL means the scenario's own setting (or "paper").
 */

/* Writes group_public.key, group_issuer.key, member_NNN.key into out_dir. */
resiot_status resiot_keygen_group(uint32_t member_count, uint64_t seed, const char* out_dir);

/* Writes abe_public.key, abe_master.key and abe_key_NN.key per policy. */
resiot_status resiot_keygen_abe(uint32_t universe_size, const char* const* policies,
                                size_t policy_count, uint64_t seed, const char* out_dir);

typedef struct resiot_run_summary {
    uint32_t runs;
    uint32_t matched;
    uint32_t mismatched;
} resiot_run_summary;

/* Executes a scenario file; writes report.json and runs.csv into out_dir.
 * Returns RESIOT_ERR_EXPECTATION when any run misses its expected outcome
 * (summary is still filled in that case). */
resiot_status resiot_run_scenario(const char* scenario_path, const char* timings_spec,
                                  int has_seed_override, uint64_t seed_override,
                                  const char* out_dir, resiot_run_summary* summary);

/* Writes cost_table.txt / cost_table.csv / cost_table.json into out_dir. */
resiot_status resiot_cost_table(const char* timings_spec, const char* out_dir);

/* Grid spec: "ck=<list-or-start:end:step>;texp=<list>", where texp entries
 * may be absolute ms or multiples of the service time like "5x".
 * NULL selects "ck=0.1:1.0:0.1;texp=2x,5x,10x". Writes queue_sweep.csv. */
resiot_status resiot_queue_sweep(const char* grid_spec, const char* timings_spec,
                                 uint64_t requests, uint64_t seed, const char* out_dir);

/* Measures this host's primitive timings; writes host_timings.json (loadable
 * as a timings file). repetitions <= 0 selects the default. */
resiot_status resiot_microbench(int repetitions, uint64_t seed, const char* out_dir);

/* ---------------------------------------------------------------------------
 * Handle layer: group signatures and attribute-based encryption.
 */

typedef struct resiot_group resiot_group;

/* Group with member indices 1..member_count enrolled. */
resiot_status resiot_group_new(uint64_t seed, uint32_t member_count, resiot_group** out);
void resiot_group_free(resiot_group* group);
resiot_status resiot_group_sign(const resiot_group* group, uint32_t member_index,
                                const uint8_t* message, size_t message_len, uint64_t seed,
                                uint8_t* sig, size_t* sig_len);
/* RESIOT_OK for a valid signature, RESIOT_ERR_CRYPTO otherwise. */
resiot_status resiot_group_verify(const resiot_group* group, const uint8_t* message,
                                  size_t message_len, const uint8_t* sig, size_t sig_len);
resiot_status resiot_group_open(const resiot_group* group, const uint8_t* message,
                                size_t message_len, const uint8_t* sig, size_t sig_len,
                                uint32_t* member_index);

typedef struct resiot_abe resiot_abe;

resiot_status resiot_abe_new(uint64_t seed, uint32_t universe_size, resiot_abe** out);
void resiot_abe_free(resiot_abe* abe);
/* Provision a decryption key for a policy string; *key_id receives its id. */
resiot_status resiot_abe_keygen(resiot_abe* abe, const char* policy, uint64_t seed,
                                uint32_t* key_id);
resiot_status resiot_abe_encrypt(const resiot_abe* abe, const uint32_t* attrs, size_t attr_count,
                                 const uint8_t* payload, size_t payload_len, uint64_t seed,
                                 uint8_t* ct, size_t* ct_len);
/* RESIOT_ERR_POLICY when the key's policy rejects the ciphertext attributes. */
resiot_status resiot_abe_decrypt(const resiot_abe* abe, uint32_t key_id, const uint8_t* ct,
                                 size_t ct_len, uint8_t* payload, size_t* payload_len);

#ifdef __cplusplus
}
#endif

#endif /* RESIOT_H */
