/*
 * Copyright 2026 The nistt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C ABI of the loosely-timed simulation kernel (libnistt_kernel.so).
 *
 * All times are unsigned 64-bit picoseconds. Process and event handles are
 * opaque 64-bit ids. One simulation may exist per process at a time.
 *
 * The four functions in the "traced" block are the interposition surface:
 * they are exported, never inlined, and are called by the kernel itself
 * through the dynamic symbol table, so a preloaded definition with the same
 * name sees every call. The list is mirrored in traced_symbols.txt.
 */

#ifndef NISTT_KERNEL_H_
#define NISTT_KERNEL_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SK_EXPORT __attribute__((visibility("default"), noinline))

#define SK_UNBOUNDED UINT64_MAX
#define SK_NO_PROCESS UINT64_MAX

enum sk_status {
    SK_OK = 0,
    SK_EINVAL = 1,     /* invalid argument (quantum 0, empty name, bad handle) */
    SK_EDUPLICATE = 2, /* name already registered */
    SK_ESTATE = 3,     /* operation not allowed in the current kernel state */
    SK_ENOSIM = 4,     /* no simulation exists */
};

enum sk_state {
    SK_CREATED = 0,
    SK_RUNNABLE = 1,
    SK_RUNNING = 2,
    SK_WAITING_TIME = 3,
    SK_WAITING_EVENT = 4,
    SK_TERMINATED = 5,
};

typedef struct sk_config {
    uint64_t quantum_limit_ps; /* > 0; 100 us by default */
    uint64_t run_until_ps;     /* SK_UNBOUNDED for no limit */
    uint64_t rng_seed;
} sk_config;

typedef void (*sk_entry_fn)(void* arg);

/* Fills *cfg with the defaults (quantum 100 us, unbounded, seed 0). */
SK_EXPORT void sk_default_config(sk_config* cfg);

SK_EXPORT int sk_create_simulation(const sk_config* cfg);
SK_EXPORT void sk_destroy_simulation(void);

SK_EXPORT int sk_spawn_process(const char* name, sk_entry_fn entry, void* arg, uint64_t* out_proc);
SK_EXPORT int sk_create_event(const char* name, uint64_t* out_event);

/* Runs until no work remains or `until_ps` is reached; returns final time. */
SK_EXPORT uint64_t sk_run(uint64_t until_ps);

/* Current simulation time. Remains valid after the simulation is destroyed
 * and reports the last time reached. */
SK_EXPORT uint64_t sk_now(void);

/* Quantum keeper. Process context for qk_sync. */
SK_EXPORT void sk_qk_inc(uint64_t proc, uint64_t delta_ps);
SK_EXPORT int sk_qk_need_sync(uint64_t proc);
SK_EXPORT void sk_qk_sync(uint64_t proc);
SK_EXPORT uint64_t sk_qk_local_time(uint64_t proc);
SK_EXPORT uint64_t sk_qk_quantum_limit(void);

SK_EXPORT uint64_t sk_rng_seed(void);

/* Introspection used by tracers to label records without debug symbols. */
SK_EXPORT uint64_t sk_current_process(void);
SK_EXPORT const char* sk_current_process_name(void);
SK_EXPORT const char* sk_process_name(uint64_t proc);
SK_EXPORT const char* sk_event_name(uint64_t ev);
SK_EXPORT int sk_process_state(uint64_t proc);

/* ---- traced ---- */

/* Single entry of every process; first activation runs through here. */
SK_EXPORT void process_entry_trampoline(uint64_t proc);
SK_EXPORT void wait_time(uint64_t duration_ps);
SK_EXPORT void wait_event(uint64_t ev);
SK_EXPORT void notify(uint64_t ev, uint64_t delay_ps);

#ifdef __cplusplus
}
#endif

#endif /* NISTT_KERNEL_H_ */
