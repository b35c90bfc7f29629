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

/**
 * @file shim.cpp
 * @brief LD_PRELOAD tracer for the kernel's traced symbols.
 *
 * Each override records a data point, forwards to the next definition of the
 * same symbol (the kernel library), records a second data point after the
 * original returns, and returns. Everything except the traced symbols is
 * hidden by the version script, so the shim shadows exactly those names.
 */

#include <dlfcn.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>

#include "nistt/kernel.h"
#include "nistt/recorder.hpp"

namespace {

using EntryFn = void (*)(std::uint64_t);
using WaitTimeFn = void (*)(std::uint64_t);
using WaitEventFn = void (*)(std::uint64_t);
using NotifyFn = void (*)(std::uint64_t, std::uint64_t);

struct ForwardTable {
    EntryFn process_entry_trampoline = nullptr;
    WaitTimeFn wait_time = nullptr;
    WaitEventFn wait_event = nullptr;
    NotifyFn notify = nullptr;
};

ForwardTable g_next;
nistt::trace::Recorder* g_recorder = nullptr;

template <typename Fn>
Fn next_symbol(const char* name) {
    return reinterpret_cast<Fn>(dlsym(RTLD_NEXT, name));
}

template <typename Fn>
Fn any_symbol(const char* name) {
    return reinterpret_cast<Fn>(dlsym(RTLD_DEFAULT, name));
}

template <typename Fn>
Fn require(Fn fn, const char* name) {
    if (!fn) {
        std::fprintf(stderr, "nistt: cannot resolve original '%s' behind the preloaded shim\n", name);
        std::fflush(stderr);
        std::abort();
    }
    return fn;
}

std::uint64_t no_time() { return 0; }
std::uint64_t no_process() { return SK_NO_PROCESS; }
const char* no_name(std::uint64_t) { return nullptr; }

__attribute__((constructor)) void shim_load() {
    g_next.process_entry_trampoline = next_symbol<EntryFn>("process_entry_trampoline");
    g_next.wait_time = next_symbol<WaitTimeFn>("wait_time");
    g_next.wait_event = next_symbol<WaitEventFn>("wait_event");
    g_next.notify = next_symbol<NotifyFn>("notify");

    nistt::trace::KernelProbe probe;
    probe.now = any_symbol<std::uint64_t (*)()>("sk_now");
    probe.current_process = any_symbol<std::uint64_t (*)()>("sk_current_process");
    probe.process_name = any_symbol<const char* (*)(std::uint64_t)>("sk_process_name");
    probe.event_name = any_symbol<const char* (*)(std::uint64_t)>("sk_event_name");
    if (!probe.now)
        probe.now = &no_time;
    if (!probe.current_process)
        probe.current_process = &no_process;
    if (!probe.process_name)
        probe.process_name = &no_name;
    if (!probe.event_name)
        probe.event_name = &no_name;

    // Never freed: intercepted calls may still arrive from other static
    // destructors; shim_unload only closes the store.
    g_recorder = new nistt::trace::Recorder(nistt::trace::config_from_env(), probe);
}

__attribute__((destructor)) void shim_unload() {
    if (g_recorder)
        g_recorder->finish();
}

} // namespace

extern "C" {

SK_EXPORT void process_entry_trampoline(uint64_t proc) {
    auto fn = require(g_next.process_entry_trampoline, "process_entry_trampoline");
    g_recorder->process_enter(proc);
    fn(proc);
}

SK_EXPORT void wait_time(uint64_t duration_ps) {
    auto fn = require(g_next.wait_time, "wait_time");
    g_recorder->suspend_time(duration_ps);
    fn(duration_ps);
    g_recorder->resume_time(duration_ps);
}

SK_EXPORT void wait_event(uint64_t ev) {
    auto fn = require(g_next.wait_event, "wait_event");
    g_recorder->suspend_event(ev);
    fn(ev);
    g_recorder->resume_event(ev);
}

SK_EXPORT void notify(uint64_t ev, uint64_t delay_ps) {
    auto fn = require(g_next.notify, "notify");
    g_recorder->notify(ev, delay_ps);
    fn(ev, delay_ps);
}

} // extern "C"
