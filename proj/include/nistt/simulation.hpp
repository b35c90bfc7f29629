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
 * @file simulation.hpp
 * @brief Header-only C++ front end over the kernel's C ABI.
 *
 * Compiled into the simulation, not the kernel, so every traced call leaves
 * the executable through the dynamic symbol table.
 */

#pragma once

#include <cstdio>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nistt/kernel.h"
#include "nistt/time.hpp"

namespace nistt {

class KernelError : public std::runtime_error {
public:
    KernelError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

struct KernelConfig {
    SimTime quantum_limit = SimTime::from_us(100);
    std::optional<SimTime> run_until;
    std::uint64_t rng_seed = 0;
};

struct EventHandle {
    std::uint64_t id = 0;
    std::string name() const {
        const char* n = sk_event_name(id);
        return n ? n : "";
    }
};

struct ProcessHandle {
    std::uint64_t id = 0;

    std::string name() const {
        const char* n = sk_process_name(id);
        return n ? n : "";
    }
    sk_state state() const { return static_cast<sk_state>(sk_process_state(id)); }
    SimTime local_time() const { return SimTime{sk_qk_local_time(id)}; }
};

/// Free functions usable from inside a process.
inline SimTime now() { return SimTime{sk_now()}; }
inline ProcessHandle this_process() { return ProcessHandle{sk_current_process()}; }
inline void wait(SimTime t) { ::wait_time(t.ps); }
inline void wait(EventHandle ev) { ::wait_event(ev.id); }
inline void notify(EventHandle ev, SimTime delay = {}) { ::notify(ev.id, delay.ps); }

/// Temporal-decoupling helper bound to one process.
class QuantumKeeper {
public:
    explicit QuantumKeeper(ProcessHandle proc) : proc_(proc) {}

    void inc(SimTime delta) { sk_qk_inc(proc_.id, delta.ps); }
    bool need_sync() const { return sk_qk_need_sync(proc_.id) != 0; }
    void sync() { sk_qk_sync(proc_.id); }
    SimTime local_time() const { return proc_.local_time(); }

private:
    ProcessHandle proc_;
};

/// Owns the process-wide simulation. Destroying it releases every process
/// stack; suspended processes are abandoned without unwinding.
class Simulation {
public:
    explicit Simulation(const KernelConfig& cfg = {}) {
        sk_config c;
        sk_default_config(&c);
        c.quantum_limit_ps = cfg.quantum_limit.ps;
        c.run_until_ps = cfg.run_until ? cfg.run_until->ps : SK_UNBOUNDED;
        c.rng_seed = cfg.rng_seed;
        check(sk_create_simulation(&c), "create_simulation");
    }
    ~Simulation() { sk_destroy_simulation(); }

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    ProcessHandle spawn(const std::string& name, std::function<void()> body) {
        auto slot = std::make_unique<std::function<void()>>(std::move(body));
        std::uint64_t id = 0;
        check(sk_spawn_process(name.c_str(), &Simulation::thunk, slot.get(), &id),
              "spawn_process '" + name + "'");
        bodies_.push_back(std::move(slot));
        return ProcessHandle{id};
    }

    EventHandle event(const std::string& name) {
        std::uint64_t id = 0;
        check(sk_create_event(name.c_str(), &id), "create_event '" + name + "'");
        return EventHandle{id};
    }

    /// Runs to `until` (or the configured limit when absent).
    SimTime run(std::optional<SimTime> until = std::nullopt) {
        return SimTime{sk_run(until ? until->ps : SK_UNBOUNDED)};
    }

    SimTime now() const { return SimTime{sk_now()}; }

private:
    static void thunk(void* arg) {
        try {
            (*static_cast<std::function<void()>*>(arg))();
        } catch (const std::exception& e) {
            std::fprintf(stderr, "nistt: uncaught exception in process: %s\n", e.what());
            std::terminate();
        }
    }

    static void check(int rc, const std::string& what) {
        switch (rc) {
        case SK_OK:
            return;
        case SK_EINVAL:
            throw KernelError(rc, what + ": invalid argument");
        case SK_EDUPLICATE:
            throw KernelError(rc, what + ": duplicate name");
        case SK_ESTATE:
            throw KernelError(rc, what + ": not allowed in the current state");
        default:
            throw KernelError(rc, what + ": no simulation");
        }
    }

    std::vector<std::unique_ptr<std::function<void()>>> bodies_;
};

} // namespace nistt
